#include "vulnlearn/archgraph.hpp"

#include <algorithm>
#include <cctype>
#include <deque>
#include <fstream>
#include <iostream>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "vulnlearn/tokenizer.hpp"

namespace vulnlearn {

int DependencyGraph::node_id(std::string_view file) const {
  auto it = id_of.find(std::string(file));
  return it == id_of.end() ? -1 : it->second;
}

namespace {

// Iterative Tarjan; components come out in reverse topological order of the
// condensation (every successor component has a smaller id).
void tarjan_scc(const std::vector<std::vector<int>>& adj,
                std::vector<int>& comp_of,
                std::vector<std::vector<int>>& comp_nodes) {
  const int n = static_cast<int>(adj.size());
  comp_of.assign(n, -1);
  std::vector<int> index(n, -1), lowlink(n, 0), stack;
  std::vector<bool> on_stack(n, false);
  int next_index = 0;

  struct Frame {
    int node;
    std::size_t edge;
  };

  for (int start = 0; start < n; ++start) {
    if (index[start] != -1) continue;
    std::vector<Frame> frames{{start, 0}};
    index[start] = lowlink[start] = next_index++;
    stack.push_back(start);
    on_stack[start] = true;

    while (!frames.empty()) {
      Frame& f = frames.back();
      if (f.edge < adj[f.node].size()) {
        int next = adj[f.node][f.edge++];
        if (index[next] == -1) {
          index[next] = lowlink[next] = next_index++;
          stack.push_back(next);
          on_stack[next] = true;
          frames.push_back({next, 0});
        } else if (on_stack[next]) {
          lowlink[f.node] = std::min(lowlink[f.node], index[next]);
        }
      } else {
        if (lowlink[f.node] == index[f.node]) {
          std::vector<int> members;
          while (true) {
            int v = stack.back();
            stack.pop_back();
            on_stack[v] = false;
            comp_of[v] = static_cast<int>(comp_nodes.size());
            members.push_back(v);
            if (v == f.node) break;
          }
          std::sort(members.begin(), members.end());
          comp_nodes.push_back(std::move(members));
        }
        int done = f.node;
        frames.pop_back();
        if (!frames.empty())
          lowlink[frames.back().node] =
              std::min(lowlink[frames.back().node], lowlink[done]);
      }
    }
  }
}

}  // namespace

DependencyGraph DependencyGraph::build(
    std::vector<std::string> files,
    const std::vector<std::pair<int, int>>& edges) {
  DependencyGraph g;
  g.files = std::move(files);
  std::sort(g.files.begin(), g.files.end());
  g.files.erase(std::unique(g.files.begin(), g.files.end()), g.files.end());
  for (std::size_t i = 0; i < g.files.size(); ++i)
    g.id_of.emplace(g.files[i], static_cast<int>(i));

  const int n = static_cast<int>(g.files.size());
  std::vector<std::set<int>> out(n);
  for (auto [u, v] : edges) {
    if (u < 0 || v < 0 || u >= n || v >= n)
      throw std::invalid_argument("DependencyGraph::build: edge out of range");
    if (u != v) out[u].insert(v);
  }
  g.out_edges.assign(n, {});
  g.in_edges.assign(n, {});
  for (int u = 0; u < n; ++u)
    for (int v : out[u]) {
      g.out_edges[u].push_back(v);
      g.in_edges[v].push_back(u);
    }
  for (auto& row : g.in_edges) std::sort(row.begin(), row.end());

  tarjan_scc(g.out_edges, g.comp_of, g.comp_nodes);
  const int n_comps = static_cast<int>(g.comp_nodes.size());
  std::vector<std::set<int>> comp_out(n_comps);
  for (int u = 0; u < n; ++u)
    for (int v : g.out_edges[u])
      if (g.comp_of[u] != g.comp_of[v]) comp_out[g.comp_of[u]].insert(g.comp_of[v]);
  g.comp_out.assign(n_comps, {});
  g.comp_in.assign(n_comps, {});
  for (int c = 0; c < n_comps; ++c)
    for (int d : comp_out[c]) {
      g.comp_out[c].push_back(d);
      g.comp_in[d].push_back(c);
    }
  for (auto& row : g.comp_in) std::sort(row.begin(), row.end());

  // DRH layers on the condensation. Tarjan's emission order guarantees every
  // successor component is already done.
  std::vector<int> comp_layer(n_comps, 1);
  for (int c = 0; c < n_comps; ++c)
    for (int d : g.comp_out[c])
      comp_layer[c] = std::max(comp_layer[c], comp_layer[d] + 1);
  g.layers.assign(n, 1);
  for (int u = 0; u < n; ++u) g.layers[u] = comp_layer[g.comp_of[u]];
  return g;
}

namespace {

int require_node(const DependencyGraph& g, std::string_view file) {
  int id = g.node_id(file);
  if (id < 0)
    throw std::out_of_range("unknown file '" + std::string(file) + "'");
  return id;
}

// BFS levels over one direction; returns reached nodes (excluding start) and
// the maximum population of a single distance level.
struct Wing {
  std::vector<int> nodes;
  std::int64_t width = 0;
};

Wing explore_wing(const DependencyGraph& g, int start,
                  const std::vector<std::vector<int>>& adj) {
  Wing wing;
  std::vector<int> dist(g.node_count(), -1);
  std::deque<int> queue{start};
  dist[start] = 0;
  std::unordered_map<int, std::int64_t> level_count;
  while (!queue.empty()) {
    int u = queue.front();
    queue.pop_front();
    for (int v : adj[u]) {
      if (dist[v] != -1) continue;
      dist[v] = dist[u] + 1;
      wing.nodes.push_back(v);
      ++level_count[dist[v]];
      queue.push_back(v);
    }
  }
  for (const auto& [_, c] : level_count) wing.width = std::max(wing.width, c);
  return wing;
}

// Longest path (in condensation edges) from f's component through the given
// adjacency direction, memoized over the acyclic condensation.
std::int64_t longest_condensed_path(const DependencyGraph& g, int start_comp,
                                    const std::vector<std::vector<int>>& comp_adj) {
  std::vector<std::int64_t> memo(g.comp_nodes.size(), -1);
  // iterative post-order DP
  std::vector<std::pair<int, std::size_t>> frames{{start_comp, 0}};
  while (!frames.empty()) {
    auto& [c, edge] = frames.back();
    if (edge < comp_adj[c].size()) {
      int next = comp_adj[c][edge++];
      if (memo[next] == -1) frames.push_back({next, 0});
    } else {
      std::int64_t best = 0;
      for (int next : comp_adj[c])
        best = std::max(best, memo[next] + 1);
      memo[c] = best;
      frames.pop_back();
    }
  }
  return memo[start_comp];
}

}  // namespace

int fan_in(const DependencyGraph& g, std::string_view file) {
  return static_cast<int>(g.in_edges[require_node(g, file)].size());
}

int fan_out(const DependencyGraph& g, std::string_view file) {
  return static_cast<int>(g.out_edges[require_node(g, file)].size());
}

std::vector<int> drh_layers(const DependencyGraph& g) { return g.layers; }

ArchMetrics butterfly_metrics(const DependencyGraph& g, std::string_view file) {
  const int f = require_node(g, file);
  ArchMetrics m;
  m.file_id = g.files[f];
  m.fan_in = static_cast<std::int64_t>(g.in_edges[f].size());
  m.fan_out = static_cast<std::int64_t>(g.out_edges[f].size());
  m.drh_layer = g.layers[f];

  Wing upper = explore_wing(g, f, g.in_edges);   // files reaching f
  Wing lower = explore_wing(g, f, g.out_edges);  // files reachable from f
  std::set<int> space(upper.nodes.begin(), upper.nodes.end());
  space.insert(lower.nodes.begin(), lower.nodes.end());
  space.insert(f);
  m.space_size = static_cast<std::int64_t>(space.size());
  m.upper_width = upper.width;
  m.lower_width = lower.width;
  m.upper_depth = longest_condensed_path(g, g.comp_of[f], g.comp_in);
  m.lower_depth = longest_condensed_path(g, g.comp_of[f], g.comp_out);
  return m;
}

std::vector<FileVector> arch_features(const DependencyGraph& g) {
  std::vector<FileVector> features;
  features.reserve(g.node_count());
  for (const auto& file : g.files) {
    ArchMetrics m = butterfly_metrics(g, file);
    FileVector fv;
    fv.file_id = file;
    fv.source = VectorSource::Arch;
    fv.values = {static_cast<double>(m.fan_in),
                 static_cast<double>(m.fan_out),
                 static_cast<double>(m.drh_layer),
                 static_cast<double>(m.space_size),
                 static_cast<double>(m.upper_width),
                 static_cast<double>(m.upper_depth),
                 static_cast<double>(m.lower_width),
                 static_cast<double>(m.lower_depth)};
    features.push_back(std::move(fv));
  }
  return features;
}

namespace {

struct ParsedSource {
  std::string package;
  std::vector<std::string> imports;          // fully qualified class imports
  std::vector<std::string> wildcard_imports; // package part of import x.y.*
  std::set<std::string> identifiers;         // raw word tokens (original case)
};

bool word_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '$';
}

ParsedSource parse_source(const std::string& text) {
  ParsedSource parsed;
  const std::string code = strip_comments(text);

  std::istringstream lines(code);
  std::string line;
  while (std::getline(lines, line)) {
    std::istringstream ls(line);
    std::string kw;
    ls >> kw;
    if (kw == "package") {
      std::string rest;
      ls >> rest;
      if (!rest.empty() && rest.back() == ';') rest.pop_back();
      parsed.package = rest;
    } else if (kw == "import") {
      std::string rest;
      ls >> rest;
      if (rest == "static") ls >> rest;
      if (!rest.empty() && rest.back() == ';') rest.pop_back();
      if (rest.size() > 2 && rest.substr(rest.size() - 2) == ".*")
        parsed.wildcard_imports.push_back(rest.substr(0, rest.size() - 2));
      else if (!rest.empty())
        parsed.imports.push_back(rest);
    }
  }

  std::string word;
  for (char c : code) {
    if (word_char(c)) {
      word.push_back(c);
    } else if (!word.empty()) {
      parsed.identifiers.insert(word);
      word.clear();
    }
  }
  if (!word.empty()) parsed.identifiers.insert(word);
  return parsed;
}

std::string file_stem(const std::string& rel_path) {
  auto slash = rel_path.find_last_of('/');
  std::string name = slash == std::string::npos ? rel_path
                                                : rel_path.substr(slash + 1);
  auto dot = name.find_last_of('.');
  return dot == std::string::npos ? name : name.substr(0, dot);
}

DependencyGraph build_from_sources(
    const std::filesystem::path& root,
    const std::vector<std::string>& rel_files) {
  std::vector<std::string> files = rel_files;
  std::sort(files.begin(), files.end());
  files.erase(std::unique(files.begin(), files.end()), files.end());

  std::vector<ParsedSource> parsed(files.size());
  std::vector<bool> readable(files.size(), true);
  for (std::size_t i = 0; i < files.size(); ++i) {
    std::ifstream in(root / files[i], std::ios::binary);
    if (!in) {
      std::cerr << "warning: cannot read " << files[i] << ", skipping\n";
      readable[i] = false;
      continue;
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    parsed[i] = parse_source(buf.str());
  }

  // (package, class stem) -> node; first file wins on duplicates
  std::unordered_map<std::string, int> class_index;
  for (std::size_t i = 0; i < files.size(); ++i) {
    if (!readable[i]) continue;
    class_index.emplace(parsed[i].package + "." + file_stem(files[i]),
                        static_cast<int>(i));
  }

  std::vector<std::pair<int, int>> edges;
  for (std::size_t i = 0; i < files.size(); ++i) {
    if (!readable[i]) continue;
    const auto& src = parsed[i];
    auto add_edge = [&](int target) {
      if (target != static_cast<int>(i)) edges.emplace_back(static_cast<int>(i), target);
    };
    for (const auto& qualified : src.imports) {
      auto it = class_index.find(qualified);
      if (it != class_index.end()) add_edge(it->second);
    }
    for (const auto& pkg : src.wildcard_imports) {
      // resolve only classes the file actually names
      for (const auto& ident : src.identifiers) {
        auto it = class_index.find(pkg + "." + ident);
        if (it != class_index.end()) add_edge(it->second);
      }
    }
    // same-package references without import
    for (const auto& ident : src.identifiers) {
      auto it = class_index.find(src.package + "." + ident);
      if (it != class_index.end()) add_edge(it->second);
    }
  }
  return DependencyGraph::build(std::move(files), edges);
}

}  // namespace

DependencyGraph extract_dependencies(const std::filesystem::path& project_root) {
  std::vector<std::string> files;
  if (std::filesystem::exists(project_root)) {
    for (const auto& entry :
         std::filesystem::recursive_directory_iterator(project_root)) {
      if (!entry.is_regular_file() || entry.path().extension() != ".java")
        continue;
      files.push_back(
          std::filesystem::relative(entry.path(), project_root).generic_string());
    }
  }
  return build_from_sources(project_root, files);
}

DependencyGraph extract_dependencies(const std::filesystem::path& project_root,
                                     const std::vector<std::string>& files) {
  return build_from_sources(project_root, files);
}

void write_edge_list(const DependencyGraph& g, std::ostream& out) {
  for (std::size_t u = 0; u < g.node_count(); ++u) {
    if (g.out_edges[u].empty() && g.in_edges[u].empty()) {
      out << g.files[u] << '\n';
      continue;
    }
    for (int v : g.out_edges[u]) out << g.files[u] << '\t' << g.files[v] << '\n';
  }
}

DependencyGraph read_edge_list(std::istream& in) {
  std::vector<std::string> files;
  std::vector<std::pair<std::string, std::string>> raw_edges;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos) {
      files.push_back(line);
    } else {
      std::string u = line.substr(0, tab);
      std::string v = line.substr(tab + 1);
      files.push_back(u);
      files.push_back(v);
      raw_edges.emplace_back(std::move(u), std::move(v));
    }
  }
  std::sort(files.begin(), files.end());
  files.erase(std::unique(files.begin(), files.end()), files.end());
  std::unordered_map<std::string, int> ids;
  for (std::size_t i = 0; i < files.size(); ++i)
    ids.emplace(files[i], static_cast<int>(i));
  std::vector<std::pair<int, int>> edges;
  for (const auto& [u, v] : raw_edges) edges.emplace_back(ids[u], ids[v]);
  return DependencyGraph::build(std::move(files), edges);
}

void write_metrics_csv(const std::vector<ArchMetrics>& metrics,
                       std::ostream& out) {
  out << "file,fan_in,fan_out,drh_layer,space_size,upper_width,upper_depth,"
         "lower_width,lower_depth\n";
  for (const auto& m : metrics)
    out << m.file_id << ',' << m.fan_in << ',' << m.fan_out << ','
        << m.drh_layer << ',' << m.space_size << ',' << m.upper_width << ','
        << m.upper_depth << ',' << m.lower_width << ',' << m.lower_depth
        << '\n';
}

}  // namespace vulnlearn
