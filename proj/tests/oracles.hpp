// Independent reference implementations used to check the library. Kept
// deliberately naive: transitive closure by Floyd-Warshall, SCCs by mutual
// reachability, longest paths by plain recursion, AUC by pairwise counting,
// t-test p-values by numerical integration of the density.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <set>
#include <vector>

namespace oracles {

struct GraphOracle {
  int n = 0;
  std::vector<std::vector<bool>> adj;    // adj[u][v]: u -> v
  std::vector<std::vector<bool>> reach;  // transitive closure (no self unless cycle)
  std::vector<int> comp_of;
  std::vector<std::vector<int>> comps;

  explicit GraphOracle(int nodes, const std::vector<std::pair<int, int>>& edges)
      : n(nodes), adj(nodes, std::vector<bool>(nodes, false)) {
    for (auto [u, v] : edges)
      if (u != v) adj[u][v] = true;
    reach = adj;
    for (int k = 0; k < n; ++k)
      for (int i = 0; i < n; ++i)
        if (reach[i][k])
          for (int j = 0; j < n; ++j)
            if (reach[k][j]) reach[i][j] = true;

    comp_of.assign(n, -1);
    for (int u = 0; u < n; ++u) {
      if (comp_of[u] != -1) continue;
      std::vector<int> members{u};
      comp_of[u] = static_cast<int>(comps.size());
      for (int v = u + 1; v < n; ++v)
        if (comp_of[v] == -1 && reach[u][v] && reach[v][u]) {
          comp_of[v] = comp_of[u];
          members.push_back(v);
        }
      comps.push_back(std::move(members));
    }
  }

  int fan_in(int f) const {
    int c = 0;
    for (int u = 0; u < n; ++u) c += adj[u][f] ? 1 : 0;
    return c;
  }
  int fan_out(int f) const {
    int c = 0;
    for (int v = 0; v < n; ++v) c += adj[f][v] ? 1 : 0;
    return c;
  }

  std::set<int> upper_wing(int f) const {
    std::set<int> wing;
    for (int u = 0; u < n; ++u)
      if (u != f && reach[u][f]) wing.insert(u);
    return wing;
  }
  std::set<int> lower_wing(int f) const {
    std::set<int> wing;
    for (int v = 0; v < n; ++v)
      if (v != f && reach[f][v]) wing.insert(v);
    return wing;
  }

  std::int64_t space_size(int f) const {
    std::set<int> space = upper_wing(f);
    auto lower = lower_wing(f);
    space.insert(lower.begin(), lower.end());
    space.insert(f);
    return static_cast<std::int64_t>(space.size());
  }

  // max population over shortest-path distance levels (BFS semantics via
  // repeated frontier expansion on the closure-checked raw graph)
  std::int64_t wing_width(int f, bool upper) const {
    std::vector<int> dist(n, -1);
    dist[f] = 0;
    std::map<int, std::int64_t> levels;
    bool changed = true;
    int d = 0;
    std::vector<int> frontier{f};
    while (changed) {
      changed = false;
      std::vector<int> next;
      for (int u : frontier)
        for (int v = 0; v < n; ++v) {
          bool edge = upper ? adj[v][u] : adj[u][v];
          if (edge && dist[v] == -1) {
            dist[v] = d + 1;
            next.push_back(v);
            ++levels[d + 1];
            changed = true;
          }
        }
      frontier = std::move(next);
      ++d;
    }
    std::int64_t width = 0;
    for (auto& [_, c] : levels) width = std::max(width, c);
    return width;
  }

  // condensation adjacency from the closure-derived components
  std::vector<std::set<int>> comp_adj(bool reversed) const {
    std::vector<std::set<int>> out(comps.size());
    for (int u = 0; u < n; ++u)
      for (int v = 0; v < n; ++v)
        if (adj[u][v] && comp_of[u] != comp_of[v]) {
          if (reversed)
            out[comp_of[v]].insert(comp_of[u]);
          else
            out[comp_of[u]].insert(comp_of[v]);
        }
    return out;
  }

  std::int64_t longest_path_from(int comp, bool reversed) const {
    auto adjacency = comp_adj(reversed);
    std::function<std::int64_t(int)> rec = [&](int c) -> std::int64_t {
      std::int64_t best = 0;
      for (int d : adjacency[c]) best = std::max(best, rec(d) + 1);
      return best;
    };
    return rec(comp);
  }

  std::int64_t upper_depth(int f) const {
    return longest_path_from(comp_of[f], /*reversed=*/true);
  }
  std::int64_t lower_depth(int f) const {
    return longest_path_from(comp_of[f], /*reversed=*/false);
  }

  std::int64_t drh_layer(int f) const {
    auto adjacency = comp_adj(/*reversed=*/false);
    std::function<std::int64_t(int)> rec = [&](int c) -> std::int64_t {
      std::int64_t layer = 1;
      for (int d : adjacency[c]) layer = std::max(layer, rec(d) + 1);
      return layer;
    };
    return rec(comp_of[f]);
  }
};

// O(n^2) pairwise-comparison ROC AUC with 0.5 credit for ties
inline double pairwise_roc_auc(const std::vector<double>& scores,
                               const std::vector<int>& labels) {
  double wins = 0;
  std::int64_t pairs = 0;
  for (std::size_t i = 0; i < scores.size(); ++i)
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (labels[i] != 1 || labels[j] != 0) continue;
      ++pairs;
      if (scores[i] > scores[j]) wins += 1.0;
      else if (scores[i] == scores[j]) wins += 0.5;
    }
  return wins / static_cast<double>(pairs);
}

// Student's t density with df degrees of freedom
inline double t_density(double x, int df) {
  const double v = static_cast<double>(df);
  const double c =
      std::exp(std::lgamma((v + 1) / 2) - std::lgamma(v / 2)) /
      std::sqrt(v * M_PI);
  return c * std::pow(1.0 + x * x / v, -(v + 1) / 2);
}

// two-tailed p-value by Simpson integration of the tail mass
inline double t_two_tailed_p_by_integration(double t, int df) {
  const double a = std::abs(t);
  const double b = a + 400.0;  // density is negligible past this
  const int steps = 2000000;   // even
  const double h = (b - a) / steps;
  double sum = t_density(a, df) + t_density(b, df);
  for (int i = 1; i < steps; ++i)
    sum += t_density(a + i * h, df) * (i % 2 == 1 ? 4.0 : 2.0);
  return 2.0 * sum * h / 3.0;
}

}  // namespace oracles
