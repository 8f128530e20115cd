#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "vulnlearn/embedding.hpp"

namespace vulnlearn {

// File-level dependency graph. Edge u -> v means u depends on v. Nodes are
// sorted file ids; edges are deduplicated with self-loops removed. The SCC
// condensation and DRH layers are computed once at build time; the graph is
// immutable afterwards and safe to query from many threads.
struct DependencyGraph {
  std::vector<std::string> files;
  std::unordered_map<std::string, int> id_of;
  std::vector<std::vector<int>> out_edges;
  std::vector<std::vector<int>> in_edges;

  std::vector<int> comp_of;                  // node -> SCC id
  std::vector<std::vector<int>> comp_nodes;  // SCC id -> members
  std::vector<std::vector<int>> comp_out;    // condensation DAG
  std::vector<std::vector<int>> comp_in;
  std::vector<int> layers;                   // node -> DRH layer (>= 1)

  int node_id(std::string_view file) const;  // -1 when absent
  std::size_t node_count() const { return files.size(); }

  static DependencyGraph build(std::vector<std::string> files,
                               const std::vector<std::pair<int, int>>& edges);
};

struct ArchMetrics {
  std::string file_id;
  std::int64_t fan_in = 0;
  std::int64_t fan_out = 0;
  std::int64_t drh_layer = 1;
  std::int64_t space_size = 1;
  std::int64_t upper_width = 0;
  std::int64_t upper_depth = 0;
  std::int64_t lower_width = 0;
  std::int64_t lower_depth = 0;
};

// Scans *.java files under project_root and resolves edges from import
// statements and same-package type references. References that do not
// resolve inside the project are ignored.
DependencyGraph extract_dependencies(const std::filesystem::path& project_root);

// Same resolver restricted to the given project-relative files; references
// to files outside the list stay unresolved.
DependencyGraph extract_dependencies(const std::filesystem::path& project_root,
                                     const std::vector<std::string>& files);

int fan_in(const DependencyGraph& g, std::string_view file);
int fan_out(const DependencyGraph& g, std::string_view file);

// Layer 1 = components with no outgoing dependencies; otherwise
// 1 + max(layer of dependencies). All members of an SCC share the layer.
std::vector<int> drh_layers(const DependencyGraph& g);

ArchMetrics butterfly_metrics(const DependencyGraph& g, std::string_view file);

// One 8-feature vector per file in graph node order:
// fan_in, fan_out, drh_layer, space_size, upper_width, upper_depth,
// lower_width, lower_depth.
std::vector<FileVector> arch_features(const DependencyGraph& g);

// Edge list: "source<TAB>target" per edge; isolated nodes appear as a bare
// path line so graphs round-trip completely.
void write_edge_list(const DependencyGraph& g, std::ostream& out);
DependencyGraph read_edge_list(std::istream& in);

void write_metrics_csv(const std::vector<ArchMetrics>& metrics, std::ostream& out);

}  // namespace vulnlearn
