#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "bourne/graph.hpp"

namespace bourne {

// Dataset directory layout:
//   edges.csv        header "src,dst", one pair per row, either orientation
//   features.csv     N rows of D comma-separated reals, no header
//   node_labels.csv  optional, N rows of 0/1
//   edge_labels.csv  optional, M rows of 0/1 in canonical edge-id order
//   meta.json        {"num_nodes", "num_edges", "feature_dim"}
struct LoadResult {
  AttributedGraph graph;
  std::vector<std::string> warnings;
};

LoadResult load_dataset(const std::filesystem::path& dir);
void save_dataset(const AttributedGraph& graph, const std::filesystem::path& dir);

}  // namespace bourne
