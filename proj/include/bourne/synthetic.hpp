#pragma once

#include <cstddef>
#include <cstdint>

#include "bourne/graph.hpp"

namespace bourne {

struct SyntheticConfig {
  std::size_t num_nodes = 500;
  double edge_prob = 0.02;
  std::size_t feature_dim = 64;
  // Rounds of neighbor averaging applied to the i.i.d. Gaussian features
  // (X <- (1-a) X + a D^-1 A X, a = smoothing_weight). The result is still
  // jointly Gaussian but correlated along edges; 0 rounds gives i.i.d. rows.
  std::size_t smoothing_rounds = 0;
  double smoothing_weight = 0.5;
  std::uint64_t seed = 0;
};

// G(n, p) graph (geometric edge skipping, O(N + M)) with standard Gaussian
// node features, standardized per column after smoothing.
AttributedGraph erdos_renyi_graph(const SyntheticConfig& cfg);

}  // namespace bourne
