#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "bourne/graph.hpp"
#include "bourne/random.hpp"

namespace bourne {

struct InjectionConfig {
  std::size_t clique_size = 15;      // n_p
  std::size_t clique_count = 1;      // q
  std::size_t candidate_pool = 50;   // k: size of each candidate set
  std::size_t attr_edge_count = 2;   // s
  std::uint64_t rng_seed = 0;

  void validate() const;
};

struct InjectionReport {
  std::vector<NodeId> injected_node_ids;  // ascending
  std::vector<EdgeId> injected_edge_ids;  // ascending, ids in the output graph
  std::size_t structural_nodes = 0;
  std::size_t structural_edges = 0;
  std::size_t attributive_nodes = 0;
  std::size_t attributive_edges = 0;
};

struct InjectionResult {
  AttributedGraph graph;
  InjectionReport report;
};

// Plants q cliques of n_p nodes each. Nodes already labeled anomalous are not
// selected. Missing clique pairs become anomalous edges; existing pairs keep
// their label.
InjectionResult inject_structural(const AttributedGraph& graph, const InjectionConfig& cfg,
                                  Rng& rng);

// Selects n_p * q nodes not already labeled anomalous. Each one is wired to
// the s farthest (Euclidean) members of a k-node candidate set and takes the
// feature row of the farthest member of a second, disjoint k-node set.
InjectionResult inject_attributive(const AttributedGraph& graph, const InjectionConfig& cfg,
                                   Rng& rng);

struct AttributiveChoice {
  std::vector<NodeId> edge_targets;  // up to s, farthest first
  NodeId feature_source = 0;
};

// The decision for one attributive anomaly v: the s members of the edge
// candidates farthest from v, and the feature candidate farthest from v.
AttributiveChoice attributive_choice(const Matrix& x, NodeId v,
                                     std::span<const NodeId> feature_candidates,
                                     std::span<const NodeId> edge_candidates, std::size_t s);

// Structural pass followed by the attributive pass, both seeded from
// cfg.rng_seed. The report covers the final graph.
InjectionResult inject_anomalies(const AttributedGraph& graph, const InjectionConfig& cfg);

struct AnomalyCorrelation {
  double value = 0.0;
  std::size_t zero_degree_anomalies = 0;  // contributed 0 to the mean
};

// Mean over anomalous nodes of the fraction of incident edges that are
// anomalous. Requires both label vectors and at least one anomalous node.
AnomalyCorrelation anomaly_correlation(const AttributedGraph& graph);

enum class SweepBase { kAttributive, kStructural };

struct CorrelationLevelConfig {
  InjectionConfig injection;
  SweepBase base = SweepBase::kAttributive;
  double level = 1.0;  // requested C_ano in [0, 1]
};

// Generator for the anomaly-correlation sweep. After the base injection, each
// anomalous node v gets round(level * deg(v)) anomalous incident edges
// (injected edges first, then its other edges); all remaining incident edges
// are labeled normal. The shortfall against the number of edges incident to
// anomalous nodes is filled with far-feature edges between normal nodes, so
// the edge-anomaly count stays constant across levels.
InjectionResult inject_correlated(const AttributedGraph& graph,
                                  const CorrelationLevelConfig& cfg);

}  // namespace bourne
