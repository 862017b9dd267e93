#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "bourne/graph.hpp"
#include "bourne/random.hpp"
#include "bourne/sparse.hpp"

namespace bourne {

struct AugmentConfig {
  double feature_mask_prob = 0.2;    // Gamma_1, per dual-node feature row
  double hyperedge_drop_prob = 0.2;  // Gamma_2, per incidence nonzero

  void validate() const;
};

struct ViewConfig {
  std::size_t hops = 2;            // k
  std::size_t subgraph_size = 12;  // K
  std::size_t max_redraws = 3;     // before force-including a neighbor
  AugmentConfig augment;

  void validate() const;
};

struct TargetSample {
  NodeId node = 0;
  std::vector<EdgeId> edges;  // every incident edge id in the full graph
};

struct TargetBatch {
  std::vector<TargetSample> targets;
  std::size_t isolated_excluded = 0;
};

// Up to `batch_size` distinct non-isolated nodes, uniformly without
// replacement. Throws InvalidInput if every node is isolated.
TargetBatch sample_target_batch(const AttributedGraph& graph, std::size_t batch_size, Rng& rng);

// Non-isolated nodes shuffled and split into consecutive batches.
std::vector<std::vector<NodeId>> epoch_batches(const AttributedGraph& graph,
                                               std::size_t batch_size, Rng& rng);

// Enclosing subgraph with fixed slot count K + 1. Slot 0 holds the target;
// the other slots hold draws and may repeat a node. Edges are slot pairs
// (a < b) sorted ascending, so the M_tar target edges (a == 0) come first.
// Only the first slot holding a given neighbor is joined to the target slot,
// which keeps each original target edge unique.
struct Subgraph {
  NodeId target = 0;
  std::vector<NodeId> slots;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;
  std::vector<EdgeId> edge_ids;  // original id per slot pair
  bool forced_neighbor = false;

  std::size_t num_slots() const { return slots.size(); }
  std::size_t num_edges() const { return edges.size(); }
  std::size_t num_target_edges() const;
  SparseMatrix adjacency() const;
  SparseMatrix incidence() const;  // slots x slot pairs
};

// Induced slot graph for an explicit draw sequence (no retries).
Subgraph induced_subgraph(const AttributedGraph& graph, NodeId target,
                          std::span<const NodeId> draws);

// K draws with replacement from the k-hop ball. If no target edge survives,
// redraws up to cfg.max_redraws times, then puts a random neighbor in slot 1.
Subgraph extract_subgraph(const AttributedGraph& graph, NodeId target, const ViewConfig& cfg,
                          Rng& rng);

// Slot-level simple graph carrying gathered feature rows.
AttributedGraph subgraph_as_graph(const AttributedGraph& graph, const Subgraph& sub);

struct HypergraphPerturbation {
  SparseMatrix incidence;
  std::vector<std::uint8_t> masked_rows;
};

// Gamma_1 then Gamma_2 on a dual incidence. The first `protected_rows` dual
// nodes are never masked and never lose a membership; no dual node is left
// without a membership.
HypergraphPerturbation perturb_hypergraph(const SparseMatrix& incidence,
                                          std::size_t protected_rows, const AugmentConfig& cfg,
                                          Rng& rng);

DualHypergraph augment_hypergraph(const DualHypergraph& dual, const AugmentConfig& cfg, Rng& rng,
                                  std::size_t protected_rows = 0);

// Zero the first `count` rows and append their original values at the end.
Matrix anonymize_rows(const Matrix& rows, std::size_t count);
SparseMatrix anonymize_rows(const SparseMatrix& rows, std::size_t count);

// [[A, 0], [0, 1]]
SparseMatrix append_isolated_node(const SparseMatrix& adjacency);
// [[M, 0], [0, I_count]]
SparseMatrix append_isolated_dual_nodes(const SparseMatrix& incidence, std::size_t count);

struct AnonymizedView {
  Matrix features;
  SparseMatrix structure;
};

// Target in row 0 of the subgraph features.
AnonymizedView anonymize_node_view(const Matrix& features, const SparseMatrix& adjacency);
// Target edges in the first `num_target_edges` rows of the dual.
AnonymizedView anonymize_edge_view(const Matrix& features, const SparseMatrix& incidence,
                                   std::size_t num_target_edges);

// One training/scoring instance. Feature matrices are stored as sparse maps
// over global node ids, so X_hat = map * X for the full feature matrix X.
struct ViewPair {
  NodeId target = 0;
  std::vector<EdgeId> target_edges;  // E_t
  std::vector<NodeId> slot_nodes;    // N_s entries
  std::vector<EdgeId> dual_edge_ids; // M_s entries, targets first
  SparseMatrix adjacency;            // (N_s+1) x (N_s+1)
  SparseMatrix incidence;            // (M_s+M_tar) x (N_s+M_tar)
  SparseMatrix node_feature_map;     // (N_s+1) x N
  SparseMatrix edge_feature_map;     // (M_s+M_tar) x N

  std::size_t num_slots() const { return slot_nodes.size(); }
  std::size_t num_dual_nodes() const { return dual_edge_ids.size(); }
  std::size_t num_target_edges() const { return target_edges.size(); }

  Matrix node_features(const Matrix& x) const { return spmm(node_feature_map, x); }
  Matrix edge_features(const Matrix& x) const { return spmm(edge_feature_map, x); }
};

ViewPair build_view(const AttributedGraph& graph, NodeId target, const ViewConfig& cfg,
                    Rng& rng);

// Throws InvalidInput naming the first violated ViewPair invariant.
void validate_view(const ViewPair& view, const AttributedGraph& graph);

}  // namespace bourne
