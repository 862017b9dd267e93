#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "bourne/sparse.hpp"
#include "bourne/tensor.hpp"

namespace bourne {

using NodeId = std::uint32_t;
using EdgeId = std::uint32_t;
using Labels = std::vector<std::uint8_t>;

// Undirected edge in canonical orientation (u < v).
struct Edge {
  NodeId u = 0;
  NodeId v = 0;
  auto operator<=>(const Edge&) const = default;
};

// Simple undirected graph with dense node features and optional anomaly
// labels. Edge ids are positions in the sorted canonical edge list. Immutable
// except for label assignment and whole-row feature replacement.
class AttributedGraph {
 public:
  AttributedGraph() = default;

  std::size_t num_nodes() const { return num_nodes_; }
  std::size_t num_edges() const { return edges_.size(); }
  std::size_t feature_dim() const { return static_cast<std::size_t>(features_.cols()); }

  const Matrix& features() const { return features_; }
  std::span<const Edge> edges() const { return edges_; }
  const Edge& edge(EdgeId e) const { return edges_[e]; }

  // Sorted neighbor ids of v, and the edge id for each of them (same order).
  std::span<const NodeId> neighbors(NodeId v) const {
    return {neighbor_.data() + offsets_[v], offsets_[v + 1] - offsets_[v]};
  }
  std::span<const EdgeId> incident_edges(NodeId v) const {
    return {incident_.data() + offsets_[v], offsets_[v + 1] - offsets_[v]};
  }
  std::size_t degree(NodeId v) const { return offsets_[v + 1] - offsets_[v]; }

  std::optional<EdgeId> find_edge(NodeId a, NodeId b) const;
  bool has_edge(NodeId a, NodeId b) const { return find_edge(a, b).has_value(); }

  // Symmetric 0/1 adjacency in CSR form.
  SparseMatrix adjacency() const;

  const std::optional<Labels>& node_labels() const { return node_labels_; }
  const std::optional<Labels>& edge_labels() const { return edge_labels_; }
  void set_node_labels(Labels labels);
  void set_edge_labels(Labels labels);
  void clear_labels();

  void set_feature_row(NodeId v, const ConstRowRef& row);

  // Throws InvalidInput when any structural invariant is violated.
  void validate() const;

 private:
  friend AttributedGraph build_graph(std::size_t, std::span<const Edge>, Matrix);

  std::size_t num_nodes_ = 0;
  Matrix features_;
  std::vector<Edge> edges_;
  std::vector<std::size_t> offsets_{0};
  std::vector<NodeId> neighbor_;
  std::vector<EdgeId> incident_;
  std::optional<Labels> node_labels_;
  std::optional<Labels> edge_labels_;
};

// Canonicalizes (orients u < v, sorts, deduplicates) the given pairs.
// Throws InvalidInput on out-of-range ids, self-loops, or a feature matrix
// whose row count differs from num_nodes.
AttributedGraph build_graph(std::size_t num_nodes, std::span<const Edge> pairs,
                            Matrix features);

// Rebuilds `graph` with extra edges. Existing edges keep their labels; new
// edges take `new_edge_label`. Pairs that already exist are ignored.
AttributedGraph add_edges(const AttributedGraph& graph, std::span<const Edge> new_pairs,
                          std::uint8_t new_edge_label);

// N x M node-edge incidence matrix.
SparseMatrix incidence(const AttributedGraph& graph);

struct DualHypergraph {
  SparseMatrix incidence;  // M x N, the transpose of the node-edge incidence
  Matrix features;         // M x D, mean of the two endpoint rows

  std::size_t num_dual_nodes() const { return incidence.rows(); }
  std::size_t num_hyperedges() const { return incidence.cols(); }
};

// Edges become dual nodes, nodes become hyperedges. Requires M >= 1.
DualHypergraph dual_transform(const AttributedGraph& graph);

// Nodes at shortest-path distance 1..k from v, ascending.
std::vector<NodeId> k_hop_neighbors(const AttributedGraph& graph, NodeId v, std::size_t k);

}  // namespace bourne
