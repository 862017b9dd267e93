#include "bourne/graph.hpp"

#include <algorithm>
#include <iterator>

#include <fmt/format.h>

#include "bourne/errors.hpp"

namespace bourne {

namespace {

void check_labels(const Labels& labels, std::size_t expected, const char* what) {
  if (labels.size() != expected) {
    throw InvalidInput(fmt::format("{} label vector has length {}, expected {}", what,
                                   labels.size(), expected));
  }
  for (auto l : labels) {
    if (l > 1) throw InvalidInput(fmt::format("{} labels must be 0/1", what));
  }
}

}  // namespace

std::optional<EdgeId> AttributedGraph::find_edge(NodeId a, NodeId b) const {
  if (a >= num_nodes_ || b >= num_nodes_ || a == b) return std::nullopt;
  const auto nbrs = neighbors(a);
  const auto it = std::lower_bound(nbrs.begin(), nbrs.end(), b);
  if (it == nbrs.end() || *it != b) return std::nullopt;
  return incident_edges(a)[static_cast<std::size_t>(it - nbrs.begin())];
}

SparseMatrix AttributedGraph::adjacency() const {
  std::vector<Triplet> triplets;
  triplets.reserve(neighbor_.size());
  for (NodeId v = 0; v < num_nodes_; ++v) {
    for (auto u : neighbors(v)) triplets.push_back({v, u, 1.0f});
  }
  return SparseMatrix::from_triplets(num_nodes_, num_nodes_, std::move(triplets));
}

void AttributedGraph::set_node_labels(Labels labels) {
  check_labels(labels, num_nodes_, "node");
  node_labels_ = std::move(labels);
}

void AttributedGraph::set_edge_labels(Labels labels) {
  check_labels(labels, edges_.size(), "edge");
  edge_labels_ = std::move(labels);
}

void AttributedGraph::clear_labels() {
  node_labels_.reset();
  edge_labels_.reset();
}

void AttributedGraph::set_feature_row(NodeId v, const ConstRowRef& row) {
  if (v >= num_nodes_ || row.size() != features_.cols()) {
    throw InvalidInput("set_feature_row: bad node id or row width");
  }
  features_.row(v) = row;
}

void AttributedGraph::validate() const {
  if (static_cast<std::size_t>(features_.rows()) != num_nodes_) {
    throw InvalidInput("feature row count differs from node count");
  }
  for (std::size_t e = 0; e < edges_.size(); ++e) {
    const auto& edge = edges_[e];
    if (edge.u >= edge.v || edge.v >= num_nodes_) {
      throw InvalidInput(fmt::format("edge {} is not canonical", e));
    }
    if (e > 0 && !(edges_[e - 1] < edge)) throw InvalidInput("edge list not sorted/unique");
  }
  if (neighbor_.size() != 2 * edges_.size()) {
    throw InvalidInput("adjacency nonzero count differs from 2M");
  }
  for (NodeId v = 0; v < num_nodes_; ++v) {
    const auto nbrs = neighbors(v);
    const auto inc = incident_edges(v);
    for (std::size_t i = 0; i < nbrs.size(); ++i) {
      const auto& edge = edges_[inc[i]];
      const Edge expected{std::min(v, nbrs[i]), std::max(v, nbrs[i])};
      if (edge != expected) throw InvalidInput("incident edge id mismatch");
    }
  }
  if (node_labels_) check_labels(*node_labels_, num_nodes_, "node");
  if (edge_labels_) check_labels(*edge_labels_, edges_.size(), "edge");
}

AttributedGraph build_graph(std::size_t num_nodes, std::span<const Edge> pairs,
                            Matrix features) {
  if (static_cast<std::size_t>(features.rows()) != num_nodes) {
    throw InvalidInput(fmt::format("feature matrix has {} rows, expected {}",
                                   features.rows(), num_nodes));
  }
  std::vector<Edge> edges;
  edges.reserve(pairs.size());
  for (const auto& p : pairs) {
    if (p.u >= num_nodes || p.v >= num_nodes) {
      throw InvalidInput(fmt::format("edge ({}, {}) references a node outside [0, {})", p.u,
                                     p.v, num_nodes));
    }
    if (p.u == p.v) throw InvalidInput(fmt::format("self-loop on node {}", p.u));
    edges.push_back({std::min(p.u, p.v), std::max(p.u, p.v)});
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

  AttributedGraph g;
  g.num_nodes_ = num_nodes;
  g.features_ = std::move(features);
  g.edges_ = std::move(edges);

  std::vector<std::size_t> degree(num_nodes, 0);
  for (const auto& e : g.edges_) {
    ++degree[e.u];
    ++degree[e.v];
  }
  g.offsets_.assign(num_nodes + 1, 0);
  for (std::size_t v = 0; v < num_nodes; ++v) g.offsets_[v + 1] = g.offsets_[v] + degree[v];
  g.neighbor_.resize(g.offsets_[num_nodes]);
  g.incident_.resize(g.offsets_[num_nodes]);
  std::vector<std::size_t> cursor(g.offsets_.begin(), g.offsets_.end() - 1);
  // Edges are visited in sorted order, so each node's lower-id neighbors
  // arrive ascending; a final per-row sort handles the higher-id half.
  for (EdgeId id = 0; id < g.edges_.size(); ++id) {
    const auto& e = g.edges_[id];
    g.neighbor_[cursor[e.u]] = e.v;
    g.incident_[cursor[e.u]++] = id;
    g.neighbor_[cursor[e.v]] = e.u;
    g.incident_[cursor[e.v]++] = id;
  }
  std::vector<std::pair<NodeId, EdgeId>> row;
  for (std::size_t v = 0; v < num_nodes; ++v) {
    row.clear();
    for (auto k = g.offsets_[v]; k < g.offsets_[v + 1]; ++k) {
      row.emplace_back(g.neighbor_[k], g.incident_[k]);
    }
    std::sort(row.begin(), row.end());
    for (std::size_t i = 0; i < row.size(); ++i) {
      g.neighbor_[g.offsets_[v] + i] = row[i].first;
      g.incident_[g.offsets_[v] + i] = row[i].second;
    }
  }
  return g;
}

AttributedGraph add_edges(const AttributedGraph& graph, std::span<const Edge> new_pairs,
                          std::uint8_t new_edge_label) {
  std::vector<Edge> all(graph.edges().begin(), graph.edges().end());
  all.insert(all.end(), new_pairs.begin(), new_pairs.end());
  AttributedGraph out = build_graph(graph.num_nodes(), all, graph.features());
  if (graph.node_labels()) out.set_node_labels(*graph.node_labels());

  Labels edge_labels(out.num_edges(), new_edge_label);
  const auto old_edges = graph.edges();
  const auto new_edges = out.edges();
  // Both lists are sorted; walk them together to carry old labels across.
  std::size_t j = 0;
  for (std::size_t i = 0; i < old_edges.size(); ++i) {
    while (new_edges[j] < old_edges[i]) ++j;
    edge_labels[j] = graph.edge_labels() ? (*graph.edge_labels())[i] : 0;
  }
  out.set_edge_labels(std::move(edge_labels));
  return out;
}

SparseMatrix incidence(const AttributedGraph& graph) {
  std::vector<Triplet> triplets;
  triplets.reserve(2 * graph.num_edges());
  const auto edges = graph.edges();
  for (EdgeId t = 0; t < edges.size(); ++t) {
    triplets.push_back({edges[t].u, t, 1.0f});
    triplets.push_back({edges[t].v, t, 1.0f});
  }
  return SparseMatrix::from_triplets(graph.num_nodes(), graph.num_edges(),
                                     std::move(triplets));
}

DualHypergraph dual_transform(const AttributedGraph& graph) {
  if (graph.num_edges() == 0) throw InvalidInput("dual_transform: graph has no edges");
  DualHypergraph dual;
  dual.incidence = incidence(graph).transpose();
  dual.features.resize(static_cast<Eigen::Index>(graph.num_edges()),
                       static_cast<Eigen::Index>(graph.feature_dim()));
  const auto& x = graph.features();
  const auto edges = graph.edges();
  for (EdgeId t = 0; t < edges.size(); ++t) {
    dual.features.row(t) = 0.5f * (x.row(edges[t].u) + x.row(edges[t].v));
  }
  return dual;
}

std::vector<NodeId> k_hop_neighbors(const AttributedGraph& graph, NodeId v, std::size_t k) {
  if (v >= graph.num_nodes()) throw InvalidInput(fmt::format("node {} out of range", v));
  if (k == 0) throw InvalidInput("k_hop_neighbors: k must be >= 1");
  // Level-synchronous BFS over sorted id sets; cost depends only on the size
  // of the explored ball, not on N.
  std::vector<NodeId> seen{v};
  std::vector<NodeId> frontier{v};
  std::vector<NodeId> next;
  std::vector<NodeId> fresh;
  std::vector<NodeId> merged;
  for (std::size_t depth = 0; depth < k && !frontier.empty(); ++depth) {
    next.clear();
    for (auto u : frontier) {
      const auto nbrs = graph.neighbors(u);
      next.insert(next.end(), nbrs.begin(), nbrs.end());
    }
    std::sort(next.begin(), next.end());
    next.erase(std::unique(next.begin(), next.end()), next.end());
    fresh.clear();
    std::set_difference(next.begin(), next.end(), seen.begin(), seen.end(),
                        std::back_inserter(fresh));
    merged.clear();
    std::merge(seen.begin(), seen.end(), fresh.begin(), fresh.end(),
               std::back_inserter(merged));
    seen.swap(merged);
    frontier.swap(fresh);
  }
  seen.erase(std::lower_bound(seen.begin(), seen.end(), v));
  return seen;
}

}  // namespace bourne
