#include "bourne/view.hpp"

#include <algorithm>

#include <fmt/format.h>

#include "bourne/errors.hpp"

namespace bourne {

void AugmentConfig::validate() const {
  if (!(feature_mask_prob >= 0.0 && feature_mask_prob < 1.0) ||
      !(hyperedge_drop_prob >= 0.0 && hyperedge_drop_prob < 1.0)) {
    throw InvalidInput("augmentation probabilities must lie in [0, 1)");
  }
}

void ViewConfig::validate() const {
  if (hops < 1) throw InvalidInput("hop count k must be >= 1");
  if (subgraph_size < 1) throw InvalidInput("subgraph size K must be >= 1");
  augment.validate();
}

TargetBatch sample_target_batch(const AttributedGraph& graph, std::size_t batch_size,
                                Rng& rng) {
  std::vector<NodeId> pool;
  for (NodeId v = 0; v < graph.num_nodes(); ++v) {
    if (graph.degree(v) > 0) pool.push_back(v);
  }
  if (pool.empty()) throw InvalidInput("every node is isolated; nothing to sample");
  TargetBatch batch;
  batch.isolated_excluded = graph.num_nodes() - pool.size();
  const auto take = std::min(batch_size, pool.size());
  for (auto i : sample_without_replacement(rng, pool.size(), take)) {
    const auto v = pool[i];
    const auto inc = graph.incident_edges(v);
    batch.targets.push_back({v, {inc.begin(), inc.end()}});
  }
  return batch;
}

std::vector<std::vector<NodeId>> epoch_batches(const AttributedGraph& graph,
                                               std::size_t batch_size, Rng& rng) {
  if (batch_size == 0) throw InvalidInput("batch size must be positive");
  std::vector<NodeId> order;
  for (NodeId v = 0; v < graph.num_nodes(); ++v) {
    if (graph.degree(v) > 0) order.push_back(v);
  }
  shuffle(rng, order);
  std::vector<std::vector<NodeId>> batches;
  for (std::size_t start = 0; start < order.size(); start += batch_size) {
    const auto end = std::min(order.size(), start + batch_size);
    batches.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(start),
                         order.begin() + static_cast<std::ptrdiff_t>(end));
  }
  return batches;
}

std::size_t Subgraph::num_target_edges() const {
  std::size_t count = 0;
  while (count < edges.size() && edges[count].first == 0) ++count;
  return count;
}

SparseMatrix Subgraph::adjacency() const {
  std::vector<Triplet> triplets;
  for (const auto& [a, b] : edges) {
    triplets.push_back({a, b, 1.0f});
    triplets.push_back({b, a, 1.0f});
  }
  return SparseMatrix::from_triplets(slots.size(), slots.size(), std::move(triplets));
}

SparseMatrix Subgraph::incidence() const {
  std::vector<Triplet> triplets;
  for (std::uint32_t t = 0; t < edges.size(); ++t) {
    triplets.push_back({edges[t].first, t, 1.0f});
    triplets.push_back({edges[t].second, t, 1.0f});
  }
  return SparseMatrix::from_triplets(slots.size(), edges.size(), std::move(triplets));
}

Subgraph induced_subgraph(const AttributedGraph& graph, NodeId target,
                          std::span<const NodeId> draws) {
  Subgraph sub;
  sub.target = target;
  sub.slots.reserve(draws.size() + 1);
  sub.slots.push_back(target);
  sub.slots.insert(sub.slots.end(), draws.begin(), draws.end());
  const auto n = static_cast<std::uint32_t>(sub.slots.size());
  for (std::uint32_t a = 0; a < n; ++a) {
    for (std::uint32_t b = a + 1; b < n; ++b) {
      const auto u = sub.slots[a];
      const auto w = sub.slots[b];
      if (u == w) continue;
      if (a == 0) {
        // Only the first slot holding w joins the target slot.
        const auto first = std::find(sub.slots.begin() + 1, sub.slots.end(), w);
        if (static_cast<std::uint32_t>(first - sub.slots.begin()) != b) continue;
      }
      if (const auto id = graph.find_edge(u, w)) {
        sub.edges.emplace_back(a, b);
        sub.edge_ids.push_back(*id);
      }
    }
  }
  return sub;
}

Subgraph extract_subgraph(const AttributedGraph& graph, NodeId target, const ViewConfig& cfg,
                          Rng& rng) {
  const auto ball = k_hop_neighbors(graph, target, cfg.hops);
  if (ball.empty()) {
    throw InvalidInput(fmt::format("node {} is isolated; no subgraph can be extracted", target));
  }
  std::vector<NodeId> draws(cfg.subgraph_size);
  Subgraph sub;
  for (std::size_t attempt = 0; attempt <= cfg.max_redraws; ++attempt) {
    for (auto& d : draws) d = ball[uniform_index(rng, ball.size())];
    sub = induced_subgraph(graph, target, draws);
    if (sub.num_target_edges() > 0) return sub;
  }
  const auto nbrs = graph.neighbors(target);
  draws[0] = nbrs[uniform_index(rng, nbrs.size())];
  sub = induced_subgraph(graph, target, draws);
  sub.forced_neighbor = true;
  return sub;
}

AttributedGraph subgraph_as_graph(const AttributedGraph& graph, const Subgraph& sub) {
  Matrix x(sub.slots.size(), graph.feature_dim());
  for (std::size_t i = 0; i < sub.slots.size(); ++i) x.row(i) = graph.features().row(sub.slots[i]);
  std::vector<Edge> pairs;
  for (const auto& [a, b] : sub.edges) pairs.push_back({a, b});
  return build_graph(sub.slots.size(), pairs, std::move(x));
}

HypergraphPerturbation perturb_hypergraph(const SparseMatrix& incidence,
                                          std::size_t protected_rows, const AugmentConfig& cfg,
                                          Rng& rng) {
  cfg.validate();
  HypergraphPerturbation out;
  out.masked_rows.assign(incidence.rows(), 0);
  for (std::size_t r = protected_rows; r < incidence.rows(); ++r) {
    out.masked_rows[r] = bernoulli(rng, cfg.feature_mask_prob) ? 1 : 0;
  }
  std::vector<Triplet> kept;
  kept.reserve(incidence.nnz());
  for (std::size_t r = 0; r < incidence.rows(); ++r) {
    const auto idx = incidence.row_indices(r);
    const auto val = incidence.row_values(r);
    std::size_t remaining = idx.size();
    for (std::size_t k = 0; k < idx.size(); ++k) {
      if (r >= protected_rows) {
        const bool drop = bernoulli(rng, cfg.hyperedge_drop_prob);
        if (drop && remaining > 1) {
          --remaining;
          continue;
        }
      }
      kept.push_back({static_cast<std::uint32_t>(r), idx[k], val[k]});
    }
  }
  out.incidence = SparseMatrix::from_triplets(incidence.rows(), incidence.cols(), std::move(kept));
  return out;
}

DualHypergraph augment_hypergraph(const DualHypergraph& dual, const AugmentConfig& cfg, Rng& rng,
                                  std::size_t protected_rows) {
  auto p = perturb_hypergraph(dual.incidence, protected_rows, cfg, rng);
  DualHypergraph out{std::move(p.incidence), dual.features};
  for (std::size_t r = 0; r < p.masked_rows.size(); ++r) {
    if (p.masked_rows[r]) out.features.row(r).setZero();
  }
  return out;
}

Matrix anonymize_rows(const Matrix& rows, std::size_t count) {
  const auto n = static_cast<std::size_t>(rows.rows());
  if (count > n) throw InvalidInput("anonymize_rows: more targets than rows");
  Matrix out(n + count, rows.cols());
  out.topRows(count).setZero();
  out.middleRows(count, n - count) = rows.bottomRows(n - count);
  out.bottomRows(count) = rows.topRows(count);
  return out;
}

SparseMatrix anonymize_rows(const SparseMatrix& rows, std::size_t count) {
  const auto n = rows.rows();
  if (count > n) throw InvalidInput("anonymize_rows: more targets than rows");
  std::vector<Triplet> triplets;
  triplets.reserve(rows.nnz() + rows.nnz());
  for (std::size_t r = 0; r < n; ++r) {
    const auto idx = rows.row_indices(r);
    const auto val = rows.row_values(r);
    const auto dst = static_cast<std::uint32_t>(r < count ? n + r : r);
    for (std::size_t k = 0; k < idx.size(); ++k) triplets.push_back({dst, idx[k], val[k]});
  }
  return SparseMatrix::from_triplets(n + count, rows.cols(), std::move(triplets));
}

SparseMatrix append_isolated_node(const SparseMatrix& adjacency) {
  const auto n = adjacency.rows();
  const SparseMatrix one = SparseMatrix::identity(1);
  const SparseMatrix* blocks[] = {&adjacency, &one};
  auto out = SparseMatrix::block_diagonal(blocks);
  if (out.rows() != n + 1) throw InvalidInput("append_isolated_node: adjacency not square");
  return out;
}

SparseMatrix append_isolated_dual_nodes(const SparseMatrix& incidence, std::size_t count) {
  const SparseMatrix eye = SparseMatrix::identity(count);
  const SparseMatrix* blocks[] = {&incidence, &eye};
  return SparseMatrix::block_diagonal(blocks);
}

AnonymizedView anonymize_node_view(const Matrix& features, const SparseMatrix& adjacency) {
  if (static_cast<std::size_t>(features.rows()) != adjacency.rows() || features.rows() == 0) {
    throw InvalidInput("anonymize_node_view: feature/adjacency size mismatch");
  }
  return {anonymize_rows(features, 1), append_isolated_node(adjacency)};
}

AnonymizedView anonymize_edge_view(const Matrix& features, const SparseMatrix& incidence,
                                   std::size_t num_target_edges) {
  if (num_target_edges == 0) throw InvalidInput("anonymize_edge_view: no target edges");
  if (static_cast<std::size_t>(features.rows()) != incidence.rows()) {
    throw InvalidInput("anonymize_edge_view: feature/incidence size mismatch");
  }
  return {anonymize_rows(features, num_target_edges),
          append_isolated_dual_nodes(incidence, num_target_edges)};
}

ViewPair build_view(const AttributedGraph& graph, NodeId target, const ViewConfig& cfg,
                    Rng& rng) {
  const Subgraph sub = extract_subgraph(graph, target, cfg, rng);
  const auto m_tar = sub.num_target_edges();
  const auto n = static_cast<std::uint32_t>(graph.num_nodes());

  ViewPair view;
  view.target = target;
  view.slot_nodes = sub.slots;
  view.dual_edge_ids = sub.edge_ids;
  view.target_edges.assign(sub.edge_ids.begin(),
                           sub.edge_ids.begin() + static_cast<std::ptrdiff_t>(m_tar));

  const auto perturbed = perturb_hypergraph(sub.incidence().transpose(), m_tar, cfg.augment, rng);
  std::vector<Triplet> edge_rows;
  for (std::uint32_t t = 0; t < sub.edges.size(); ++t) {
    if (perturbed.masked_rows[t]) continue;
    const auto u = sub.slots[sub.edges[t].first];
    const auto w = sub.slots[sub.edges[t].second];
    edge_rows.push_back({t, u, 0.5f});
    edge_rows.push_back({t, w, 0.5f});
  }
  view.edge_feature_map =
      anonymize_rows(SparseMatrix::from_triplets(sub.edges.size(), n, std::move(edge_rows)), m_tar);
  view.incidence = append_isolated_dual_nodes(perturbed.incidence, m_tar);

  std::vector<Triplet> node_rows;
  for (std::uint32_t i = 0; i < sub.slots.size(); ++i) node_rows.push_back({i, sub.slots[i], 1.0f});
  view.node_feature_map =
      anonymize_rows(SparseMatrix::from_triplets(sub.slots.size(), n, std::move(node_rows)), 1);
  view.adjacency = append_isolated_node(sub.adjacency());
  return view;
}

void validate_view(const ViewPair& view, const AttributedGraph& graph) {
  const auto fail = [](const std::string& what) { throw InvalidInput("invalid view: " + what); };
  const auto ns = view.num_slots();
  const auto ms = view.num_dual_nodes();
  const auto mt = view.num_target_edges();
  if (mt == 0) fail("no target edges");
  if (ns == 0 || view.slot_nodes[0] != view.target) fail("slot 0 must hold the target");
  if (view.adjacency.rows() != ns + 1 || view.adjacency.cols() != ns + 1) fail("adjacency shape");
  if (view.node_feature_map.rows() != ns + 1) fail("node feature map rows");
  if (view.node_feature_map.row_nnz(0) != 0) fail("target slot leaks features");
  if (view.node_feature_map.row_nnz(ns) != 1 ||
      view.node_feature_map.row_indices(ns)[0] != view.target) {
    fail("isolated target row must copy the target feature");
  }
  if (view.adjacency.row_nnz(ns) != 1 || view.adjacency.coeff(ns, ns) != 1.0f) {
    fail("isolated target entry must be a lone diagonal 1");
  }
  for (std::size_t r = 0; r < ns; ++r) {
    if (view.adjacency.coeff(r, r) != 0.0f) fail("subgraph diagonal must be zero");
    if (view.adjacency.coeff(r, ns) != 0.0f) fail("isolated target entry has neighbors");
  }
  if (!(view.adjacency == view.adjacency.transpose())) fail("adjacency not symmetric");

  if (view.incidence.rows() != ms + mt || view.incidence.cols() != ns + mt) fail("incidence shape");
  if (view.edge_feature_map.rows() != ms + mt) fail("edge feature map rows");
  for (std::size_t r = 0; r < mt; ++r) {
    if (view.edge_feature_map.row_nnz(r) != 0) fail("target edge leaks features");
    const auto appended = view.edge_feature_map.row_indices(ms + r);
    const auto& e = graph.edge(view.target_edges[r]);
    if (e.u != view.target && e.v != view.target) fail("target edge not incident to target");
    if (appended.size() != 2 || appended[0] != e.u || appended[1] != e.v) {
      fail("appended target edge row does not match its edge");
    }
    const auto idx = view.incidence.row_indices(ms + r);
    if (idx.size() != 1 || idx[0] != ns + r) fail("target edge block must be identity");
  }
  for (std::size_t r = 0; r < ms; ++r) {
    const auto idx = view.incidence.row_indices(r);
    if (idx.empty()) fail("orphaned dual node");
    if (idx.back() >= ns) fail("context dual node joins an appended hyperedge");
  }
  auto sorted = view.target_edges;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    fail("duplicate target edge");
  }
  if (mt > graph.degree(view.target)) fail("more target edges than the target's degree");
}

}  // namespace bourne
