#include "bourne/injection.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <fmt/format.h>

#include "bourne/errors.hpp"

namespace bourne {

namespace {

std::vector<NodeId> normal_nodes(const AttributedGraph& graph) {
  std::vector<NodeId> pool;
  const auto& labels = graph.node_labels();
  for (NodeId v = 0; v < graph.num_nodes(); ++v) {
    if (!labels || (*labels)[v] == 0) pool.push_back(v);
  }
  return pool;
}

Labels node_labels_or_zero(const AttributedGraph& graph) {
  return graph.node_labels() ? *graph.node_labels() : Labels(graph.num_nodes(), 0);
}

double squared_distance(const Matrix& x, NodeId a, NodeId b) {
  return (x.row(a).cast<double>() - x.row(b).cast<double>()).squaredNorm();
}

std::vector<EdgeId> edge_ids_of(const AttributedGraph& graph, const std::vector<Edge>& pairs) {
  std::vector<EdgeId> ids;
  ids.reserve(pairs.size());
  for (const auto& p : pairs) {
    if (const auto id = graph.find_edge(p.u, p.v)) ids.push_back(*id);
  }
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  return ids;
}

struct PassOutput {
  AttributedGraph graph;
  std::vector<NodeId> nodes;
  std::vector<Edge> edges;
};

PassOutput structural_pass(const AttributedGraph& graph, const InjectionConfig& cfg, Rng& rng) {
  const auto pool = normal_nodes(graph);
  const auto need = cfg.clique_size * cfg.clique_count;
  if (pool.size() < need) {
    throw InvalidInput(fmt::format("structural injection needs {} normal nodes, graph has {}",
                                   need, pool.size()));
  }
  const auto picks = sample_without_replacement(rng, pool.size(), need);
  PassOutput out;
  auto labels = node_labels_or_zero(graph);
  for (std::size_t c = 0; c < cfg.clique_count; ++c) {
    std::vector<NodeId> clique;
    for (std::size_t i = 0; i < cfg.clique_size; ++i) {
      clique.push_back(pool[picks[c * cfg.clique_size + i]]);
    }
    std::sort(clique.begin(), clique.end());
    for (std::size_t a = 0; a < clique.size(); ++a) {
      labels[clique[a]] = 1;
      out.nodes.push_back(clique[a]);
      for (std::size_t b = a + 1; b < clique.size(); ++b) {
        if (!graph.has_edge(clique[a], clique[b])) out.edges.push_back({clique[a], clique[b]});
      }
    }
  }
  AttributedGraph labeled = graph;
  labeled.set_node_labels(std::move(labels));
  out.graph = add_edges(labeled, out.edges, 1);
  std::sort(out.nodes.begin(), out.nodes.end());
  return out;
}

PassOutput attributive_pass(const AttributedGraph& graph, const InjectionConfig& cfg, Rng& rng) {
  const auto n = graph.num_nodes();
  const auto need = cfg.clique_size * cfg.clique_count;
  const auto k = cfg.candidate_pool;
  if (n < need + 2 * k) {
    throw InvalidInput(fmt::format(
        "attributive injection needs N >= n_p*q + 2k = {}, graph has {} nodes", need + 2 * k, n));
  }
  const auto pool = normal_nodes(graph);
  if (pool.size() < need) {
    throw InvalidInput(fmt::format("attributive injection needs {} normal nodes, graph has {}",
                                   need, pool.size()));
  }
  const auto picks = sample_without_replacement(rng, pool.size(), need);
  Matrix x = graph.features();
  auto labels = node_labels_or_zero(graph);
  PassOutput out;
  std::set<Edge> added;
  for (auto pick : picks) {
    const NodeId v = pool[pick];
    // Draw from the N-1 other nodes directly, which is equivalent to
    // redrawing whenever v itself comes up.
    const auto draws = sample_without_replacement(rng, n - 1, 2 * k);
    std::vector<NodeId> cand;
    cand.reserve(draws.size());
    for (auto d : draws) cand.push_back(static_cast<NodeId>(d < v ? d : d + 1));

    const std::span<const NodeId> all(cand);
    const auto choice = attributive_choice(x, v, all.first(k), all.subspan(k), cfg.attr_edge_count);
    for (const auto w : choice.edge_targets) {
      const Edge e{std::min(v, w), std::max(v, w)};
      if (!graph.has_edge(e.u, e.v) && added.insert(e).second) out.edges.push_back(e);
    }
    x.row(v) = x.row(choice.feature_source).eval();
    labels[v] = 1;
    out.nodes.push_back(v);
  }
  AttributedGraph modified = build_graph(n, graph.edges(), std::move(x));
  modified.set_node_labels(std::move(labels));
  modified.set_edge_labels(graph.edge_labels() ? *graph.edge_labels()
                                               : Labels(graph.num_edges(), 0));
  out.graph = add_edges(modified, out.edges, 1);
  std::sort(out.nodes.begin(), out.nodes.end());
  return out;
}

}  // namespace

AttributiveChoice attributive_choice(const Matrix& x, NodeId v,
                                     std::span<const NodeId> feature_candidates,
                                     std::span<const NodeId> edge_candidates, std::size_t s) {
  if (feature_candidates.empty()) throw InvalidInput("attributive_choice: no feature candidates");
  std::vector<std::pair<double, NodeId>> edge_side;
  for (const auto w : edge_candidates) edge_side.emplace_back(squared_distance(x, v, w), w);
  std::stable_sort(edge_side.begin(), edge_side.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  AttributiveChoice choice;
  for (std::size_t i = 0; i < s && i < edge_side.size(); ++i) {
    choice.edge_targets.push_back(edge_side[i].second);
  }
  double best = -1.0;
  for (const auto w : feature_candidates) {
    const auto d = squared_distance(x, v, w);
    if (d > best) {
      best = d;
      choice.feature_source = w;
    }
  }
  return choice;
}

void InjectionConfig::validate() const {
  if (clique_size < 2) throw InvalidInput("clique size n_p must be >= 2");
  if (candidate_pool < 1) throw InvalidInput("candidate pool k must be >= 1");
  if (attr_edge_count > candidate_pool) throw InvalidInput("s must not exceed k");
}

InjectionResult inject_structural(const AttributedGraph& graph, const InjectionConfig& cfg,
                                  Rng& rng) {
  cfg.validate();
  auto pass = structural_pass(graph, cfg, rng);
  InjectionResult result{std::move(pass.graph), {}};
  result.report.injected_node_ids = pass.nodes;
  result.report.injected_edge_ids = edge_ids_of(result.graph, pass.edges);
  result.report.structural_nodes = pass.nodes.size();
  result.report.structural_edges = pass.edges.size();
  return result;
}

InjectionResult inject_attributive(const AttributedGraph& graph, const InjectionConfig& cfg,
                                   Rng& rng) {
  cfg.validate();
  auto pass = attributive_pass(graph, cfg, rng);
  InjectionResult result{std::move(pass.graph), {}};
  result.report.injected_node_ids = pass.nodes;
  result.report.injected_edge_ids = edge_ids_of(result.graph, pass.edges);
  result.report.attributive_nodes = pass.nodes.size();
  result.report.attributive_edges = pass.edges.size();
  return result;
}

InjectionResult inject_anomalies(const AttributedGraph& graph, const InjectionConfig& cfg) {
  cfg.validate();
  auto rng = make_rng({cfg.rng_seed, stream(Stream::kInjection)});
  auto structural = structural_pass(graph, cfg, rng);
  auto attributive = attributive_pass(structural.graph, cfg, rng);

  InjectionResult result{std::move(attributive.graph), {}};
  auto& report = result.report;
  report.injected_node_ids = structural.nodes;
  report.injected_node_ids.insert(report.injected_node_ids.end(), attributive.nodes.begin(),
                                  attributive.nodes.end());
  std::sort(report.injected_node_ids.begin(), report.injected_node_ids.end());
  auto pairs = structural.edges;
  pairs.insert(pairs.end(), attributive.edges.begin(), attributive.edges.end());
  report.injected_edge_ids = edge_ids_of(result.graph, pairs);
  report.structural_nodes = structural.nodes.size();
  report.structural_edges = structural.edges.size();
  report.attributive_nodes = attributive.nodes.size();
  report.attributive_edges = attributive.edges.size();
  return result;
}

AnomalyCorrelation anomaly_correlation(const AttributedGraph& graph) {
  if (!graph.node_labels() || !graph.edge_labels()) {
    throw InvalidInput("anomaly correlation needs node and edge labels");
  }
  const auto& yn = *graph.node_labels();
  const auto& ye = *graph.edge_labels();
  AnomalyCorrelation out;
  double sum = 0.0;
  std::size_t anomalous = 0;
  for (NodeId v = 0; v < graph.num_nodes(); ++v) {
    if (yn[v] == 0) continue;
    ++anomalous;
    const auto inc = graph.incident_edges(v);
    if (inc.empty()) {
      ++out.zero_degree_anomalies;
      continue;
    }
    std::size_t hits = 0;
    for (auto e : inc) hits += ye[e];
    sum += static_cast<double>(hits) / static_cast<double>(inc.size());
  }
  if (anomalous == 0) throw InvalidInput("anomaly correlation undefined: no anomalous nodes");
  out.value = sum / static_cast<double>(anomalous);
  return out;
}

InjectionResult inject_correlated(const AttributedGraph& graph,
                                  const CorrelationLevelConfig& cfg) {
  cfg.injection.validate();
  if (!(cfg.level >= 0.0 && cfg.level <= 1.0)) {
    throw InvalidInput("correlation level must lie in [0, 1]");
  }
  auto rng = make_rng({cfg.injection.rng_seed, stream(Stream::kSweep)});
  auto pass = cfg.base == SweepBase::kAttributive ? attributive_pass(graph, cfg.injection, rng)
                                                  : structural_pass(graph, cfg.injection, rng);
  AttributedGraph g = std::move(pass.graph);
  const auto& yn = *g.node_labels();
  const std::set<Edge> injected(pass.edges.begin(), pass.edges.end());

  Labels ye(g.num_edges(), 0);
  std::set<EdgeId> incident_to_anomalies;
  for (NodeId v = 0; v < g.num_nodes(); ++v) {
    if (yn[v] == 0) continue;
    const auto inc = g.incident_edges(v);
    incident_to_anomalies.insert(inc.begin(), inc.end());
    std::vector<EdgeId> first;
    std::vector<EdgeId> rest;
    for (auto e : inc) (injected.count(g.edge(e)) ? first : rest).push_back(e);
    shuffle(rng, first);
    shuffle(rng, rest);
    first.insert(first.end(), rest.begin(), rest.end());

    const auto wanted =
        static_cast<std::size_t>(std::lround(cfg.level * static_cast<double>(inc.size())));
    std::size_t have = 0;
    for (auto e : inc) have += ye[e];
    for (auto e : first) {
      if (have >= wanted) break;
      if (ye[e] == 0) {
        ye[e] = 1;
        ++have;
      }
    }
  }
  std::size_t labeled = 0;
  for (auto e : incident_to_anomalies) labeled += ye[e];
  g.set_edge_labels(ye);

  // Far-feature edges between normal nodes, drawn with the attributive edge
  // rule, keep the total edge-anomaly count level-independent.
  const auto filler = incident_to_anomalies.size() - labeled;
  const auto normals = normal_nodes(g);
  const auto k = cfg.injection.candidate_pool;
  std::vector<Edge> extra;
  std::set<Edge> extra_set;
  if (filler > 0 && normals.size() < k + 1) {
    throw InvalidInput("correlation sweep: not enough normal nodes for filler edges");
  }
  for (std::size_t i = 0, attempts = 0; i < filler && attempts < 100 * (filler + 1);
       ++attempts) {
    const auto u = normals[uniform_index(rng, normals.size())];
    const auto draws = sample_without_replacement(rng, normals.size(), k);
    NodeId best_node = u;
    double best = -1.0;
    for (auto d : draws) {
      const auto w = normals[d];
      if (w == u || g.has_edge(u, w) || extra_set.count({std::min(u, w), std::max(u, w)})) {
        continue;
      }
      const auto dist = squared_distance(g.features(), u, w);
      if (dist > best) {
        best = dist;
        best_node = w;
      }
    }
    if (best_node == u) continue;
    const Edge e{std::min(u, best_node), std::max(u, best_node)};
    extra_set.insert(e);
    extra.push_back(e);
    ++i;
  }

  InjectionResult result{add_edges(g, extra, 1), {}};
  auto& report = result.report;
  report.injected_node_ids = pass.nodes;
  const auto& final_ye = *result.graph.edge_labels();
  for (EdgeId e = 0; e < final_ye.size(); ++e) {
    if (final_ye[e]) report.injected_edge_ids.push_back(e);
  }
  if (cfg.base == SweepBase::kAttributive) {
    report.attributive_nodes = pass.nodes.size();
    report.attributive_edges = pass.edges.size();
  } else {
    report.structural_nodes = pass.nodes.size();
    report.structural_edges = pass.edges.size();
  }
  return result;
}

}  // namespace bourne
