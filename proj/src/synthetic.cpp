#include "bourne/synthetic.hpp"

#include <cmath>
#include <random>
#include <vector>

#include "bourne/errors.hpp"
#include "bourne/random.hpp"

namespace bourne {

AttributedGraph erdos_renyi_graph(const SyntheticConfig& cfg) {
  if (cfg.num_nodes < 2) throw InvalidInput("synthetic graph needs at least 2 nodes");
  if (!(cfg.edge_prob >= 0.0 && cfg.edge_prob <= 1.0)) {
    throw InvalidInput("edge probability must lie in [0, 1]");
  }
  if (cfg.feature_dim == 0) throw InvalidInput("feature dimension must be positive");
  auto rng = make_rng({cfg.seed, stream(Stream::kSynthetic)});

  std::vector<Edge> edges;
  const auto n = static_cast<long long>(cfg.num_nodes);
  if (cfg.edge_prob >= 1.0) {
    for (NodeId u = 0; u < cfg.num_nodes; ++u) {
      for (NodeId v = u + 1; v < cfg.num_nodes; ++v) edges.push_back({u, v});
    }
  } else if (cfg.edge_prob > 0.0) {
    // Batagelj & Brandes skipping over the lower triangle.
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double log_q = std::log(1.0 - cfg.edge_prob);
    long long v = 1;
    long long w = -1;
    while (v < n) {
      const double r = unit(rng);
      w += 1 + static_cast<long long>(std::floor(std::log(1.0 - r) / log_q));
      while (w >= v && v < n) {
        w -= v;
        ++v;
      }
      if (v < n) edges.push_back({static_cast<NodeId>(w), static_cast<NodeId>(v)});
    }
  }

  std::normal_distribution<float> gauss(0.0f, 1.0f);
  Matrix x(cfg.num_nodes, cfg.feature_dim);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = gauss(rng);

  AttributedGraph g = build_graph(cfg.num_nodes, edges, x);
  if (cfg.smoothing_rounds > 0) {
    const auto w = static_cast<float>(cfg.smoothing_weight);
    for (std::size_t round = 0; round < cfg.smoothing_rounds; ++round) {
      Matrix next = x;
      for (NodeId v = 0; v < cfg.num_nodes; ++v) {
        const auto nbrs = g.neighbors(v);
        if (nbrs.empty()) continue;
        RowVector mean = RowVector::Zero(x.cols());
        for (auto u : nbrs) mean += x.row(u);
        mean /= static_cast<float>(nbrs.size());
        next.row(v) = (1.0f - w) * x.row(v) + w * mean;
      }
      x.swap(next);
    }
    for (Eigen::Index c = 0; c < x.cols(); ++c) {
      const double mu = x.col(c).cast<double>().mean();
      const double var = (x.col(c).cast<double>().array() - mu).square().mean();
      const double sd = var > 0.0 ? std::sqrt(var) : 1.0;
      x.col(c) = ((x.col(c).cast<double>().array() - mu) / sd).cast<float>().matrix();
    }
    g = build_graph(cfg.num_nodes, g.edges(), std::move(x));
  }
  return g;
}

}  // namespace bourne
