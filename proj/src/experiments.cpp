#include "bourne/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cstring>
#include <fstream>

#include <fmt/format.h>

#include "bourne/errors.hpp"
#include "bourne/random.hpp"

namespace bourne {

namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

struct Fnv {
  std::uint64_t h = 1469598103934665603ull;
  void add(const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= p[i];
      h *= 1099511628211ull;
    }
  }
  void add(const std::string& s) { add(s.data(), s.size()); }
};

}  // namespace

Evaluation evaluate_scores(const AttributedGraph& graph, const ScoreTable& scores,
                           std::optional<std::size_t> user_k, const nlohmann::json& config) {
  if (!graph.node_labels() || !graph.edge_labels()) {
    throw InvalidInput("evaluation needs node and edge labels");
  }
  if (scores.num_nodes() != graph.num_nodes() || scores.num_edges() != graph.num_edges()) {
    throw InvalidInput("score table does not match the graph");
  }
  std::vector<std::optional<double>> node(graph.num_nodes());
  for (NodeId v = 0; v < graph.num_nodes(); ++v) {
    if (scores.node_count(v) > 0) node[v] = scores.node_score(v);
  }
  std::vector<std::optional<double>> edge(graph.num_edges());
  for (EdgeId e = 0; e < graph.num_edges(); ++e) edge[e] = scores.edge_score(e);
  return {evaluate("node", node, *graph.node_labels(), user_k, config),
          evaluate("edge", edge, *graph.edge_labels(), user_k, config)};
}

InferenceConfig inference_config(const TrainConfig& cfg) {
  InferenceConfig ic;
  ic.rounds = cfg.eval_rounds;
  ic.seed = cfg.seed;
  ic.batch_size = std::max<std::size_t>(cfg.batch_size, 256);
  ic.threads = cfg.threads;
  ic.view = cfg.view;
  ic.weights = cfg.weights;
  return ic;
}

PipelineResult run_pipeline(const AttributedGraph& labeled, const TrainConfig& cfg) {
  PipelineResult out;
  auto start = std::chrono::steady_clock::now();
  auto trained = train(labeled, cfg);
  if (trained.halted) throw NumericalError("training halted: " + trained.halt_reason);
  out.train_seconds = seconds_since(start);
  out.log = std::move(trained.log);
  out.best_epoch = trained.best_epoch;
  start = std::chrono::steady_clock::now();
  const auto table = infer_scores(labeled, trained.model, inference_config(cfg));
  out.score_seconds = seconds_since(start);
  out.evaluation = evaluate_scores(labeled, table, std::nullopt, nlohmann::json(cfg));
  return out;
}

std::vector<CorrelationRow> run_correlation_sweep(const AttributedGraph& base,
                                                  const CorrelationSweepConfig& cfg) {
  if (cfg.levels.empty()) throw InvalidInput("correlation sweep needs at least one level");
  std::vector<CorrelationRow> rows;
  for (const double level : cfg.levels) {
    CorrelationLevelConfig lc{cfg.injection, cfg.base, level};
    const auto injected = inject_correlated(base, lc);
    const auto result = run_pipeline(injected.graph, cfg.train);
    rows.push_back({level, anomaly_correlation(injected.graph).value,
                    result.evaluation.node.auc, result.evaluation.edge.auc});
  }
  return rows;
}

std::string correlation_csv(const std::vector<CorrelationRow>& rows) {
  std::string out = "requested_c_ano,achieved_c_ano,node_auc,edge_auc\n";
  for (const auto& r : rows) {
    out += fmt::format("{:.4f},{:.6f},{:.6f},{:.6f}\n", r.requested, r.achieved, r.node_auc,
                       r.edge_auc);
  }
  return out;
}

SweepGrid SweepGrid::single(const TrainConfig& base) {
  return {{base.weights.alpha}, {base.weights.beta}, {base.embedding_dim}, {base.eval_rounds},
          {base.tau}};
}

std::size_t SweepGrid::size() const {
  const auto axis = [](std::size_t n) { return std::max<std::size_t>(n, 1); };
  return axis(alpha.size()) * axis(beta.size()) * axis(embedding_dim.size()) *
         axis(rounds.size()) * axis(tau.size());
}

std::uint64_t graph_fingerprint(const AttributedGraph& graph) {
  Fnv f;
  const std::uint64_t dims[] = {graph.num_nodes(), graph.num_edges(), graph.feature_dim()};
  f.add(dims, sizeof(dims));
  for (const auto& e : graph.edges()) f.add(&e, sizeof(e));
  const auto& x = graph.features();
  f.add(x.data(), static_cast<std::size_t>(x.size()) * sizeof(float));
  if (graph.node_labels()) f.add(graph.node_labels()->data(), graph.node_labels()->size());
  if (graph.edge_labels()) f.add(graph.edge_labels()->data(), graph.edge_labels()->size());
  return f.h;
}

SweepResult run_hyperparameter_sweep(const AttributedGraph& labeled, const TrainConfig& base,
                                     SweepGrid grid, const std::filesystem::path& cache_dir) {
  const auto fallback = SweepGrid::single(base);
  if (grid.alpha.empty()) grid.alpha = fallback.alpha;
  if (grid.beta.empty()) grid.beta = fallback.beta;
  if (grid.embedding_dim.empty()) grid.embedding_dim = fallback.embedding_dim;
  if (grid.rounds.empty()) grid.rounds = fallback.rounds;
  if (grid.tau.empty()) grid.tau = fallback.tau;
  if (!cache_dir.empty()) std::filesystem::create_directories(cache_dir);
  const auto data_hash = graph_fingerprint(labeled);

  SweepResult result;
  for (const float alpha : grid.alpha) {
    for (const float beta : grid.beta) {
      for (const auto dim : grid.embedding_dim) {
        for (const auto rounds : grid.rounds) {
          for (const float tau : grid.tau) {
            SweepRow row;
            row.config = base;
            row.config.weights = {alpha, beta};
            row.config.embedding_dim = dim;
            row.config.eval_rounds = rounds;
            row.config.tau = tau;
            Fnv cell;
            cell.add(fmt::format("{}|{}|{}|{}|{}", alpha, beta, dim, rounds, tau));
            row.config.seed = mix_seed({base.seed, stream(Stream::kSweep), cell.h});
            row.config.validate();

            Fnv key;
            key.add(&data_hash, sizeof(data_hash));
            key.add(nlohmann::json(row.config).dump());
            row.key = fmt::format("{:016x}", key.h);
            const auto cache_file = cache_dir.empty() ? std::filesystem::path{}
                                                      : cache_dir / (row.key + ".json");
            if (!cache_file.empty() && std::filesystem::exists(cache_file)) {
              std::ifstream in(cache_file);
              try {
                const auto j = nlohmann::json::parse(in);
                row.node_auc = j.at("node_auc").get<double>();
                row.edge_auc = j.at("edge_auc").get<double>();
                row.cached = true;
              } catch (const nlohmann::json::exception&) {
                row.cached = false;  // unreadable entry: recompute
              }
            }
            if (!row.cached) {
              const auto run = run_pipeline(labeled, row.config);
              row.node_auc = run.evaluation.node.auc;
              row.edge_auc = run.evaluation.edge.auc;
              ++result.trained_cells;
              if (!cache_file.empty()) {
                std::ofstream out(cache_file);
                out << nlohmann::json{{"node_auc", row.node_auc},
                                      {"edge_auc", row.edge_auc},
                                      {"config", row.config}}
                           .dump(2);
              }
            }
            result.rows.push_back(std::move(row));
          }
        }
      }
    }
  }
  return result;
}

std::string sweep_csv(const SweepResult& result) {
  std::string out = "alpha,beta,embedding_dim,rounds,tau,seed,node_auc,edge_auc,cached\n";
  for (const auto& r : result.rows) {
    out += fmt::format("{},{},{},{},{},{},{:.6f},{:.6f},{}\n", r.config.weights.alpha,
                       r.config.weights.beta, r.config.embedding_dim, r.config.eval_rounds,
                       r.config.tau, r.config.seed, r.node_auc, r.edge_auc, r.cached ? 1 : 0);
  }
  return out;
}

}  // namespace bourne
