#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "bourne/graph.hpp"
#include "bourne/injection.hpp"
#include "bourne/metrics.hpp"
#include "bourne/trainer.hpp"

namespace bourne {

struct Evaluation {
  EvalReport node;
  EvalReport edge;
};

// Both reports from a score table; the graph must carry node and edge labels.
Evaluation evaluate_scores(const AttributedGraph& graph, const ScoreTable& scores,
                           std::optional<std::size_t> user_k = std::nullopt,
                           const nlohmann::json& config = nlohmann::json::object());

InferenceConfig inference_config(const TrainConfig& cfg);

struct PipelineResult {
  Evaluation evaluation;
  std::vector<EpochLog> log;
  std::size_t best_epoch = 0;
  double train_seconds = 0.0;
  double score_seconds = 0.0;
};

// Train on the labeled graph (labels unused), score with cfg.eval_rounds
// rounds, evaluate.
PipelineResult run_pipeline(const AttributedGraph& labeled, const TrainConfig& cfg);

struct CorrelationSweepConfig {
  std::vector<double> levels;
  SweepBase base = SweepBase::kAttributive;
  InjectionConfig injection;
  TrainConfig train;
};

struct CorrelationRow {
  double requested = 0.0;
  double achieved = 0.0;
  double node_auc = 0.0;
  double edge_auc = 0.0;
};

std::vector<CorrelationRow> run_correlation_sweep(const AttributedGraph& base,
                                                  const CorrelationSweepConfig& cfg);
std::string correlation_csv(const std::vector<CorrelationRow>& rows);

struct SweepGrid {
  std::vector<float> alpha;
  std::vector<float> beta;
  std::vector<std::size_t> embedding_dim;
  std::vector<std::size_t> rounds;
  std::vector<float> tau;

  // Empty axes take the single value from `base`.
  static SweepGrid single(const TrainConfig& base);
  std::size_t size() const;
};

struct SweepRow {
  TrainConfig config;
  std::string key;  // cache key
  double node_auc = 0.0;
  double edge_auc = 0.0;
  bool cached = false;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  std::size_t trained_cells = 0;
};

// Every grid cell on the same labeled graph. Each cell's seed is derived from
// the base seed and the cell's own parameters. With a cache directory, cells
// whose key already has a result file are not retrained.
SweepResult run_hyperparameter_sweep(const AttributedGraph& labeled, const TrainConfig& base,
                                     SweepGrid grid, const std::filesystem::path& cache_dir = {});
std::string sweep_csv(const SweepResult& result);

// FNV-1a over the graph's structure, features and labels.
std::uint64_t graph_fingerprint(const AttributedGraph& graph);

}  // namespace bourne
