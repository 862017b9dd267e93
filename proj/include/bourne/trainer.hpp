#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "bourne/checkpoint.hpp"
#include "bourne/graph.hpp"
#include "bourne/model.hpp"
#include "bourne/view.hpp"
#include "json.hpp"

namespace bourne {

struct ScoreWeights {
  float alpha = 0.8f;
  float beta = 0.6f;

  void validate() const;
  float max_score() const { return 2.0f * (alpha + beta); }
};

struct TrainConfig {
  std::size_t batch_size = 128;
  std::size_t epochs = 1000;
  float learning_rate = 1e-3f;
  float tau = 0.99f;
  std::size_t embedding_dim = 128;
  std::size_t predictor_hidden = 512;
  std::size_t layers = 1;
  std::size_t eval_rounds = 160;
  std::uint64_t seed = 0;
  std::size_t threads = 1;
  bool symmetric_roles = false;
  ViewConfig view;
  ScoreWeights weights;

  void validate() const;
  ModelConfig model_config(std::size_t input_dim) const;
};

void to_json(nlohmann::json& j, const TrainConfig& c);
// Missing keys keep their defaults; unknown keys are rejected.
void from_json(const nlohmann::json& j, TrainConfig& c);
TrainConfig load_train_config(const std::filesystem::path& path);

// z_p: mean of the contextual target-edge rows.
RowVector pool_edge_context(const Matrix& context_rows);

double node_score(const ConstRowRef& target, const ConstRowRef& edge_context,
                 const ConstRowRef& hyper_summary, const ScoreWeights& w);
std::vector<double> edge_scores(const Matrix& target_rows, const ConstRowRef& patch,
                               const ConstRowRef& graph_summary, const ScoreWeights& w);

struct BatchScores {
  double loss = 0.0;
  std::vector<double> node_scores;               // one per view
  std::vector<std::vector<double>> edge_scores;  // per view, aligned with target_edges
};

// Scores every view; with `backward`, accumulates gradients of
// L = (mean S_node + mean over views of mean S_edge) / 2 into the model.
// Default roles send gradients to the online side only. Symmetric roles send
// the node term to the online side and the edge term to the target side.
BatchScores score_batch(const std::vector<ViewPair>& views, const Matrix& x, BourneModel& model,
                        const ScoreWeights& w, bool backward, bool symmetric_roles = false);

// Forward-only scoring with frozen parameters.
BatchScores score_batch(const std::vector<ViewPair>& views, const Matrix& x,
                        const BourneModel& model, const ScoreWeights& w);

// Loss with gradients accumulated into the online parameters.
double batch_loss(const std::vector<ViewPair>& views, const Matrix& x, BourneModel& model,
                  const ScoreWeights& w);

// Views for the given targets, each drawn from its own seeded stream.
std::vector<ViewPair> build_views(const AttributedGraph& graph, const std::vector<NodeId>& targets,
                                  const ViewConfig& cfg, std::uint64_t seed, Stream stream,
                                  std::uint64_t round, std::size_t threads);

struct EpochLog {
  std::size_t epoch = 0;
  double loss = 0.0;
  double seconds = 0.0;
  std::size_t targets = 0;
};

struct TrainResult {
  BourneModel model;  // lowest-loss epoch
  std::optional<OptimizerSnapshot> optimizer;
  std::vector<EpochLog> log;
  std::size_t best_epoch = 0;
  double best_loss = std::numeric_limits<double>::infinity();
  bool halted = false;
  std::string halt_reason;
};

using EpochCallback = std::function<void(const EpochLog&)>;

TrainResult train(const AttributedGraph& graph, const TrainConfig& cfg,
                  const EpochCallback& on_epoch = {});

void save_model(const std::filesystem::path& path, const BourneModel& model,
                const TrainConfig& cfg, std::int64_t step,
                const std::optional<OptimizerSnapshot>& optimizer = std::nullopt);

struct LoadedModel {
  BourneModel model;
  TrainConfig config;
  std::int64_t step = 0;
};
LoadedModel load_model(const std::filesystem::path& path);

class ScoreTable {
 public:
  ScoreTable(std::size_t num_nodes, std::size_t num_edges);

  void add_node(NodeId v, double score);
  void add_edge(EdgeId e, double score);
  void mark_isolated(NodeId v) { skipped_isolated_.push_back(v); }

  // +infinity for nodes never scored.
  double node_score(NodeId v) const;
  std::optional<double> edge_score(EdgeId e) const;
  std::uint32_t node_count(NodeId v) const { return node_count_[v]; }
  std::uint32_t edge_count(EdgeId e) const { return edge_count_[e]; }
  const std::vector<NodeId>& skipped_isolated() const { return skipped_isolated_; }
  std::size_t num_nodes() const { return node_sum_.size(); }
  std::size_t num_edges() const { return edge_sum_.size(); }

  // {"node_scores": [...], "edge_scores": [...], "skipped_isolated": [...]};
  // unscored entries are null.
  nlohmann::json to_json() const;
  static ScoreTable from_json(const nlohmann::json& j);

 private:
  std::vector<double> node_sum_;
  std::vector<std::uint32_t> node_count_;
  std::vector<double> edge_sum_;
  std::vector<std::uint32_t> edge_count_;
  std::vector<NodeId> skipped_isolated_;
};

struct InferenceConfig {
  std::size_t rounds = 160;
  std::uint64_t seed = 0;
  std::size_t batch_size = 256;
  std::size_t threads = 1;
  ViewConfig view;
  ScoreWeights weights;
};

ScoreTable infer_scores(const AttributedGraph& graph, const BourneModel& model,
                        const InferenceConfig& cfg);

}  // namespace bourne
