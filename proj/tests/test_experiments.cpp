#include <gtest/gtest.h>

#include <sstream>

#include "bourne/errors.hpp"
#include "bourne/experiments.hpp"
#include "bourne/synthetic.hpp"
#include "test_support.hpp"

namespace bourne {
namespace {

using testing::TempDir;

AttributedGraph labeled_graph(std::size_t n) {
  SyntheticConfig sc;
  sc.num_nodes = n;
  sc.edge_prob = 0.03;
  sc.feature_dim = 8;
  sc.smoothing_rounds = 2;
  sc.seed = 17;
  InjectionConfig ic;
  ic.clique_size = 5;
  ic.clique_count = 2;
  ic.candidate_pool = 10;
  ic.rng_seed = 4;
  return inject_anomalies(erdos_renyi_graph(sc), ic).graph;
}

TrainConfig quick() {
  TrainConfig cfg;
  cfg.epochs = 2;
  cfg.eval_rounds = 2;
  cfg.embedding_dim = 8;
  cfg.predictor_hidden = 16;
  cfg.view.subgraph_size = 6;
  cfg.seed = 1;
  return cfg;
}

TEST(Pipeline, ProducesBothReports) {
  const auto g = labeled_graph(150);
  const auto r = run_pipeline(g, quick());
  EXPECT_EQ(r.evaluation.node.task, "node");
  EXPECT_EQ(r.evaluation.edge.task, "edge");
  EXPECT_GE(r.evaluation.node.auc, 0.0);
  EXPECT_LE(r.evaluation.node.auc, 1.0);
  EXPECT_EQ(r.log.size(), 2u);
  EXPECT_EQ(r.evaluation.node.num_scored + r.evaluation.node.num_skipped, g.num_nodes());
  EXPECT_EQ(r.evaluation.edge.config["seed"], 1);

  auto unlabeled = g;
  unlabeled.clear_labels();
  EXPECT_THROW(evaluate_scores(unlabeled, ScoreTable(g.num_nodes(), g.num_edges())),
               InvalidInput);
}

TEST(Sweep, SingleCellEqualsOneRun) {
  const auto g = labeled_graph(150);
  const auto base = quick();
  const auto result = run_hyperparameter_sweep(g, base, SweepGrid::single(base));
  ASSERT_EQ(result.rows.size(), 1u);
  EXPECT_EQ(result.trained_cells, 1u);
  const auto direct = run_pipeline(g, result.rows[0].config);
  EXPECT_EQ(result.rows[0].node_auc, direct.evaluation.node.auc);
  EXPECT_EQ(result.rows[0].edge_auc, direct.evaluation.edge.auc);
}

TEST(Sweep, CacheHitTrainsNothing) {
  TempDir dir("sweep");
  const auto g = labeled_graph(150);
  const auto base = quick();
  SweepGrid grid;
  grid.alpha = {0.2f, 1.0f};
  const auto first = run_hyperparameter_sweep(g, base, grid, dir.path());
  EXPECT_EQ(first.trained_cells, 2u);
  const auto second = run_hyperparameter_sweep(g, base, grid, dir.path());
  EXPECT_EQ(second.trained_cells, 0u);
  ASSERT_EQ(second.rows.size(), 2u);
  for (std::size_t i = 0; i < 2; ++i) {
    EXPECT_TRUE(second.rows[i].cached);
    EXPECT_EQ(second.rows[i].key, first.rows[i].key);
    EXPECT_EQ(second.rows[i].node_auc, first.rows[i].node_auc);
  }
  // A different graph misses the cache.
  const auto other = run_hyperparameter_sweep(labeled_graph(120), base, grid, dir.path());
  EXPECT_EQ(other.trained_cells, 2u);
}

TEST(Sweep, FiveByFiveGridEmitsTwentyFiveRows) {
  const auto g = labeled_graph(300);
  auto base = quick();
  base.epochs = 1;
  base.eval_rounds = 1;
  SweepGrid grid;
  grid.alpha = {0.2f, 0.4f, 0.6f, 0.8f, 1.0f};
  grid.beta = {0.2f, 0.4f, 0.6f, 0.8f, 1.0f};
  EXPECT_EQ(grid.size(), 25u);
  const auto result = run_hyperparameter_sweep(g, base, grid);
  ASSERT_EQ(result.rows.size(), 25u);
  const auto csv = sweep_csv(result);
  std::istringstream in(csv);
  std::string line;
  std::size_t lines = 0;
  while (std::getline(in, line)) ++lines;
  EXPECT_EQ(lines, 26u);
  // Per-cell seeds differ.
  EXPECT_NE(result.rows[0].config.seed, result.rows[1].config.seed);
}

TEST(CorrelationSweep, RowsReportAchievedLevels) {
  SyntheticConfig sc;
  sc.num_nodes = 200;
  sc.edge_prob = 0.03;
  sc.feature_dim = 8;
  sc.seed = 5;
  const auto base = erdos_renyi_graph(sc);
  CorrelationSweepConfig cfg;
  cfg.levels = {0.0, 1.0};
  cfg.injection.clique_size = 5;
  cfg.injection.clique_count = 2;
  cfg.injection.candidate_pool = 10;
  cfg.train = quick();
  const auto rows = run_correlation_sweep(base, cfg);
  ASSERT_EQ(rows.size(), 2u);
  for (const auto& r : rows) EXPECT_NEAR(r.achieved, r.requested, 0.05);
  const auto csv = correlation_csv(rows);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "requested_c_ano,achieved_c_ano,node_auc,edge_auc");

  cfg.levels = {1.0};
  cfg.base = SweepBase::kStructural;
  EXPECT_DOUBLE_EQ(run_correlation_sweep(base, cfg)[0].achieved, 1.0);
  cfg.levels.clear();
  EXPECT_THROW(run_correlation_sweep(base, cfg), InvalidInput);
}

TEST(Fingerprint, SensitiveToLabelsAndFeatures) {
  auto g = labeled_graph(100);
  const auto h = graph_fingerprint(g);
  EXPECT_EQ(graph_fingerprint(g), h);
  auto relabeled = g;
  auto labels = *g.node_labels();
  labels[0] ^= 1;
  relabeled.set_node_labels(labels);
  EXPECT_NE(graph_fingerprint(relabeled), h);
  RowVector row = g.features().row(3);
  row(0) += 1.0f;
  g.set_feature_row(3, row);
  EXPECT_NE(graph_fingerprint(g), h);
}

}  // namespace
}  // namespace bourne
