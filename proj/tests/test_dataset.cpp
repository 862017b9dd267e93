#include <gtest/gtest.h>

#include <fstream>

#include "bourne/dataset.hpp"
#include "bourne/errors.hpp"
#include "bourne/synthetic.hpp"
#include "test_support.hpp"

namespace bourne {
namespace {

using testing::TempDir;

void write(const std::filesystem::path& p, const std::string& text) { std::ofstream(p) << text; }

TEST(Dataset, RoundTripIsExact) {
  auto g = testing::random_graph(30, 0.2, 5, 3);
  Labels nodes(30, 0), edges(g.num_edges(), 0);
  nodes[4] = 1;
  edges[0] = 1;
  g.set_node_labels(nodes);
  g.set_edge_labels(edges);
  TempDir dir("dataset");
  save_dataset(g, dir.path());
  const auto loaded = load_dataset(dir.path());
  EXPECT_TRUE(loaded.warnings.empty());
  EXPECT_EQ(loaded.graph.features(), g.features());
  EXPECT_TRUE(std::equal(g.edges().begin(), g.edges().end(), loaded.graph.edges().begin(),
                         loaded.graph.edges().end()));
  EXPECT_EQ(loaded.graph.node_labels(), g.node_labels());
  EXPECT_EQ(loaded.graph.edge_labels(), g.edge_labels());
}

TEST(Dataset, SymmetrizesDirectedInput) {
  TempDir dir("directed");
  write(dir.path() / "edges.csv", "src,dst\n0,1\n1,0\n2,1\n");
  write(dir.path() / "features.csv", "1,2\n3,4\n5,6\n");
  write(dir.path() / "meta.json", R"({"num_nodes":3,"num_edges":3,"feature_dim":2})");
  const auto loaded = load_dataset(dir.path());
  EXPECT_EQ(loaded.graph.num_edges(), 2u);
  EXPECT_EQ(loaded.warnings.size(), 1u);
}

TEST(Dataset, RejectsMalformedFiles) {
  TempDir dir("bad");
  write(dir.path() / "edges.csv", "src,dst\n0,x\n");
  write(dir.path() / "features.csv", "1,2\n3,4\n");
  EXPECT_THROW(load_dataset(dir.path()), InvalidInput);
  write(dir.path() / "edges.csv", "src,dst\n0,1\n");
  write(dir.path() / "features.csv", "1,2\n3\n");
  EXPECT_THROW(load_dataset(dir.path()), InvalidInput);
  write(dir.path() / "features.csv", "1,2\n3,4\n");
  write(dir.path() / "meta.json", R"({"num_nodes":5})");
  EXPECT_THROW(load_dataset(dir.path()), InvalidInput);
  EXPECT_THROW(load_dataset(dir.path() / "missing"), InvalidInput);
}

TEST(Synthetic, ErdosRenyiIsSeededAndSized) {
  SyntheticConfig cfg;
  cfg.num_nodes = 300;
  cfg.edge_prob = 0.05;
  cfg.feature_dim = 8;
  cfg.seed = 4;
  const auto a = erdos_renyi_graph(cfg);
  const auto b = erdos_renyi_graph(cfg);
  EXPECT_EQ(a.features(), b.features());
  ASSERT_EQ(a.num_edges(), b.num_edges());
  const double expected = 0.05 * 300 * 299 / 2;
  EXPECT_NEAR(static_cast<double>(a.num_edges()), expected, 5 * std::sqrt(expected));
  EXPECT_EQ(a.feature_dim(), 8u);
}

TEST(Synthetic, SmoothingCorrelatesNeighbors) {
  SyntheticConfig cfg;
  cfg.num_nodes = 400;
  cfg.edge_prob = 0.03;
  cfg.feature_dim = 16;
  cfg.seed = 5;
  const auto mean_edge_cosine = [](const AttributedGraph& g) {
    double total = 0.0;
    for (const auto& e : g.edges()) {
      const auto a = g.features().row(e.u);
      const auto b = g.features().row(e.v);
      total += a.dot(b) / (a.norm() * b.norm());
    }
    return total / static_cast<double>(g.num_edges());
  };
  const double raw = mean_edge_cosine(erdos_renyi_graph(cfg));
  cfg.smoothing_rounds = 3;
  const double smooth = mean_edge_cosine(erdos_renyi_graph(cfg));
  EXPECT_LT(std::abs(raw), 0.05);
  EXPECT_GT(smooth, raw + 0.2);
}

}  // namespace
}  // namespace bourne
