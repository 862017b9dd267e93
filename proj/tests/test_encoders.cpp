#include <gtest/gtest.h>

#include "bourne/encoders.hpp"
#include "bourne/errors.hpp"
#include "gradcheck.hpp"
#include "test_support.hpp"

namespace bourne {
namespace {

using testing::numeric_gradient;
using testing::random_graph;
using testing::random_matrix;
using testing::relative_error;
using testing::weighted_sum;

SparseMatrix dense(std::initializer_list<std::initializer_list<float>> rows) {
  Matrix m(static_cast<Eigen::Index>(rows.size()),
           static_cast<Eigen::Index>(rows.begin()->size()));
  Eigen::Index r = 0;
  for (const auto& row : rows) {
    Eigen::Index c = 0;
    for (float v : row) m(r, c++) = v;
    ++r;
  }
  return SparseMatrix::from_dense(m);
}

ViewConfig small_view() {
  ViewConfig cfg;
  cfg.subgraph_size = 5;
  return cfg;
}

TEST(Gcn, SingleIsolatedNodeNormalizationCancels) {
  auto rng = make_rng({1});
  const Matrix x = random_matrix(1, 3, rng);
  const Matrix w = random_matrix(3, 2, rng);
  const auto h = gcn_forward(dense({{1}}), x, w, 0.25f);
  EXPECT_LE((h - prelu_forward(x * w, 0.25f)).norm(), 1e-6f);
  EXPECT_FLOAT_EQ(gcn_propagation(dense({{1}})).coeff(0, 0), 1.0f);
}

TEST(Gcn, DisconnectedNodesKeepTheirFeatures) {
  Matrix x(2, 2);
  x << 1, -2, 3, 4;
  const auto h = gcn_forward(dense({{1, 0}, {0, 0}}), x, Matrix::Identity(2, 2), 1.0f);
  EXPECT_LE((h - x).norm(), 1e-6f);
}

TEST(Gcn, PathOfTwoHandComputed) {
  // A + I = [[1,1],[1,1]], degrees 2 -> every entry 1/2.
  const auto p = gcn_propagation(dense({{0, 1}, {1, 0}}));
  EXPECT_FLOAT_EQ(p.coeff(0, 0), 0.5f);
  EXPECT_FLOAT_EQ(p.coeff(0, 1), 0.5f);
  Matrix x(2, 1);
  x << 2, 4;
  const auto h = gcn_forward(dense({{0, 1}, {1, 0}}), x, Matrix::Identity(1, 1), 1.0f);
  EXPECT_FLOAT_EQ(h(0, 0), 3.0f);
  EXPECT_FLOAT_EQ(h(1, 0), 3.0f);
}

TEST(Predictor, IdentityLayersGivePrelu) {
  BourneModel model({4, 4, 4, 1, 0.25f}, 1);
  model.online.predictor_in.value = Matrix::Identity(4, 4);
  model.online.predictor_out.value = Matrix::Identity(4, 4);
  auto rng = make_rng({2});
  const Matrix h = random_matrix(5, 4, rng);
  EXPECT_EQ(predictor_forward(h, model.online), prelu_forward(h, 0.25f));
}

TEST(Predictor, DefaultShapes) {
  BourneModel model({10, 128, 512, 1, 0.25f}, 1);
  EXPECT_EQ(model.online.predictor_in.value.rows(), 128);
  EXPECT_EQ(model.online.predictor_in.value.cols(), 512);
  EXPECT_EQ(model.online.predictor_out.value.cols(), 128);
  auto rng = make_rng({3});
  EXPECT_EQ(predictor_forward(random_matrix(7, 128, rng), model.online).cols(), 128);
}

TEST(Readout, GraphSideExamples) {
  Matrix same = Matrix::Constant(4, 3, 2.5f);
  EXPECT_EQ(graph_readout(same), RowVector::Constant(3, 2.5f));
  Matrix h(3, 2);
  h << 1, 0, 0, 1, 9, 9;
  RowVector expect(2);
  expect << 0.5f, 0.5f;
  EXPECT_EQ(graph_readout(h), expect);
  h.row(2) << -100, 100;  // the isolated target row is excluded
  EXPECT_EQ(graph_readout(h), expect);
}

TEST(Readout, HyperSideExamples) {
  auto rng = make_rng({4});
  Matrix z = random_matrix(5, 3, rng);
  EXPECT_EQ(hyper_readout(z, 1), RowVector(z.row(0)));
  const RowVector before = hyper_readout(z, 3);
  z.bottomRows(2).setConstant(1e6f);
  EXPECT_EQ(hyper_readout(z, 3), before);
  Matrix same = Matrix::Constant(4, 2, -1.0f);
  EXPECT_EQ(hyper_readout(same, 4), RowVector::Constant(2, -1.0f));
  EXPECT_THROW(hyper_readout(z, 0), InvalidInput);
}

TEST(Hgnn, IsolatedDualNodeIsSelfContained) {
  // Dual nodes 0,1 share hyperedge 0; dual node 2 is alone in hyperedge 1.
  const auto m = dense({{1, 0}, {1, 0}, {0, 1}});
  auto rng = make_rng({5});
  const Matrix x = random_matrix(3, 4, rng);
  const Matrix w = random_matrix(4, 2, rng);
  const auto z = hgnn_forward(m, x, w, 0.25f);
  const Matrix alone = prelu_forward(x.row(2) * w, 0.25f);
  EXPECT_LE((z.row(2) - alone).norm(), 1e-6f);
  EXPECT_EQ(z.rows(), 3);
}

TEST(Hgnn, SingleDualNodeWithIdentityWeights) {
  Matrix x(1, 3);
  x << 1, -2, 0.5;
  const auto z = hgnn_forward(dense({{1}}), x, Matrix::Identity(3, 3), 0.25f);
  EXPECT_LE((z - prelu_forward(x, 0.25f)).norm(), 1e-7f);
}

TEST(Hgnn, EmptyHyperedgeContributesNothing) {
  const auto with_empty = hypergraph_propagation(dense({{1, 0, 0}, {1, 0, 0}}));
  const auto without = hypergraph_propagation(dense({{1}, {1}}));
  EXPECT_EQ(with_empty.to_dense(), without.to_dense());
  EXPECT_THROW(hypergraph_propagation(dense({{1, 0}, {0, 0}})), NumericalError);
}

TEST(Encoders, TargetRowsIgnoreContextPerturbation) {
  const auto g = random_graph(60, 0.08, 5, 6);
  BourneModel model({5, 6, 8, 1, 0.25f}, 2);
  auto rng = make_rng({6});
  int checked = 0;
  for (NodeId v = 0; v < g.num_nodes() && checked < 20; ++v) {
    if (g.degree(v) == 0) continue;
    ++checked;
    const auto view = build_view(g, v, small_view(), rng);
    const auto ns = static_cast<Eigen::Index>(view.num_slots());
    const auto ms = static_cast<Eigen::Index>(view.num_dual_nodes());
    const auto& w = model.online.gcn_weights[0].value;

    Matrix xn = view.node_features(g.features());
    const Matrix h0 = gcn_forward(view.adjacency, xn, w, 0.25f);
    xn.topRows(ns) = random_matrix(ns, 5, rng);
    const Matrix h1 = gcn_forward(view.adjacency, xn, w, 0.25f);
    EXPECT_EQ(h0.row(ns), h1.row(ns));

    Matrix xe = view.edge_features(g.features());
    const Matrix z0 = hgnn_forward(view.incidence, xe, w, 0.25f);
    xe.topRows(ms) = random_matrix(ms, 5, rng);
    const Matrix z1 = hgnn_forward(view.incidence, xe, w, 0.25f);
    EXPECT_EQ(z0.bottomRows(z0.rows() - ms), z1.bottomRows(z1.rows() - ms));
  }
  EXPECT_EQ(checked, 20);
}

TEST(Encoders, ContextPermutationPermutesRowsAndKeepsReadout) {
  // Path 0-1-2-3 with node 0 as target; permute slots 1..3.
  const auto adj = dense({{0, 1, 0, 0, 0},
                          {1, 0, 1, 0, 0},
                          {0, 1, 0, 1, 0},
                          {0, 0, 1, 0, 0},
                          {0, 0, 0, 0, 1}});
  const std::vector<int> perm{0, 3, 1, 2, 4};  // new slot i holds old slot perm[i]
  Matrix pd = Matrix::Zero(5, 5);
  for (int i = 0; i < 5; ++i) {
    for (int j = 0; j < 5; ++j) pd(i, j) = adj.coeff(perm[i], perm[j]);
  }
  auto rng = make_rng({7});
  const Matrix x = random_matrix(5, 3, rng);
  Matrix px(5, 3);
  for (int i = 0; i < 5; ++i) px.row(i) = x.row(perm[i]);
  BourneModel model({3, 4, 6, 1, 0.25f}, 3);
  const auto h = gcn_forward(adj, x, model.online.gcn_weights[0].value, 0.25f);
  const auto ph = gcn_forward(SparseMatrix::from_dense(pd), px, model.online.gcn_weights[0].value,
                              0.25f);
  for (int i = 0; i < 5; ++i) EXPECT_LE((ph.row(i) - h.row(perm[i])).norm(), 1e-6f);
  const auto hb = predictor_forward(h, model.online);
  const auto phb = predictor_forward(ph, model.online);
  EXPECT_LE((graph_readout(hb) - graph_readout(phb)).norm(), 1e-5f);
}

TEST(Encoders, LiteralOutputsMatchStackedBranch) {
  const auto g = random_graph(80, 0.06, 4, 8);
  BourneModel model({4, 6, 8, 2, 0.25f}, 4);
  auto rng = make_rng({8});
  for (NodeId v = 0; v < 30; ++v) {
    if (g.degree(v) == 0) continue;
    const auto view = build_view(g, v, small_view(), rng);
    const auto graph_out = encode_graph_view(view, g.features(), model);
    const auto hyper_out = encode_hyper_view(view, g.features(), model);

    const auto h = branch_forward(view.node_feature_map, gcn_propagation(view.adjacency),
                                  g.features(), model.online.gcn_weights,
                                  model.online.gcn_slopes, nullptr);
    const auto hbar = predictor_forward(h, model.online);
    EXPECT_LE((hbar - graph_out.hbar).norm(), 1e-5f * (1.0f + hbar.norm()));
    const auto z = branch_forward(view.edge_feature_map, hypergraph_propagation(view.incidence),
                                  g.features(), model.target.hgnn_weights,
                                  model.target.hgnn_slopes, nullptr);
    EXPECT_LE((z - hyper_out.z).norm(), 1e-5f * (1.0f + z.norm()));

    const auto ns = static_cast<Eigen::Index>(view.num_slots());
    const auto mt = static_cast<Eigen::Index>(view.num_target_edges());
    EXPECT_EQ(graph_out.patch, RowVector(graph_out.hbar.row(0)));
    EXPECT_EQ(graph_out.target, RowVector(graph_out.hbar.row(ns)));
    EXPECT_EQ(hyper_out.target_rows.rows(), mt);
    EXPECT_EQ(hyper_out.context_rows, hyper_out.z.topRows(mt));
    EXPECT_EQ(hyper_out.z.rows(), static_cast<Eigen::Index>(view.num_dual_nodes()) + mt);
    EXPECT_TRUE(graph_out.hbar.allFinite());
    EXPECT_TRUE(hyper_out.z.allFinite());
  }
}

// Smallest |pre-activation| seen, used to reject trials that sit on a kink.
float kink_distance(const std::vector<Matrix>& pres) {
  float m = std::numeric_limits<float>::infinity();
  for (const auto& p : pres) m = std::min(m, p.cwiseAbs().minCoeff());
  return m;
}

TEST(Encoders, BranchGradientsMatchFiniteDifferences) {
  const auto g = random_graph(40, 0.1, 3, 9);
  auto rng = make_rng({9});
  int accepted = 0;
  for (int trial = 0; trial < 60 && accepted < 10; ++trial) {
    NodeId v = static_cast<NodeId>(uniform_index(rng, g.num_nodes()));
    if (g.degree(v) == 0) continue;
    const auto view = build_view(g, v, small_view(), rng);
    BourneModel model({3, 4, 5, 2, 0.25f}, static_cast<std::uint64_t>(trial));
    for (auto& s : model.online.gcn_slopes) s.value(0, 0) = 0.3f;
    const auto prop = gcn_propagation(view.adjacency);
    const auto& sel = view.node_feature_map;
    Matrix inputs = g.features();
    auto& weights = model.online.gcn_weights;
    auto& slopes = model.online.gcn_slopes;
    BranchCache cache;
    const Matrix out = branch_forward(sel, prop, inputs, weights, slopes, &cache);
    if (kink_distance(cache.pre) < 0.02f) continue;
    ++accepted;
    const Matrix up = random_matrix(out.rows(), out.cols(), rng);
    branch_backward(sel, prop, inputs, weights, slopes, cache, up);
    const auto f = [&] {
      return weighted_sum(branch_forward(sel, prop, inputs, weights, slopes, nullptr), up);
    };
    for (std::size_t l = 0; l < weights.size(); ++l) {
      const Matrix analytic = weights[l].grad;
      EXPECT_LE(relative_error(analytic, numeric_gradient(f, &weights[l].value)), 1e-3)
          << "layer " << l;
      const Matrix ds = slopes[l].grad;
      EXPECT_LE(relative_error(ds, numeric_gradient(f, &slopes[l].value)), 1e-3);
    }
  }
  EXPECT_GE(accepted, 5);
}

TEST(Encoders, PredictorGradientsMatchFiniteDifferences) {
  auto rng = make_rng({10});
  int accepted = 0;
  for (int trial = 0; trial < 40 && accepted < 10; ++trial) {
    BourneModel model({3, 4, 6, 1, 0.25f}, static_cast<std::uint64_t>(trial));
    Matrix h = random_matrix(5, 4, rng);
    PredictorCache cache;
    const Matrix out = predictor_forward(h, model.online, &cache);
    if (kink_distance({cache.hidden_pre}) < 0.02f) continue;
    ++accepted;
    const Matrix up = random_matrix(out.rows(), out.cols(), rng);
    const Matrix dh = predictor_backward(h, model.online, cache, up);
    const auto f = [&] { return weighted_sum(predictor_forward(h, model.online), up); };
    auto& p = model.online;
    const Matrix g_in = p.predictor_in.grad, g_out = p.predictor_out.grad,
                 g_slope = p.predictor_slope.grad;
    EXPECT_LE(relative_error(g_in, numeric_gradient(f, &p.predictor_in.value)), 1e-3);
    EXPECT_LE(relative_error(g_out, numeric_gradient(f, &p.predictor_out.value)), 1e-3);
    EXPECT_LE(relative_error(g_slope, numeric_gradient(f, &p.predictor_slope.value)), 1e-3);
    EXPECT_LE(relative_error(dh, numeric_gradient(f, &h)), 1e-3);
    // Gradients stay on the online side.
    for (const auto& w : model.target.hgnn_weights) EXPECT_TRUE(w.grad.isZero());
  }
  EXPECT_GE(accepted, 5);
}

}  // namespace
}  // namespace bourne
