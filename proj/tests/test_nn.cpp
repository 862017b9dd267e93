#include <gtest/gtest.h>

#include "bourne/errors.hpp"
#include "bourne/nn.hpp"
#include "gradcheck.hpp"
#include "test_support.hpp"

namespace bourne {
namespace {

using testing::numeric_gradient;
using testing::random_matrix;
using testing::relative_error;
using testing::weighted_sum;

// Moves entries away from the PReLU kink so central differences stay on one side.
Matrix away_from_zero(Matrix m, float margin) {
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    float& v = m.data()[i];
    if (std::abs(v) < margin) v = v < 0 ? -margin - std::abs(v) : margin + v;
  }
  return m;
}

TEST(Linear, IdentityWeightPassesInputThrough) {
  auto rng = make_rng({1});
  const Matrix x = random_matrix(4, 3, rng);
  EXPECT_EQ(linear_forward(x, Matrix::Identity(3, 3)), x);
  EXPECT_THROW(linear_forward(x, Matrix::Identity(2, 2)), InvalidInput);
}

TEST(Linear, WeightGradientIsInputTransposeTimesUpstream) {
  auto rng = make_rng({2});
  const Matrix x = random_matrix(5, 4, rng);
  const Matrix w = random_matrix(4, 3, rng);
  const Matrix dy = random_matrix(5, 3, rng);
  Matrix dw = Matrix::Zero(4, 3);
  const Matrix dx = linear_backward(x, w, dy, dw);
  EXPECT_LE(relative_error(dw, x.transpose() * dy), 1e-6);
  EXPECT_LE(relative_error(dx, dy * w.transpose()), 1e-6);
}

TEST(Linear, FiniteDifferences) {
  auto rng = make_rng({3});
  for (int trial = 0; trial < 20; ++trial) {
    Matrix x = random_matrix(5, 4, rng);
    Matrix w = random_matrix(4, 3, rng);
    const Matrix g = random_matrix(5, 3, rng);
    const auto f = [&] { return weighted_sum(linear_forward(x, w), g); };
    // double reference of the same map, so float rounding stays out of the oracle
    const auto f64 = [&] {
      return ((x.cast<double>() * w.cast<double>()).array() * g.cast<double>().array()).sum();
    };
    Matrix dw = Matrix::Zero(4, 3);
    const Matrix dx = linear_backward(x, w, g, dw);
    EXPECT_LE(relative_error(dw, numeric_gradient(f64, &w)), 1e-4);
    EXPECT_LE(relative_error(dx, numeric_gradient(f64, &x)), 1e-4);
    EXPECT_LE(relative_error(dw, numeric_gradient(f, &w)), 1e-3);
    EXPECT_LE(relative_error(dx, numeric_gradient(f, &x)), 1e-3);
  }
}

TEST(Prelu, SlopeOneIsIdentitySlopeZeroIsRelu) {
  auto rng = make_rng({4});
  const Matrix x = random_matrix(6, 5, rng);
  EXPECT_EQ(prelu_forward(x, 1.0f), x);
  EXPECT_EQ(prelu_forward(x, 0.0f), x.cwiseMax(0.0f));
}

TEST(Prelu, FiniteDifferences) {
  auto rng = make_rng({5});
  for (int trial = 0; trial < 20; ++trial) {
    Matrix x = away_from_zero(random_matrix(6, 5, rng), 0.01f);
    Matrix slope = Matrix::Constant(1, 1, 0.25f);
    const Matrix g = random_matrix(6, 5, rng);
    const auto f = [&] { return weighted_sum(prelu_forward(x, slope(0, 0)), g); };
    const auto f64 = [&] {
      const double a = slope(0, 0);
      double acc = 0.0;
      for (Eigen::Index i = 0; i < x.size(); ++i) {
        const double v = x.data()[i];
        acc += (v >= 0.0 ? v : a * v) * static_cast<double>(g.data()[i]);
      }
      return acc;
    };
    float dslope = 0.0f;
    const Matrix dx = prelu_backward(x, slope(0, 0), g, dslope);
    const Matrix ds = Matrix::Constant(1, 1, dslope);
    EXPECT_LE(relative_error(dx, numeric_gradient(f64, &x)), 1e-4);
    EXPECT_LE(relative_error(ds, numeric_gradient(f64, &slope)), 1e-4);
    EXPECT_LE(relative_error(dx, numeric_gradient(f, &x)), 1e-3);
    EXPECT_LE(relative_error(ds, numeric_gradient(f, &slope)), 1e-3);
  }
}

TEST(Cosine, KnownValues) {
  RowVector a(3), b(2), c(2);
  a << 1, 2, 3;
  b << 1, 0;
  c << 0, 1;
  EXPECT_NEAR(cosine_similarity(a, a), 1.0, 1e-12);
  EXPECT_NEAR(cosine_similarity(b, c), 0.0, 1e-12);
  EXPECT_NEAR(cosine_similarity(b, -b), -1.0, 1e-12);
}

TEST(Cosine, ScaleInvariant) {
  auto rng = make_rng({6});
  for (int trial = 0; trial < 100; ++trial) {
    const RowVector a = random_matrix(1, 32, rng);
    const RowVector b = random_matrix(1, 32, rng);
    const float lambda = std::exp(random_matrix(1, 1, rng)(0, 0));
    EXPECT_NEAR(cosine_similarity(lambda * a, b), cosine_similarity(a, b), 1e-6);
  }
}

TEST(Cosine, FiniteDifferences128) {
  auto rng = make_rng({7});
  for (int trial = 0; trial < 20; ++trial) {
    Matrix a = random_matrix(1, 128, rng);
    Matrix b = random_matrix(1, 128, rng);
    const auto f = [&] { return 0.7 * cosine_similarity(a.row(0), b.row(0)); };
    const auto g = cosine_similarity_backward(a.row(0), b.row(0), 0.7f);
    EXPECT_LE(relative_error(g.da, numeric_gradient(f, &a)), 1e-4);
    EXPECT_LE(relative_error(g.db, numeric_gradient(f, &b)), 1e-4);
  }
}

TEST(Cosine, ZeroVectorIsStabilizedAndCounted) {
  const auto before = degenerate_norm_count();
  const RowVector z = RowVector::Zero(4);
  RowVector a(4);
  a << 1, 2, 3, 4;
  const double c = cosine_similarity(z, a);
  EXPECT_TRUE(std::isfinite(c));
  EXPECT_EQ(c, 0.0);
  EXPECT_GT(degenerate_norm_count(), before);
  const auto g = cosine_similarity_backward(z, a, 1.0f);
  EXPECT_TRUE(g.da.allFinite());
  EXPECT_TRUE(g.db.allFinite());
}

TEST(Adam, ZeroGradientLeavesParametersUnchanged) {
  Parameter p("w", Matrix::Constant(2, 2, 1.5f));
  Adam opt({0.1f}, {&p});
  opt.step();
  EXPECT_EQ(p.value, Matrix::Constant(2, 2, 1.5f));
}

TEST(Adam, FirstStepOnSquareFromOne) {
  // f(w) = w^2 at w = 1: grad 2, m_hat = 2, v_hat = 4, step = 0.1 * 2 / (2 + eps).
  Parameter p("w", Matrix::Constant(1, 1, 1.0f));
  Adam opt({0.1f}, {&p});
  p.grad(0, 0) = 2.0f * p.value(0, 0);
  opt.step();
  EXPECT_NEAR(p.value(0, 0), 0.9, 1e-6);
  EXPECT_EQ(p.grad(0, 0), 0.0f);
  EXPECT_EQ(opt.step_count(), 1);
}

TEST(Adam, ParametersUpdateIndependently) {
  Parameter a("a", Matrix::Constant(1, 1, 1.0f));
  Parameter b("b", Matrix::Constant(1, 1, 1.0f));
  Adam opt({0.1f}, {&a, &b});
  a.grad(0, 0) = 2.0f;
  opt.step();
  EXPECT_NEAR(a.value(0, 0), 0.9, 1e-6);
  EXPECT_EQ(b.value(0, 0), 1.0f);
}

TEST(Adam, NonFiniteGradientAbortsStep) {
  Parameter p("w", Matrix::Constant(1, 2, 1.0f));
  Adam opt({0.1f}, {&p});
  p.grad(0, 1) = std::numeric_limits<float>::quiet_NaN();
  EXPECT_THROW(opt.step(), NumericalError);
  EXPECT_EQ(p.value, Matrix::Constant(1, 2, 1.0f));
  EXPECT_EQ(opt.step_count(), 0);
}

TEST(Adam, Deterministic) {
  auto run = [] {
    Parameter p("w", Matrix::Constant(3, 3, 0.5f));
    Adam opt({0.01f}, {&p});
    for (int i = 0; i < 10; ++i) {
      p.grad = p.value * 2.0f;
      opt.step();
    }
    return p.value;
  };
  EXPECT_EQ(run(), run());
}

TEST(Ema, FormulaAndEdgeCases) {
  Parameter online("o", Matrix::Zero(1, 1));
  Parameter target("t", Matrix::Ones(1, 1));
  ema_update(online, target, 0.99f);
  EXPECT_NEAR(target.value(0, 0), 0.99, 1e-7);
  ema_update(online, target, 0.0f);
  EXPECT_EQ(target.value(0, 0), 0.0f);
  Parameter wrong("w", Matrix::Zero(2, 1));
  EXPECT_THROW(ema_update(wrong, target, 0.5f), InvalidInput);
  EXPECT_THROW(ema_update(online, target, 1.5f), InvalidInput);
}

TEST(Ema, GeometricConvergenceClosedForm) {
  const float tau = 0.9f;
  Parameter online("o", Matrix::Constant(1, 1, 0.25f));
  Parameter target("t", Matrix::Constant(1, 1, 1.0f));
  for (int n = 1; n <= 50; ++n) {
    ema_update(online, target, tau);
    const double expected = 0.25 + std::pow(static_cast<double>(tau), n) * 0.75;
    EXPECT_NEAR(target.value(0, 0), expected, 1e-7) << "step " << n;
  }
  EXPECT_TRUE(target.grad.isZero());
}

TEST(Ema, SlowDecayStaysOnClosedForm) {
  const float tau = 0.99f;
  Parameter online("o", Matrix::Constant(1, 1, -1.5f));
  Parameter target("t", Matrix::Constant(1, 1, 1.0f));
  for (int n = 1; n <= 200; ++n) {
    ema_update(online, target, tau);
    const double expected = -1.5 + std::pow(static_cast<double>(tau), n) * 2.5;
    ASSERT_NEAR(target.value(0, 0), expected, 1e-7) << "step " << n;
  }
}

TEST(Ema, ExternalWriteResyncsShadow) {
  Parameter online("o", Matrix::Constant(2, 2, 0.0f));
  Parameter target("t", Matrix::Constant(2, 2, 1.0f));
  ema_update(online, target, 0.5f);
  target.value(1, 1) = 4.0f;  // e.g. an optimizer step or a checkpoint load
  ema_update(online, target, 0.5f);
  EXPECT_FLOAT_EQ(target.value(0, 0), 0.25f);
  EXPECT_FLOAT_EQ(target.value(1, 1), 2.0f);
}

TEST(Glorot, BoundsAndSeed) {
  auto r1 = make_rng({8});
  auto r2 = make_rng({8});
  const Matrix a = glorot_uniform(64, 32, r1);
  EXPECT_EQ(a, glorot_uniform(64, 32, r2));
  const float bound = std::sqrt(6.0f / 96.0f);
  EXPECT_LE(a.cwiseAbs().maxCoeff(), bound);
}

}  // namespace
}  // namespace bourne
