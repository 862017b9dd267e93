#include "bourne/nn.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>

#include <fmt/format.h>

#include "bourne/errors.hpp"

namespace bourne {

namespace {
std::atomic<std::uint64_t> g_degenerate_norms{0};
}

Parameter::Parameter(std::string n, Matrix init)
    : name(std::move(n)), value(std::move(init)), grad(Matrix::Zero(value.rows(), value.cols())) {}

Matrix glorot_uniform(std::size_t fan_in, std::size_t fan_out, Rng& rng) {
  const float bound = std::sqrt(6.0f / static_cast<float>(fan_in + fan_out));
  std::uniform_real_distribution<float> dist(-bound, bound);
  Matrix w(fan_in, fan_out);
  for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = dist(rng);
  return w;
}

Matrix linear_forward(const Matrix& x, const Matrix& w) {
  if (x.cols() != w.rows()) {
    throw InvalidInput(fmt::format("linear: {}x{} input, {}x{} weight", x.rows(), x.cols(),
                                   w.rows(), w.cols()));
  }
  return x * w;
}

Matrix linear_backward(const Matrix& x, const Matrix& w, const Matrix& dy, Matrix& dw) {
  dw.noalias() += x.transpose() * dy;
  return dy * w.transpose();
}

Matrix prelu_forward(const Matrix& x, float slope) {
  return x.unaryExpr([slope](float v) { return v >= 0.0f ? v : slope * v; });
}

Matrix prelu_backward(const Matrix& x, float slope, const Matrix& dy, float& dslope) {
  Matrix dx(x.rows(), x.cols());
  double acc = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const float v = x.data()[i];
    const float g = dy.data()[i];
    if (v >= 0.0f) {
      dx.data()[i] = g;
    } else {
      dx.data()[i] = slope * g;
      acc += static_cast<double>(v) * g;
    }
  }
  dslope += static_cast<float>(acc);
  return dx;
}

double cosine_similarity(const ConstRowRef& a, const ConstRowRef& b) {
  const double na = a.cast<double>().norm();
  const double nb = b.cast<double>().norm();
  if (na < kNormFloor || nb < kNormFloor) g_degenerate_norms.fetch_add(1);
  const double dot = a.cast<double>().dot(b.cast<double>());
  return std::clamp(dot / (std::max<double>(na, kNormFloor) * std::max<double>(nb, kNormFloor)),
                    -1.0, 1.0);
}

CosineGrad cosine_similarity_backward(const ConstRowRef& a, const ConstRowRef& b,
                                      float upstream) {
  const double raw_na = a.cast<double>().norm();
  const double raw_nb = b.cast<double>().norm();
  const double na = std::max<double>(raw_na, kNormFloor);
  const double nb = std::max<double>(raw_nb, kNormFloor);
  const double dot = a.cast<double>().dot(b.cast<double>());
  const double cos = dot / (na * nb);
  // d cos / da = b / (na nb) - cos a / na^2, where the second term vanishes
  // when the floor is active (na is then a constant).
  const double ca = raw_na >= kNormFloor ? cos / (na * na) : 0.0;
  const double cb = raw_nb >= kNormFloor ? cos / (nb * nb) : 0.0;
  CosineGrad g;
  g.da = (upstream * (b.cast<double>() / (na * nb) - ca * a.cast<double>())).cast<float>();
  g.db = (upstream * (a.cast<double>() / (na * nb) - cb * b.cast<double>())).cast<float>();
  return g;
}

std::uint64_t degenerate_norm_count() { return g_degenerate_norms.load(); }

Adam::Adam(AdamConfig config, std::vector<Parameter*> params)
    : config_(config), params_(std::move(params)) {
  for (const auto* p : params_) {
    m_.push_back(Matrix::Zero(p->value.rows(), p->value.cols()));
    v_.push_back(Matrix::Zero(p->value.rows(), p->value.cols()));
  }
}

void Adam::step() {
  for (const auto* p : params_) {
    if (!p->grad.allFinite()) {
      throw NumericalError(fmt::format("non-finite gradient in parameter '{}' at step {}",
                                       p->name, step_ + 1));
    }
  }
  ++step_;
  const auto t = static_cast<double>(step_);
  const float correction1 = static_cast<float>(1.0 - std::pow(config_.beta1, t));
  const float correction2 = static_cast<float>(1.0 - std::pow(config_.beta2, t));
  const float b1 = config_.beta1;
  const float b2 = config_.beta2;
  for (std::size_t i = 0; i < params_.size(); ++i) {
    auto& p = *params_[i];
    m_[i] = b1 * m_[i] + (1.0f - b1) * p.grad;
    v_[i] = b2 * v_[i] + (1.0f - b2) * p.grad.cwiseProduct(p.grad);
    const auto m_hat = m_[i].array() / correction1;
    const auto v_hat = v_[i].array() / correction2;
    p.value.array() -= config_.learning_rate * m_hat / (v_hat.sqrt() + config_.epsilon);
    p.zero_grad();
  }
}

void Adam::restore(std::int64_t step, std::vector<Matrix> m, std::vector<Matrix> v) {
  if (m.size() != params_.size() || v.size() != params_.size()) {
    throw InvalidInput("optimizer state does not match parameter list");
  }
  for (std::size_t i = 0; i < params_.size(); ++i) {
    if (m[i].rows() != params_[i]->value.rows() || m[i].cols() != params_[i]->value.cols() ||
        v[i].rows() != m[i].rows() || v[i].cols() != m[i].cols()) {
      throw InvalidInput(fmt::format("optimizer moment shape mismatch for '{}'",
                                     params_[i]->name));
    }
  }
  step_ = step;
  m_ = std::move(m);
  v_ = std::move(v);
}

void ema_update(const Parameter& online, Parameter& target, float tau) {
  if (!(tau >= 0.0f && tau <= 1.0f)) throw InvalidInput("EMA decay must lie in [0, 1]");
  if (online.value.rows() != target.value.rows() || online.value.cols() != target.value.cols()) {
    throw InvalidInput(fmt::format("EMA shape mismatch: '{}' {}x{} vs '{}' {}x{}", online.name,
                                   online.value.rows(), online.value.cols(), target.name,
                                   target.value.rows(), target.value.cols()));
  }
  // Iterate on a double copy: rounding the float state every step compounds to ~4e-7 at tau=0.99.
  auto& shadow = target.ema_shadow;
  if (shadow.rows() != target.value.rows() || shadow.cols() != target.value.cols() ||
      shadow.cast<float>() != target.value) {
    shadow = target.value.cast<double>();
  }
  const double t = tau;
  shadow = t * shadow + (1.0 - t) * online.value.cast<double>();
  target.value = shadow.cast<float>();
}

}  // namespace bourne
