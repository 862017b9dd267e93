#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "bourne/random.hpp"
#include "bourne/tensor.hpp"

namespace bourne {

struct Parameter {
  std::string name;
  Matrix value;
  Matrix grad;  // same shape as value
  // Double shadow kept by ema_update; discarded when value no longer rounds from it.
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> ema_shadow;

  Parameter() = default;
  Parameter(std::string name, Matrix init);

  void zero_grad() { grad.setZero(); }
};

// Uniform Glorot initialization, U(-b, b) with b = sqrt(6 / (fan_in + fan_out)).
Matrix glorot_uniform(std::size_t fan_in, std::size_t fan_out, Rng& rng);

// y = x w (no bias).
Matrix linear_forward(const Matrix& x, const Matrix& w);
// Accumulates x^T dy into dw and returns dy w^T.
Matrix linear_backward(const Matrix& x, const Matrix& w, const Matrix& dy, Matrix& dw);

// PReLU with one shared slope: x if x >= 0 else slope * x.
Matrix prelu_forward(const Matrix& x, float slope);
// Returns dx; accumulates sum over negative entries of x * dy into dslope.
Matrix prelu_backward(const Matrix& x, float slope, const Matrix& dy, float& dslope);

// Lower bound applied to vector norms inside cosine similarity.
inline constexpr float kNormFloor = 1e-8f;

double cosine_similarity(const ConstRowRef& a, const ConstRowRef& b);

struct CosineGrad {
  RowVector da;
  RowVector db;
};
// Gradients of upstream * cos(a, b) with the same norm floor as the forward.
CosineGrad cosine_similarity_backward(const ConstRowRef& a, const ConstRowRef& b,
                                      float upstream);

// Number of cosine evaluations that hit the norm floor since process start.
std::uint64_t degenerate_norm_count();

struct AdamConfig {
  float learning_rate = 1e-3f;
  float beta1 = 0.9f;
  float beta2 = 0.999f;
  float epsilon = 1e-8f;
};

// Adam with bias correction over a fixed parameter list. Parameters are held
// by pointer; the owner must outlive the optimizer.
class Adam {
 public:
  Adam(AdamConfig config, std::vector<Parameter*> params);

  // Applies one update from the accumulated gradients, then zeroes them.
  // Throws NumericalError (leaving parameters untouched) on a non-finite
  // gradient.
  void step();

  std::int64_t step_count() const { return step_; }
  const AdamConfig& config() const { return config_; }
  const std::vector<Matrix>& first_moments() const { return m_; }
  const std::vector<Matrix>& second_moments() const { return v_; }
  void restore(std::int64_t step, std::vector<Matrix> m, std::vector<Matrix> v);
  const std::vector<Parameter*>& parameters() const { return params_; }

 private:
  AdamConfig config_;
  std::vector<Parameter*> params_;
  std::vector<Matrix> m_;
  std::vector<Matrix> v_;
  std::int64_t step_ = 0;
};

struct EmaLink {
  std::string source;       // online parameter name
  std::string destination;  // target parameter name
  float decay = 0.99f;      // tau
};

// target <- tau * target + (1 - tau) * online. Never touches gradients.
void ema_update(const Parameter& online, Parameter& target, float tau);

}  // namespace bourne
