#pragma once

#include <algorithm>
#include <cmath>
#include <functional>

#include "bourne/tensor.hpp"

namespace bourne::testing {

// Central differences of f at every entry of *x, step h, evaluated in place.
inline Matrix numeric_gradient(const std::function<double()>& f, Matrix* x, float h = 1e-3f) {
  Matrix g(x->rows(), x->cols());
  for (Eigen::Index i = 0; i < x->size(); ++i) {
    const float saved = x->data()[i];
    const float hi = saved + h;
    const float lo = saved - h;
    x->data()[i] = hi;
    const double up = f();
    x->data()[i] = lo;
    const double down = f();
    x->data()[i] = saved;
    // divide by the step actually taken after float rounding
    g.data()[i] = static_cast<float>((up - down) / (static_cast<double>(hi) - lo));
  }
  return g;
}

// Norm-wise relative error, floored so that tiny gradients compare absolutely.
inline double relative_error(const Matrix& a, const Matrix& b) {
  const double scale = std::max({static_cast<double>(a.norm()), static_cast<double>(b.norm()), 1e-2});
  return static_cast<double>((a - b).norm()) / scale;
}

// sum(y .* weights) in double.
inline double weighted_sum(const Matrix& y, const Matrix& weights) {
  return (y.cast<double>().array() * weights.cast<double>().array()).sum();
}

}  // namespace bourne::testing
