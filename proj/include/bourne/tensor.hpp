#pragma once

#include <Eigen/Core>

namespace bourne {

// Row-major so that a matrix row is a contiguous embedding vector.
using Matrix = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RowVector = Eigen::Matrix<float, 1, Eigen::Dynamic>;
using ConstRowRef = Eigen::Ref<const RowVector>;

}  // namespace bourne
