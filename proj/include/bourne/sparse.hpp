#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "bourne/tensor.hpp"

namespace bourne {

struct Triplet {
  std::uint32_t row;
  std::uint32_t col;
  float value;
};

// Compressed sparse row matrix. Column indices within a row are strictly
// increasing; explicit zeros are never stored.
class SparseMatrix {
 public:
  SparseMatrix() : row_ptr_(1, 0) {}
  SparseMatrix(std::size_t rows, std::size_t cols);

  // Duplicate coordinates are summed; resulting zeros are dropped.
  static SparseMatrix from_triplets(std::size_t rows, std::size_t cols,
                                    std::vector<Triplet> triplets);
  static SparseMatrix identity(std::size_t n);
  static SparseMatrix from_dense(const Matrix& dense);
  static SparseMatrix block_diagonal(std::span<const SparseMatrix* const> blocks);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t nnz() const { return col_idx_.size(); }

  std::span<const std::uint32_t> row_indices(std::size_t r) const {
    return {col_idx_.data() + row_ptr_[r], row_ptr_[r + 1] - row_ptr_[r]};
  }
  std::span<const float> row_values(std::size_t r) const {
    return {values_.data() + row_ptr_[r], row_ptr_[r + 1] - row_ptr_[r]};
  }
  std::size_t row_nnz(std::size_t r) const { return row_ptr_[r + 1] - row_ptr_[r]; }

  const std::vector<std::size_t>& row_ptr() const { return row_ptr_; }
  const std::vector<std::uint32_t>& col_idx() const { return col_idx_; }
  const std::vector<float>& values() const { return values_; }

  float coeff(std::size_t r, std::size_t c) const;

  SparseMatrix transpose() const;
  Matrix to_dense() const;
  std::vector<double> row_sums() const;
  std::vector<double> col_sums() const;

  // diag(left) * this * diag(right)
  SparseMatrix scaled(std::span<const float> left, std::span<const float> right) const;

  bool operator==(const SparseMatrix& other) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<std::size_t> row_ptr_;
  std::vector<std::uint32_t> col_idx_;
  std::vector<float> values_;
};

// Sparse-dense products with a fixed, row-sequential summation order.
Matrix spmm(const SparseMatrix& a, const Matrix& b);
// a^T * b without materializing the transpose.
Matrix spmm_transposed(const SparseMatrix& a, const Matrix& b);
// Sparse-sparse product, used to compose small per-view operators.
SparseMatrix spgemm(const SparseMatrix& a, const SparseMatrix& b);

}  // namespace bourne
