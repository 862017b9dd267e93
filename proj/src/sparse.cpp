#include "bourne/sparse.hpp"

#include <algorithm>

#include <fmt/format.h>

#include "bourne/errors.hpp"

namespace bourne {

SparseMatrix::SparseMatrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), row_ptr_(rows + 1, 0) {}

SparseMatrix SparseMatrix::from_triplets(std::size_t rows, std::size_t cols,
                                         std::vector<Triplet> triplets) {
  for (const auto& t : triplets) {
    if (t.row >= rows || t.col >= cols) {
      throw InvalidInput(fmt::format("triplet ({}, {}) outside {}x{} matrix", t.row,
                                     t.col, rows, cols));
    }
  }
  std::stable_sort(triplets.begin(), triplets.end(), [](const Triplet& a, const Triplet& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  SparseMatrix m(rows, cols);
  m.col_idx_.reserve(triplets.size());
  m.values_.reserve(triplets.size());
  std::size_t i = 0;
  while (i < triplets.size()) {
    const auto row = triplets[i].row;
    const auto col = triplets[i].col;
    float sum = 0.0f;
    while (i < triplets.size() && triplets[i].row == row && triplets[i].col == col) {
      sum += triplets[i].value;
      ++i;
    }
    if (sum != 0.0f) {
      m.col_idx_.push_back(col);
      m.values_.push_back(sum);
      ++m.row_ptr_[row + 1];
    }
  }
  for (std::size_t r = 0; r < rows; ++r) m.row_ptr_[r + 1] += m.row_ptr_[r];
  return m;
}

SparseMatrix SparseMatrix::identity(std::size_t n) {
  SparseMatrix m(n, n);
  m.col_idx_.resize(n);
  m.values_.assign(n, 1.0f);
  for (std::size_t i = 0; i < n; ++i) {
    m.col_idx_[i] = static_cast<std::uint32_t>(i);
    m.row_ptr_[i + 1] = i + 1;
  }
  return m;
}

SparseMatrix SparseMatrix::from_dense(const Matrix& dense) {
  SparseMatrix m(dense.rows(), dense.cols());
  for (Eigen::Index r = 0; r < dense.rows(); ++r) {
    for (Eigen::Index c = 0; c < dense.cols(); ++c) {
      if (dense(r, c) != 0.0f) {
        m.col_idx_.push_back(static_cast<std::uint32_t>(c));
        m.values_.push_back(dense(r, c));
      }
    }
    m.row_ptr_[r + 1] = m.col_idx_.size();
  }
  return m;
}

SparseMatrix SparseMatrix::block_diagonal(std::span<const SparseMatrix* const> blocks) {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::size_t nnz = 0;
  for (const auto* b : blocks) {
    rows += b->rows();
    cols += b->cols();
    nnz += b->nnz();
  }
  SparseMatrix m(rows, cols);
  m.col_idx_.reserve(nnz);
  m.values_.reserve(nnz);
  std::size_t row_offset = 0;
  std::uint32_t col_offset = 0;
  for (const auto* b : blocks) {
    for (std::size_t r = 0; r < b->rows(); ++r) {
      for (auto c : b->row_indices(r)) m.col_idx_.push_back(c + col_offset);
      const auto vals = b->row_values(r);
      m.values_.insert(m.values_.end(), vals.begin(), vals.end());
      m.row_ptr_[row_offset + r + 1] = m.col_idx_.size();
    }
    row_offset += b->rows();
    col_offset += static_cast<std::uint32_t>(b->cols());
  }
  return m;
}

float SparseMatrix::coeff(std::size_t r, std::size_t c) const {
  const auto idx = row_indices(r);
  const auto it = std::lower_bound(idx.begin(), idx.end(), c);
  if (it == idx.end() || *it != c) return 0.0f;
  return values_[row_ptr_[r] + static_cast<std::size_t>(it - idx.begin())];
}

SparseMatrix SparseMatrix::transpose() const {
  SparseMatrix t(cols_, rows_);
  t.col_idx_.resize(nnz());
  t.values_.resize(nnz());
  for (auto c : col_idx_) ++t.row_ptr_[c + 1];
  for (std::size_t r = 0; r < cols_; ++r) t.row_ptr_[r + 1] += t.row_ptr_[r];
  std::vector<std::size_t> cursor(t.row_ptr_.begin(), t.row_ptr_.end() - 1);
  for (std::size_t r = 0; r < rows_; ++r) {
    for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) {
      const auto dst = cursor[col_idx_[k]]++;
      t.col_idx_[dst] = static_cast<std::uint32_t>(r);
      t.values_[dst] = values_[k];
    }
  }
  return t;
}

Matrix SparseMatrix::to_dense() const {
  Matrix d = Matrix::Zero(rows_, cols_);
  for (std::size_t r = 0; r < rows_; ++r) {
    for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) d(r, col_idx_[k]) = values_[k];
  }
  return d;
}

std::vector<double> SparseMatrix::row_sums() const {
  std::vector<double> sums(rows_, 0.0);
  for (std::size_t r = 0; r < rows_; ++r) {
    for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) sums[r] += values_[k];
  }
  return sums;
}

std::vector<double> SparseMatrix::col_sums() const {
  std::vector<double> sums(cols_, 0.0);
  for (std::size_t k = 0; k < nnz(); ++k) sums[col_idx_[k]] += values_[k];
  return sums;
}

SparseMatrix SparseMatrix::scaled(std::span<const float> left,
                                  std::span<const float> right) const {
  if (left.size() != rows_ || right.size() != cols_) {
    throw InvalidInput("scaled: diagonal length mismatch");
  }
  SparseMatrix s = *this;
  for (std::size_t r = 0; r < rows_; ++r) {
    for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) {
      s.values_[k] = values_[k] * left[r] * right[col_idx_[k]];
    }
  }
  return s;
}

Matrix spmm(const SparseMatrix& a, const Matrix& b) {
  if (a.cols() != static_cast<std::size_t>(b.rows())) {
    throw InvalidInput(fmt::format("spmm: {}x{} times {}x{}", a.rows(), a.cols(), b.rows(),
                                   b.cols()));
  }
  Matrix out = Matrix::Zero(a.rows(), b.cols());
  for (std::size_t r = 0; r < a.rows(); ++r) {
    const auto idx = a.row_indices(r);
    const auto val = a.row_values(r);
    for (std::size_t k = 0; k < idx.size(); ++k) out.row(r).noalias() += val[k] * b.row(idx[k]);
  }
  return out;
}

Matrix spmm_transposed(const SparseMatrix& a, const Matrix& b) {
  if (a.rows() != static_cast<std::size_t>(b.rows())) {
    throw InvalidInput(fmt::format("spmm_transposed: ({}x{})^T times {}x{}", a.rows(),
                                   a.cols(), b.rows(), b.cols()));
  }
  Matrix out = Matrix::Zero(a.cols(), b.cols());
  for (std::size_t r = 0; r < a.rows(); ++r) {
    const auto idx = a.row_indices(r);
    const auto val = a.row_values(r);
    for (std::size_t k = 0; k < idx.size(); ++k) out.row(idx[k]).noalias() += val[k] * b.row(r);
  }
  return out;
}

SparseMatrix spgemm(const SparseMatrix& a, const SparseMatrix& b) {
  if (a.cols() != b.rows()) {
    throw InvalidInput(fmt::format("spgemm: {}x{} times {}x{}", a.rows(), a.cols(), b.rows(),
                                   b.cols()));
  }
  std::vector<Triplet> triplets;
  for (std::size_t r = 0; r < a.rows(); ++r) {
    const auto idx = a.row_indices(r);
    const auto val = a.row_values(r);
    for (std::size_t k = 0; k < idx.size(); ++k) {
      const auto bidx = b.row_indices(idx[k]);
      const auto bval = b.row_values(idx[k]);
      for (std::size_t j = 0; j < bidx.size(); ++j) {
        triplets.push_back({static_cast<std::uint32_t>(r), bidx[j], val[k] * bval[j]});
      }
    }
  }
  return SparseMatrix::from_triplets(a.rows(), b.cols(), std::move(triplets));
}

}  // namespace bourne
