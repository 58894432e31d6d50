#pragma once

#include <algorithm>
#include <cassert>
#include <cstddef>
#include <ostream>
#include <span>
#include <vector>

#include "aspectra/text.hpp"

namespace aspectra {

/// Row-major dense matrix of doubles.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  double& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) noexcept { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const noexcept { return {data_.data() + r * cols_, cols_}; }

  std::span<const double> data() const noexcept { return data_; }
  std::span<double> data() noexcept { return data_; }

  bool operator==(const DenseMatrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// Compressed sparse row matrix with column indices sorted within each row.
/// Explicitly stored zeros are allowed and count as structural entries.
struct CsrMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::size_t> row_ptr{0};
  std::vector<std::size_t> col_index;
  std::vector<double> values;

  std::size_t nnz() const noexcept { return values.size(); }
  std::size_t row_nnz(std::size_t r) const noexcept { return row_ptr[r + 1] - row_ptr[r]; }

  std::span<const std::size_t> row_cols(std::size_t r) const noexcept {
    return {col_index.data() + row_ptr[r], row_nnz(r)};
  }
  std::span<const double> row_values(std::size_t r) const noexcept {
    return {values.data() + row_ptr[r], row_nnz(r)};
  }

  bool contains(std::size_t r, std::size_t c) const noexcept {
    auto cols_r = row_cols(r);
    return std::binary_search(cols_r.begin(), cols_r.end(), c);
  }

  /// Stored value at (r, c), or 0 if the entry is not structural.
  double at(std::size_t r, std::size_t c) const noexcept {
    auto cols_r = row_cols(r);
    auto it = std::lower_bound(cols_r.begin(), cols_r.end(), c);
    if (it == cols_r.end() || *it != c) return 0.0;
    return values[row_ptr[r] + static_cast<std::size_t>(it - cols_r.begin())];
  }

  DenseMatrix to_dense() const {
    DenseMatrix d(rows, cols);
    for (std::size_t r = 0; r < rows; ++r) {
      auto c = row_cols(r);
      auto v = row_values(r);
      for (std::size_t k = 0; k < c.size(); ++k) d(r, c[k]) = v[k];
    }
    return d;
  }

  bool operator==(const CsrMatrix&) const = default;
};

/// out = a * x for dense x with matching row count.
inline void multiply(const CsrMatrix& a, const DenseMatrix& x, DenseMatrix& out) {
  assert(a.cols == x.rows() && out.rows() == a.rows && out.cols() == x.cols());
  const std::size_t width = x.cols();
  for (std::size_t r = 0; r < a.rows; ++r) {
    auto dst = out.row(r);
    std::fill(dst.begin(), dst.end(), 0.0);
    auto cols = a.row_cols(r);
    auto vals = a.row_values(r);
    for (std::size_t k = 0; k < cols.size(); ++k) {
      auto src = x.row(cols[k]);
      for (std::size_t j = 0; j < width; ++j) dst[j] += vals[k] * src[j];
    }
  }
}

/// Coordinate-list dump: one "row col weight" line per stored entry.
inline void write_coo(const CsrMatrix& m, std::ostream& out) {
  for (std::size_t r = 0; r < m.rows; ++r) {
    auto cols = m.row_cols(r);
    auto vals = m.row_values(r);
    for (std::size_t k = 0; k < cols.size(); ++k)
      out << r << ' ' << cols[k] << ' ' << text::format_double(vals[k]) << '\n';
  }
}

}  // namespace aspectra
