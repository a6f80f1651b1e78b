#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "valuesim/error.hpp"

namespace valuesim {

/// Dense row-major matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0) : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  static Matrix from_rows(const std::vector<std::vector<double>>& rows) {
    Matrix m(rows.size(), rows.empty() ? 0 : rows.front().size());
    for (std::size_t i = 0; i < m.rows_; ++i) {
      if (rows[i].size() != m.cols_) fail(Errc::ShapeMismatch, "ragged row " + std::to_string(i));
      for (std::size_t j = 0; j < m.cols_; ++j) m(i, j) = rows[i][j];
    }
    return m;
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  double& operator()(std::size_t i, std::size_t j) noexcept { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const noexcept { return data_[i * cols_ + j]; }

  std::span<double> row(std::size_t i) noexcept { return {data_.data() + i * cols_, cols_}; }
  std::span<const double> row(std::size_t i) const noexcept { return {data_.data() + i * cols_, cols_}; }
  std::span<const double> data() const noexcept { return data_; }

  std::vector<double> column(std::size_t j) const {
    std::vector<double> out(rows_);
    for (std::size_t i = 0; i < rows_; ++i) out[i] = (*this)(i, j);
    return out;
  }

  Matrix transpose() const {
    Matrix t(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
  }

  double frobenius_norm() const noexcept {
    double s = 0.0;
    for (double x : data_) s += x * x;
    return std::sqrt(s);
  }

  bool is_symmetric(double tol = 0.0) const noexcept {
    if (rows_ != cols_) return false;
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = i + 1; j < cols_; ++j)
        if (std::abs((*this)(i, j) - (*this)(j, i)) > tol) return false;
    return true;
  }

  friend Matrix operator*(const Matrix& a, const Matrix& b) {
    if (a.cols_ != b.rows_) fail(Errc::ShapeMismatch, "matrix product of incompatible shapes");
    Matrix c(a.rows_, b.cols_);
    for (std::size_t i = 0; i < a.rows_; ++i)
      for (std::size_t k = 0; k < a.cols_; ++k) {
        const double aik = a(i, k);
        for (std::size_t j = 0; j < b.cols_; ++j) c(i, j) += aik * b(k, j);
      }
    return c;
  }

  friend Matrix operator-(const Matrix& a, const Matrix& b) {
    if (a.rows_ != b.rows_ || a.cols_ != b.cols_) fail(Errc::ShapeMismatch, "matrix difference of unequal shapes");
    Matrix c = a;
    for (std::size_t i = 0; i < c.data_.size(); ++i) c.data_[i] -= b.data_[i];
    return c;
  }

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// N respondents by labeled constructs.
struct DataMatrix {
  std::vector<std::string> labels;
  Matrix cells;

  DataMatrix() = default;
  DataMatrix(std::vector<std::string> l, Matrix c) : labels(std::move(l)), cells(std::move(c)) {
    if (labels.size() != cells.cols())
      fail(Errc::ShapeMismatch, std::to_string(labels.size()) + " labels for " + std::to_string(cells.cols()) +
                                    " columns");
    for (double x : cells.data())
      if (!std::isfinite(x)) fail(Errc::InvalidArgument, "data matrix has a non-finite cell");
  }

  std::size_t rows() const noexcept { return cells.rows(); }
  std::size_t cols() const noexcept { return cells.cols(); }
};

/// Labeled Pearson matrix, square-symmetric (value x value) or rectangular
/// (value x behavior).
struct CorrelationMatrix {
  std::vector<std::string> row_labels;
  std::vector<std::string> col_labels;
  Matrix cells;
  bool symmetric = false;

  std::size_t rows() const noexcept { return cells.rows(); }
  std::size_t cols() const noexcept { return cells.cols(); }

  void validate() const {
    if (row_labels.size() != cells.rows() || col_labels.size() != cells.cols())
      fail(Errc::ShapeMismatch, "correlation matrix labels do not match its shape");
    for (double x : cells.data())
      if (!(x >= -1.0 && x <= 1.0)) fail(Errc::OutOfRange, "correlation cell outside [-1, 1]");
    if (symmetric) {
      if (row_labels != col_labels) fail(Errc::NotSymmetric, "symmetric matrix needs equal row and column labels");
      if (!cells.is_symmetric(1e-12)) fail(Errc::NotSymmetric, "matrix is not symmetric");
      for (std::size_t i = 0; i < rows(); ++i)
        if (std::abs(cells(i, i) - 1.0) > 1e-12) fail(Errc::NotSymmetric, "diagonal entry is not 1");
    }
  }
};

}  // namespace valuesim
