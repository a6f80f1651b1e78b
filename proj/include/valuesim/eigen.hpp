#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "valuesim/error.hpp"
#include "valuesim/matrix.hpp"

namespace valuesim {

struct SymmetricEigen {
  std::vector<double> values;  // descending
  Matrix vectors;              // column k pairs with values[k]
  int sweeps = 0;
};

inline double off_diagonal_norm(const Matrix& a) noexcept {
  double s = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j)
      if (i != j) s += a(i, j) * a(i, j);
  return std::sqrt(s);
}

/// Cyclic Jacobi eigensolver for a symmetric matrix.
///
/// Sweeps every (p, q) pair until the off-diagonal Frobenius norm drops
/// below `tol` (relative to the matrix norm once that exceeds 1). Each
/// eigenvector's first component larger than 1e-12 in magnitude is made
/// positive.
inline SymmetricEigen jacobi_eigen(Matrix a, double tol = 1e-12, int max_sweeps = 100) {
  const std::size_t n = a.rows();
  if (a.cols() != n) fail(Errc::ShapeMismatch, "eigensolver needs a square matrix");
  if (!a.is_symmetric(1e-12 * std::max(1.0, a.frobenius_norm())))
    fail(Errc::NotSymmetric, "eigensolver needs a symmetric matrix");

  const double threshold = tol * std::max(1.0, a.frobenius_norm());
  Matrix v = Matrix::identity(n);
  int sweep = 0;
  for (; sweep < max_sweeps && off_diagonal_norm(a) >= threshold; ++sweep) {
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          if (k == p || k == q) continue;
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = a(p, k) = c * akp - s * akq;
          a(k, q) = a(q, k) = s * akp + c * akq;
        }
        a(p, p) -= t * apq;
        a(q, q) += t * apq;
        a(p, q) = a(q, p) = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return a(i, i) > a(j, j); });

  SymmetricEigen out;
  out.sweeps = sweep;
  out.values.resize(n);
  out.vectors = Matrix(n, n);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t src = order[k];
    out.values[k] = a(src, src);
    double sign = 1.0;
    for (std::size_t i = 0; i < n; ++i)
      if (std::abs(v(i, src)) > 1e-12) {
        sign = v(i, src) > 0.0 ? 1.0 : -1.0;
        break;
      }
    for (std::size_t i = 0; i < n; ++i) out.vectors(i, k) = sign * v(i, src);
  }
  return out;
}

}  // namespace valuesim
