#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "valuesim/eigen.hpp"
#include "valuesim/error.hpp"
#include "valuesim/matrix.hpp"

namespace valuesim {

enum class DissimilarityTransform {
  OneMinusR,        // 1 - r
  SqrtTwoOneMinusR  // sqrt(2 (1 - r))
};

struct DissimilarityMatrix {
  std::vector<std::string> labels;
  Matrix cells;
};

struct Embedding {
  std::vector<std::string> labels;
  Matrix points;  // n x dim
  std::vector<double> eigenvalues;
  /// Count of Torgerson eigenvalues below zero (non-Euclidean input).
  std::size_t negative_eigenvalues = 0;
};

inline DissimilarityMatrix corr_to_dissimilarity(const CorrelationMatrix& c,
                                                 DissimilarityTransform transform = DissimilarityTransform::OneMinusR) {
  if (c.rows() != c.cols() || c.row_labels != c.col_labels || !c.cells.is_symmetric(1e-12))
    fail(Errc::NotSymmetric, "dissimilarities need a symmetric correlation matrix");
  const std::size_t n = c.rows();
  DissimilarityMatrix d{c.row_labels, Matrix(n, n)};
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      const double r = 0.5 * (c.cells(i, j) + c.cells(j, i));
      const double one_minus = std::clamp(1.0 - r, 0.0, 2.0);
      d.cells(i, j) = transform == DissimilarityTransform::OneMinusR ? one_minus : std::sqrt(2.0 * one_minus);
    }
  return d;
}

/// Classical (Torgerson) scaling into `dim` dimensions.
inline Embedding classical_mds(const DissimilarityMatrix& delta, std::size_t dim = 2) {
  const Matrix& d = delta.cells;
  const std::size_t n = d.rows();
  if (d.cols() != n || !d.is_symmetric(1e-12)) fail(Errc::NotSymmetric, "dissimilarity matrix is not symmetric");
  if (delta.labels.size() != n) fail(Errc::ShapeMismatch, "dissimilarity labels do not match its size");
  for (double x : d.data())
    if (x < 0.0) fail(Errc::NegativeEntries, "dissimilarity matrix has negative entries");
  for (std::size_t i = 0; i < n; ++i)
    if (d(i, i) != 0.0) fail(Errc::InvalidArgument, "dissimilarity diagonal must be zero");
  if (n == 0 || dim > n - 1)
    fail(Errc::DimensionTooLarge, "cannot embed " + std::to_string(n) + " points in " + std::to_string(dim) + " dims");

  // B = -1/2 J D^2 J, via row/column/grand means of the squared entries.
  Matrix sq(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) sq(i, j) = d(i, j) * d(i, j);
  std::vector<double> row_mean(n, 0.0);
  double grand = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) row_mean[i] += sq(i, j);
    grand += row_mean[i];
    row_mean[i] /= static_cast<double>(n);
  }
  grand /= static_cast<double>(n * n);
  Matrix b(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j <= i; ++j)
      b(i, j) = b(j, i) = -0.5 * (sq(i, j) - row_mean[i] - row_mean[j] + grand);

  const SymmetricEigen eig = jacobi_eigen(b);
  Embedding e;
  e.labels = delta.labels;
  e.eigenvalues = eig.values;
  double scale = 0.0;
  for (double l : eig.values) scale = std::max(scale, std::abs(l));
  for (double l : eig.values)
    if (l < -1e-10 * std::max(1.0, scale)) ++e.negative_eigenvalues;
  e.points = Matrix(n, dim);
  for (std::size_t k = 0; k < dim; ++k) {
    const double root = std::sqrt(std::max(eig.values[k], 0.0));
    for (std::size_t i = 0; i < n; ++i) e.points(i, k) = eig.vectors(i, k) * root;
  }
  return e;
}

/// Pairwise Euclidean distances between rows of `points`.
inline DissimilarityMatrix pairwise_distances(const std::vector<std::string>& labels, const Matrix& points) {
  const std::size_t n = points.rows();
  DissimilarityMatrix d{labels, Matrix(n, n)};
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < i; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < points.cols(); ++k) {
        const double diff = points(i, k) - points(j, k);
        s += diff * diff;
      }
      d.cells(i, j) = d.cells(j, i) = std::sqrt(s);
    }
  return d;
}

}  // namespace valuesim
