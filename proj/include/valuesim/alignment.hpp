#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "valuesim/error.hpp"
#include "valuesim/matrix.hpp"
#include "valuesim/mds.hpp"
#include "valuesim/population.hpp"
#include "valuesim/procrustes.hpp"
#include "valuesim/random.hpp"
#include "valuesim/stats.hpp"

namespace valuesim {

namespace detail {
struct ColumnMoments {
  std::vector<double> mean;
  std::vector<double> ss;  // weighted sum of squared deviations
};

inline ColumnMoments column_moments(const DataMatrix& d, std::span<const double> w) {
  const std::size_t n = d.rows(), p = d.cols();
  ColumnMoments m{std::vector<double>(p, 0.0), std::vector<double>(p, 0.0)};
  double wsum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double wi = w.empty() ? 1.0 : w[i];
    wsum += wi;
    for (std::size_t j = 0; j < p; ++j) m.mean[j] += wi * d.cells(i, j);
  }
  for (double& x : m.mean) x /= wsum;
  for (std::size_t i = 0; i < n; ++i) {
    const double wi = w.empty() ? 1.0 : w[i];
    for (std::size_t j = 0; j < p; ++j) {
      const double dv = d.cells(i, j) - m.mean[j];
      m.ss[j] += wi * dv * dv;
    }
  }
  for (std::size_t j = 0; j < p; ++j)
    if (m.ss[j] == 0.0) fail(Errc::ConstantColumn, "column '" + d.labels[j] + "' has zero variance");
  return m;
}

inline void check_rows(const DataMatrix& d, std::span<const double> w) {
  if (d.rows() < 3) fail(Errc::LengthMismatch, "correlation needs at least 3 rows");
  if (!w.empty()) {
    if (w.size() != d.rows()) fail(Errc::RowCountMismatch, "one weight per row required");
    for (double x : w)
      if (!(x >= 0.0)) fail(Errc::InvalidArgument, "row weights must be non-negative");
  }
}
}  // namespace detail

/// Pairwise column correlations; optional non-negative row weights give the
/// weighted (mixture) correlation.
inline CorrelationMatrix corr_matrix(const DataMatrix& d, std::span<const double> row_weights = {}) {
  detail::check_rows(d, row_weights);
  const auto m = detail::column_moments(d, row_weights);
  const std::size_t p = d.cols();
  CorrelationMatrix c{d.labels, d.labels, Matrix::identity(p), true};
  for (std::size_t j = 0; j < p; ++j)
    for (std::size_t k = j + 1; k < p; ++k) {
      double s = 0.0;
      for (std::size_t i = 0; i < d.rows(); ++i)
        s += (row_weights.empty() ? 1.0 : row_weights[i]) * (d.cells(i, j) - m.mean[j]) * (d.cells(i, k) - m.mean[k]);
      c.cells(j, k) = c.cells(k, j) = std::clamp(s / std::sqrt(m.ss[j] * m.ss[k]), -1.0, 1.0);
    }
  return c;
}

/// C_jk = correlation of value column j with behavior column k.
inline CorrelationMatrix value_behavior_matrix(const DataMatrix& v, const DataMatrix& b,
                                               std::span<const double> row_weights = {}) {
  if (v.rows() != b.rows())
    fail(Errc::RowCountMismatch, std::to_string(v.rows()) + " value rows vs " + std::to_string(b.rows()));
  detail::check_rows(v, row_weights);
  const auto mv = detail::column_moments(v, row_weights);
  const auto mb = detail::column_moments(b, row_weights);
  CorrelationMatrix c{v.labels, b.labels, Matrix(v.cols(), b.cols()), false};
  for (std::size_t j = 0; j < v.cols(); ++j)
    for (std::size_t k = 0; k < b.cols(); ++k) {
      double s = 0.0;
      for (std::size_t i = 0; i < v.rows(); ++i)
        s += (row_weights.empty() ? 1.0 : row_weights[i]) * (v.cells(i, j) - mv.mean[j]) * (b.cells(i, k) - mb.mean[k]);
      c.cells(j, k) = std::clamp(s / std::sqrt(mv.ss[j] * mb.ss[k]), -1.0, 1.0);
    }
  return c;
}

/// Row-major flattening; symmetric matrices contribute their strict upper
/// triangle only when `upper_only` is set.
inline std::vector<double> vectorize(const CorrelationMatrix& c, bool upper_only) {
  std::vector<double> out;
  for (std::size_t i = 0; i < c.rows(); ++i)
    for (std::size_t j = upper_only ? i + 1 : 0; j < c.cols(); ++j) out.push_back(c.cells(i, j));
  return out;
}

inline void require_same_layout(const CorrelationMatrix& a, const CorrelationMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    fail(Errc::ShapeMismatch, std::to_string(a.rows()) + "x" + std::to_string(a.cols()) + " vs " +
                                  std::to_string(b.rows()) + "x" + std::to_string(b.cols()));
  if (a.row_labels != b.row_labels || a.col_labels != b.col_labels)
    fail(Errc::LabelMismatch, "matrices label their axes differently");
}

/// Behavior similarity: Pearson correlation of the row-major vectorized matrices.
inline double behavior_score(const CorrelationMatrix& human, const CorrelationMatrix& model) {
  require_same_layout(human, model);
  return pearson(vectorize(human, false), vectorize(model, false));
}

/// Vectorized-matrix correlation used for bootstrap and per-prime scores.
/// Symmetric matrices compare off-diagonal entries only, since a shared unit
/// diagonal would inflate the correlation.
inline double matrix_similarity(const CorrelationMatrix& human, const CorrelationMatrix& model) {
  require_same_layout(human, model);
  const bool upper = human.symmetric && model.symmetric;
  return pearson(vectorize(human, upper), vectorize(model, upper));
}

struct StructureOptions {
  DissimilarityTransform transform = DissimilarityTransform::OneMinusR;
  ProcrustesOptions procrustes;
};

struct StructureComparison {
  double score = 0.0;
  ProcrustesResult alignment;
  Embedding human;
  Embedding model;
};

/// S_V: embed both correlation matrices with classical MDS, align the model
/// map onto the human map, report 1 - disparity.
inline StructureComparison compare_structure(const CorrelationMatrix& human, const CorrelationMatrix& model,
                                             StructureOptions opts = {}) {
  if (!human.symmetric || !model.symmetric) fail(Errc::NotSymmetric, "value structure needs symmetric matrices");
  require_same_layout(human, model);
  StructureComparison out;
  out.human = classical_mds(corr_to_dissimilarity(human, opts.transform), 2);
  out.model = classical_mds(corr_to_dissimilarity(model, opts.transform), 2);
  out.alignment = procrustes(out.human, out.model, opts.procrustes);
  out.score = 1.0 - out.alignment.disparity;
  return out;
}

inline double structure_score(const CorrelationMatrix& human, const CorrelationMatrix& model,
                              StructureOptions opts = {}) {
  return compare_structure(human, model, opts).score;
}

// ---------------------------------------------------------------------------
// Bootstrap

enum class ComparisonKind { Structure, Behavior };

struct BootstrapOptions {
  std::size_t iterations = 100;
  std::size_t sample_size = 500;
  std::uint64_t seed = 0;
};

struct BootstrapReport {
  std::size_t iterations = 0;
  std::size_t sample_size = 0;
  std::vector<double> correlations;
  double mean_r = 0.0;
  double t_statistic = 0.0;
  double p_value = 1.0;
  std::uint64_t seed = 0;
  bool degenerate = false;
};

/// Builds value (and behavior) data matrices for a drawn sample.
template <RespondentSource Pool>
std::pair<DataMatrix, DataMatrix> materialize(const Pool& pool, const std::vector<Draw>& draws) {
  const std::size_t nv = pool.value_labels().size(), nb = pool.behavior_labels().size();
  Matrix v(draws.size(), nv), b(draws.size(), nb);
  for (std::size_t i = 0; i < draws.size(); ++i) {
    const Respondent& r = pool.at(draws[i].slot, draws[i].index);
    for (std::size_t j = 0; j < nv; ++j) v(i, j) = r.values[j];
    for (std::size_t j = 0; j < nb; ++j) b(i, j) = r.behaviors[j];
  }
  return {DataMatrix(pool.value_labels(), std::move(v)), DataMatrix(pool.behavior_labels(), std::move(b))};
}

/// One-sample t test of the mean against zero, two-sided.
inline void summarize_bootstrap(BootstrapReport& rep) {
  const double n = static_cast<double>(rep.correlations.size());
  rep.mean_r = std::accumulate(rep.correlations.begin(), rep.correlations.end(), 0.0) / n;
  double ss = 0.0;
  for (double r : rep.correlations) ss += (r - rep.mean_r) * (r - rep.mean_r);
  const double sd = n > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
  const auto [lo, hi] = std::minmax_element(rep.correlations.begin(), rep.correlations.end());
  if (sd == 0.0 || *lo == *hi) {
    rep.degenerate = true;
    if (*lo == *hi) rep.mean_r = *lo;
    rep.t_statistic = rep.mean_r == 0.0 ? 0.0 : std::copysign(INFINITY, rep.mean_r);
    rep.p_value = rep.mean_r == 0.0 ? 1.0 : 0.0;
    return;
  }
  rep.t_statistic = rep.mean_r / (sd / std::sqrt(n));
  rep.p_value = t_two_sided_p(rep.t_statistic, n - 1.0);
}

/// Per iteration: draw a population, build its correlation matrix and
/// correlate it (vectorized) with the human reference.
template <RespondentSource Pool>
BootstrapReport bootstrap_similarity(const Pool& pool, const PopulationWeights& weights,
                                     const CorrelationMatrix& human_ref, ComparisonKind kind,
                                     BootstrapOptions opts = {}) {
  if (opts.iterations < 2) fail(Errc::InvalidArgument, "bootstrap needs at least 2 iterations");
  BootstrapReport rep;
  rep.iterations = opts.iterations;
  rep.sample_size = opts.sample_size;
  rep.seed = opts.seed;
  rep.correlations.reserve(opts.iterations);
  for (std::size_t it = 0; it < opts.iterations; ++it) {
    const auto draws = sample_population(weights, pool, opts.sample_size, derive_seed(opts.seed, it));
    const auto [v, b] = materialize(pool, draws);
    const CorrelationMatrix model =
        kind == ComparisonKind::Structure ? corr_matrix(v) : value_behavior_matrix(v, b);
    rep.correlations.push_back(matrix_similarity(human_ref, model));
  }
  summarize_bootstrap(rep);
  return rep;
}

}  // namespace valuesim
