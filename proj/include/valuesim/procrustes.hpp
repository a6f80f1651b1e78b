#pragma once

#include <algorithm>
#include <array>
#include <cmath>

#include "valuesim/error.hpp"
#include "valuesim/matrix.hpp"
#include "valuesim/mds.hpp"

namespace valuesim {

struct ProcrustesOptions {
  /// Search the full orthogonal group. When false only proper rotations count.
  bool allow_reflection = true;
};

/// Similarity transform p -> scale * rotation * p + translation that maps the
/// target configuration onto the reference, plus the normalized residual.
struct ProcrustesResult {
  Matrix rotation = Matrix::identity(2);
  double scale = 1.0;
  std::array<double, 2> translation{0.0, 0.0};
  double disparity = 0.0;
  bool reflected = false;
};

namespace detail {
struct Normalized {
  Matrix points;
  std::array<double, 2> centroid;
  double norm;
};

inline Normalized center_and_scale(const Matrix& x) {
  const std::size_t n = x.rows();
  Normalized out{x, {0.0, 0.0}, 0.0};
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < 2; ++k) out.centroid[k] += x(i, k);
  for (double& c : out.centroid) c /= static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < 2; ++k) out.points(i, k) -= out.centroid[k];
  out.norm = out.points.frobenius_norm();
  if (out.norm == 0.0) fail(Errc::DegenerateConfiguration, "all points coincide");
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < 2; ++k) out.points(i, k) /= out.norm;
  return out;
}
}  // namespace detail

/// Orthogonal Procrustes in the plane.
///
/// Both configurations are centered and scaled to unit Frobenius norm. With
/// A the reference and B the target, the best orthogonal R (acting on row
/// vectors) maximizes tr(R * A^T B). For a 2x2 M = A^T B that maximum has a
/// closed form: hypot(M00 + M11, M01 - M10) over rotations and
/// hypot(M00 - M11, M01 + M10) over reflections; the larger is the nuclear
/// norm of M and the optimal scale, and disparity = 1 - scale^2.
inline ProcrustesResult procrustes(const Embedding& reference, const Embedding& target, ProcrustesOptions opts = {}) {
  if (reference.points.rows() != target.points.rows() || reference.labels != target.labels)
    fail(Errc::LabelMismatch, "configurations must share point labels in the same order");
  if (reference.points.cols() != 2 || target.points.cols() != 2)
    fail(Errc::ShapeMismatch, "procrustes works on planar configurations");
  const auto a = detail::center_and_scale(reference.points);
  const auto b = detail::center_and_scale(target.points);

  double m[2][2] = {{0, 0}, {0, 0}};
  for (std::size_t i = 0; i < a.points.rows(); ++i)
    for (std::size_t r = 0; r < 2; ++r)
      for (std::size_t c = 0; c < 2; ++c) m[r][c] += a.points(i, r) * b.points(i, c);

  const double rot_trace = std::hypot(m[0][0] + m[1][1], m[0][1] - m[1][0]);
  const double ref_trace = std::hypot(m[0][0] - m[1][1], m[0][1] + m[1][0]);
  const bool reflect = opts.allow_reflection && ref_trace > rot_trace;

  // r acts on row vectors: mapped = b_row * r.
  double r[2][2];
  double trace;
  if (a.points == b.points) {
    // Same shape: the identity is exact, so skip the rounding of 1 - trace^2.
    r[0][0] = 1, r[0][1] = 0, r[1][0] = 0, r[1][1] = 1;
    trace = 1.0;
  } else if (reflect) {
    const double phi = std::atan2(m[0][1] + m[1][0], m[0][0] - m[1][1]);
    const double c = std::cos(phi), s = std::sin(phi);
    r[0][0] = c, r[0][1] = s, r[1][0] = s, r[1][1] = -c;
    trace = ref_trace;
  } else {
    const double phi = std::atan2(m[0][1] - m[1][0], m[0][0] + m[1][1]);
    const double c = std::cos(phi), s = std::sin(phi);
    r[0][0] = c, r[0][1] = -s, r[1][0] = s, r[1][1] = c;
    trace = rot_trace;
  }

  ProcrustesResult out;
  out.reflected = reflect && a.points != b.points;
  out.disparity = std::clamp(1.0 - trace * trace, 0.0, 1.0);
  out.scale = trace * a.norm / b.norm;
  // Column-vector form of the map is the transpose of r.
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 2; ++j) out.rotation(i, j) = r[j][i];
  for (std::size_t i = 0; i < 2; ++i)
    out.translation[i] =
        a.centroid[i] - out.scale * (out.rotation(i, 0) * b.centroid[0] + out.rotation(i, 1) * b.centroid[1]);
  return out;
}

/// Applies the fitted transform to a configuration.
inline Matrix apply_transform(const ProcrustesResult& t, const Matrix& points) {
  Matrix out(points.rows(), 2);
  for (std::size_t i = 0; i < points.rows(); ++i)
    for (std::size_t k = 0; k < 2; ++k)
      out(i, k) = t.scale * (t.rotation(k, 0) * points(i, 0) + t.rotation(k, 1) * points(i, 1)) + t.translation[k];
  return out;
}

}  // namespace valuesim
