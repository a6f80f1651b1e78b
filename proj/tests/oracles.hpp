#pragma once

// Independent reference implementations used only by the tests: high
// precision arithmetic (Boost.Multiprecision), adaptive quadrature
// (Boost.Math) and dense linear algebra (Eigen).

#include <cmath>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>

namespace oracle {

using big = boost::multiprecision::cpp_bin_float_50;

/// Single-pass textbook formula evaluated in 50 significant digits.
inline double pearson(const std::vector<double>& x, const std::vector<double>& y) {
  big n = static_cast<double>(x.size()), sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const big a = x[i], b = y[i];
    sx += a;
    sy += b;
    sxx += a * a;
    syy += b * b;
    sxy += a * b;
  }
  const big num = n * sxy - sx * sy;
  const big den = sqrt((n * sxx - sx * sx) * (n * syy - sy * sy));
  return static_cast<double>(num / den);
}

/// Student t CDF by adaptive Gauss-Kronrod integration of the density.
inline double t_cdf(double t, double df) {
  using ld = long double;
  const ld nu = df;
  const ld log_norm = std::lgamma((nu + 1) / 2) - std::lgamma(nu / 2) - 0.5L * std::log(nu * M_PIl);
  auto pdf = [&](ld x) { return std::exp(log_norm - (nu + 1) / 2 * std::log1p(x * x / nu)); };
  const ld a = std::fabs(static_cast<ld>(t));
  ld half = 0;
  // Split the range so each panel stays well resolved for heavy tails.
  ld lo = 0;
  while (lo < a) {
    const ld hi = std::min(a, lo == 0 ? 1.0L : lo * 2);
    half += boost::math::quadrature::gauss_kronrod<ld, 61>::integrate(pdf, lo, hi, 12, 1e-17L);
    lo = hi;
  }
  const ld cdf = t >= 0 ? 0.5L + half : 0.5L - half;
  return static_cast<double>(cdf);
}

/// Normalized orthogonal Procrustes disparity via a full SVD.
inline double procrustes_disparity(const Eigen::MatrixXd& ref, const Eigen::MatrixXd& target, bool reflections) {
  auto normalize = [](Eigen::MatrixXd m) {
    m.rowwise() -= m.colwise().mean();
    m /= m.norm();
    return m;
  };
  const Eigen::MatrixXd a = normalize(ref), b = normalize(target);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(b.transpose() * a, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const auto s = svd.singularValues();
  double trace = s.sum();
  if (!reflections && (svd.matrixU() * svd.matrixV().transpose()).determinant() < 0)
    trace = s.head(s.size() - 1).sum() - s(s.size() - 1);
  return 1.0 - trace * trace;
}

/// Classical scaling computed with Eigen's symmetric solver.
inline Eigen::MatrixXd classical_mds(const Eigen::MatrixXd& delta, int dim) {
  const Eigen::Index n = delta.rows();
  const Eigen::MatrixXd j = Eigen::MatrixXd::Identity(n, n) - Eigen::MatrixXd::Constant(n, n, 1.0 / n);
  const Eigen::MatrixXd b = -0.5 * j * delta.cwiseProduct(delta) * j;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(b);
  Eigen::MatrixXd out(n, dim);
  for (int k = 0; k < dim; ++k) {
    const Eigen::Index idx = n - 1 - k;  // ascending order from Eigen
    out.col(k) = es.eigenvectors().col(idx) * std::sqrt(std::max(0.0, es.eigenvalues()(idx)));
  }
  return out;
}

}  // namespace oracle
