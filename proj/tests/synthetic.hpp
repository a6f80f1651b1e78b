#pragma once

// Generators with a known answer, shared by the unit tests and the
// acceptance binary.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "valuesim/valuesim.hpp"

namespace synthetic {

using namespace valuesim;

/// Pool of i.i.d. standard-normal respondents, addressed by a counter so it
/// can be arbitrarily large without storage. Every draw is a fresh respondent,
/// which is what a no-structure null needs.
class NoisePool {
 public:
  NoisePool(std::uint64_t seed, std::size_t n_behaviors = 0)
      : seed_(seed), values_(valuesim::value_labels()) {
    for (std::size_t b = 0; b < n_behaviors; ++b) behaviors_.push_back("b" + std::to_string(b));
  }

  std::size_t size(std::size_t) const noexcept { return std::size_t{1} << 48; }
  Respondent at(std::size_t slot, std::size_t i) const {
    const std::uint64_t key = derive_seed(derive_seed(seed_, slot), static_cast<std::uint64_t>(i));
    Respondent r;
    std::uint64_t k = 0;
    for (std::size_t j = 0; j < values_.size(); ++j) r.values.push_back(counter_gaussian(key + k++));
    for (std::size_t j = 0; j < behaviors_.size(); ++j) r.behaviors.push_back(counter_gaussian(key + k++));
    return r;
  }
  const std::vector<std::string>& value_labels() const noexcept { return values_; }
  const std::vector<std::string>& behavior_labels() const noexcept { return behaviors_; }

 private:
  std::uint64_t seed_;
  std::vector<std::string> values_, behaviors_;
};

/// N x 10 scores whose population correlation is cos(theta_j - theta_k)/(1+s^2):
/// v_j = cos(theta_j) a + sin(theta_j) b + s e_j.
inline DataMatrix circumplex_data(std::size_t n, std::uint64_t seed, double noise = 0.1) {
  Rng rng(seed);
  Matrix m(n, kValueCount);
  for (std::size_t i = 0; i < n; ++i) {
    const double a = rng.gaussian(), b = rng.gaussian();
    for (ValueId v : kAllValues) {
      const double th = circle_angle(v);
      m(i, index_of(v)) = std::cos(th) * a + std::sin(th) * b + noise * rng.gaussian();
    }
  }
  return DataMatrix(valuesim::value_labels(), std::move(m));
}

struct LoadingsScenario {
  CorrelationMatrix loadings;  // 10 x B, the planted L
  DataMatrix values;
  DataMatrix behaviors;
};

/// Independent value scores v and behaviors b = v L + e, with |L| in
/// [0.3, 1] and a random sign per cell.
inline LoadingsScenario planted_loadings(std::size_t n, std::size_t n_behaviors, std::uint64_t seed,
                                         double noise = 1.0) {
  Rng rng(seed);
  std::vector<std::string> blabels;
  for (std::size_t k = 0; k < n_behaviors; ++k) blabels.push_back("behavior-" + std::to_string(k));
  Matrix l(kValueCount, n_behaviors);
  for (std::size_t j = 0; j < kValueCount; ++j)
    for (std::size_t k = 0; k < n_behaviors; ++k)
      l(j, k) = (rng.uniform() < 0.5 ? -1.0 : 1.0) * (0.3 + 0.7 * rng.uniform());
  Matrix v(n, kValueCount), b(n, n_behaviors);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < kValueCount; ++j) v(i, j) = rng.gaussian();
    for (std::size_t k = 0; k < n_behaviors; ++k) {
      double s = noise * rng.gaussian();
      for (std::size_t j = 0; j < kValueCount; ++j) s += v(i, j) * l(j, k);
      b(i, k) = s;
    }
  }
  return {CorrelationMatrix{valuesim::value_labels(), blabels, std::move(l), false},
          DataMatrix(valuesim::value_labels(), std::move(v)), DataMatrix(blabels, std::move(b))};
}

/// Share of cells whose signs agree.
inline double sign_agreement(const Matrix& a, const Matrix& b) {
  std::size_t same = 0;
  for (std::size_t i = 0; i < a.data().size(); ++i) same += (a.data()[i] > 0) == (b.data()[i] > 0);
  return static_cast<double>(same) / static_cast<double>(a.data().size());
}

/// True when the embedded points, read by polar angle, visit the values in
/// circle order (either direction, any starting point).
inline bool preserves_circular_order(const Matrix& points) {
  std::vector<std::pair<double, std::size_t>> by_angle;
  double cx = 0, cy = 0;
  for (std::size_t i = 0; i < points.rows(); ++i) cx += points(i, 0), cy += points(i, 1);
  cx /= points.rows(), cy /= points.rows();
  for (std::size_t i = 0; i < points.rows(); ++i)
    by_angle.emplace_back(std::atan2(points(i, 1) - cy, points(i, 0) - cx), i);
  std::sort(by_angle.begin(), by_angle.end());
  const std::size_t n = by_angle.size();
  bool forward = true, backward = true;
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t a = by_angle[k].second, b = by_angle[(k + 1) % n].second;
    forward = forward && b == (a + 1) % n;
    backward = backward && a == (b + 1) % n;
  }
  return forward || backward;
}

}  // namespace synthetic
