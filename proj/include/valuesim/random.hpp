#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string_view>

namespace valuesim {

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t fnv1a64(std::string_view s) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Stream seed for a named purpose: master ⊕ hash(purpose), then mixed.
/// New purposes never shift the streams of existing ones.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::string_view purpose) noexcept {
  return splitmix64(master ^ fnv1a64(purpose));
}

constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) noexcept {
  return splitmix64(master ^ index);
}

constexpr double to_unit_interval(std::uint64_t x) noexcept {
  return static_cast<double>(x >> 11) * 0x1.0p-53;
}

/// Standard normal deviate addressed by a counter, so the same key always
/// yields the same draw regardless of call order.
inline double counter_gaussian(std::uint64_t key) noexcept {
  const std::uint64_t a = splitmix64(key);
  const std::uint64_t b = splitmix64(a ^ 0x5851f42d4c957f2dULL);
  const double u1 = 1.0 - to_unit_interval(a);  // (0, 1]
  const double u2 = to_unit_interval(b);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

/// Small deterministic generator (splitmix64 stream). Results are identical
/// across standard libraries, unlike the std distributions.
class Rng {
 public:
  explicit constexpr Rng(std::uint64_t seed) noexcept : state_(seed) {}

  constexpr std::uint64_t next() noexcept {
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  constexpr double uniform() noexcept { return to_unit_interval(next()); }

  /// Uniform integer in [0, n); n must be positive.
  std::uint64_t below(std::uint64_t n) noexcept {
    // Rejection keeps the draw unbiased.
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
      x = next();
    } while (x >= limit);
    return x % n;
  }

  double gaussian() noexcept { return counter_gaussian(next()); }

 private:
  std::uint64_t state_;
};

}  // namespace valuesim
