#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>

#include "valuesim/error.hpp"
#include "valuesim/prompting.hpp"
#include "valuesim/random.hpp"

namespace valuesim {

/// Offline stand-in for a value-prompted model.
///
/// A sampled answer to an item of construct c on repeat r is
///
///   x = mean_rating[c] + latent_sd * (z1 cos a_c + z2 sin a_c) + noise_sd * e
///
/// rounded and clamped onto the item's scale (and reflected for reverse-keyed
/// items). e is keyed by (seed, content hash, repeat) and (z1, z2) by
/// (seed, repeat) only, so every item answered on the same repeat shares one
/// latent position. Constructs without an entry in `latent_angle` get no
/// latent term. With latent_sd = 0 the model is a plain per-item Gaussian.
struct MockPersona {
  std::map<std::string, double> mean_rating;
  double noise_sd = 0.0;
  std::uint64_t seed = 0;
  double latent_sd = 0.0;
  std::map<std::string, double> latent_angle;
  std::map<std::string, double> construct_noise_sd;  // overrides noise_sd per construct
};

inline double mock_sample(const MockPersona& persona, const AssembledPrompt& prompt, std::uint64_t repeat_index) {
  auto mean = persona.mean_rating.find(prompt.construct);
  if (mean == persona.mean_rating.end())
    fail(Errc::UnknownConstruct, "mock persona has no mean for '" + prompt.construct + "'");
  const std::uint64_t repeat_key = splitmix64(repeat_index + 0x632be59bd9b4e019ULL);
  double x = mean->second;
  auto own_noise = persona.construct_noise_sd.find(prompt.construct);
  const double noise_sd = own_noise == persona.construct_noise_sd.end() ? persona.noise_sd : own_noise->second;
  if (noise_sd > 0.0)
    x += noise_sd * counter_gaussian(persona.seed ^ fnv1a64(prompt.content_hash) ^ repeat_key);
  if (persona.latent_sd > 0.0) {
    auto angle = persona.latent_angle.find(prompt.construct);
    if (angle != persona.latent_angle.end()) {
      const double z1 = counter_gaussian(persona.seed ^ repeat_key ^ 0x1111111111111111ULL);
      const double z2 = counter_gaussian(persona.seed ^ repeat_key ^ 0x2222222222222222ULL);
      x += persona.latent_sd * (z1 * std::cos(angle->second) + z2 * std::sin(angle->second));
    }
  }
  return x;
}

inline std::string mock_complete(const MockPersona& persona, const AssembledPrompt& prompt,
                                 std::uint64_t repeat_index) {
  const double x = mock_sample(persona, prompt, repeat_index);
  const LikertScale& s = prompt.scale;
  if (prompt.response_format == ResponseFormat::YesNo) {
    const bool endorse = x >= s.midpoint();
    return (endorse != prompt.reverse_keyed) ? "Yes" : "No";
  }
  int rating = static_cast<int>(std::lround(std::clamp(x, double(s.min), double(s.max))));
  if (prompt.reverse_keyed) rating = s.min + s.max - rating;
  return std::to_string(rating);
}

}  // namespace valuesim
