#pragma once

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "valuesim/llm_client.hpp"
#include "valuesim/matrix.hpp"
#include "valuesim/persona_behavior.hpp"
#include "valuesim/questionnaire.hpp"
#include "valuesim/random.hpp"

// Synthetic scenarios with a known answer: mock personas whose pooled
// responses follow the value circle, and the reference matrices they imply.

namespace valuesim {

/// Angle a behavior construct sits at on the value circle in planted scenarios.
inline double planted_behavior_angle(const std::string& behavior) {
  return 2.0 * std::numbers::pi * static_cast<double>(fnv1a64(behavior) % 1000000ULL) / 1.0e6;
}

struct PlantedShape {
  double prime_amplitude = 0.24;  // fraction of the scale range
  double latent_sd = 0.16;
  double noise_sd = 0.16;
  double statement_amplitude = 0.35;
  double statement_noise = 0.25;
};

/// Personas for the ten primes and the unprimed pool. A v-primed persona
/// rates construct c at mid + A cos(angle_v - angle_c); the unprimed persona
/// sits at the midpoint. All share a respondent-level latent position on the
/// circle.
inline MockPersonaSet planted_circumplex_personas(const Questionnaire& values,
                                                  const std::vector<Questionnaire>& behaviors,
                                                  const std::vector<std::string>& statement_behaviors,
                                                  std::uint64_t seed, PlantedShape shape = {}) {
  const auto value_ids = value_constructs(values);
  MockPersonaSet set;
  for (std::size_t slot = 0; slot <= kValueCount; ++slot) {
    const bool primed = slot < kValueCount;
    const double prime_angle = primed ? circle_angle(kAllValues[slot]) : 0.0;
    MockPersona& p = set.at(primed ? std::optional<ValueId>(kAllValues[slot]) : std::nullopt);
    p.seed = derive_seed(seed, "mock-persona/" + std::to_string(slot));
    auto plant = [&](const std::string& construct, double angle, const LikertScale& scale) {
      const double range = scale.max - scale.min;
      p.mean_rating[construct] =
          scale.midpoint() + (primed ? shape.prime_amplitude * range * std::cos(prime_angle - angle) : 0.0);
      p.latent_angle[construct] = angle;
    };
    const double range = values.scale.max - values.scale.min;
    p.noise_sd = shape.noise_sd * range;
    p.latent_sd = shape.latent_sd * range;
    for (std::size_t k = 0; k < values.constructs.size(); ++k)
      plant(values.constructs[k], circle_angle(value_ids[k]), values.scale);
    for (const auto& q : behaviors)
      for (const auto& c : q.constructs) plant(c, planted_behavior_angle(c), q.scale);
    for (const auto& b : statement_behaviors)
      if (!p.mean_rating.count(b)) {
        p.mean_rating[b] =
            0.5 + (primed ? shape.statement_amplitude * std::cos(prime_angle - planted_behavior_angle(b)) : 0.0);
        p.construct_noise_sd[b] = shape.statement_noise;
      }
  }
  return set;
}

/// Reference value structure of the planted scenario: cos of angular distance.
inline CorrelationMatrix circumplex_reference() {
  CorrelationMatrix c{value_labels(), value_labels(), Matrix(kValueCount, kValueCount), true};
  for (ValueId a : kAllValues)
    for (ValueId b : kAllValues) c.cells(index_of(a), index_of(b)) = std::cos(circle_angle(a) - circle_angle(b));
  for (std::size_t i = 0; i < kValueCount; ++i) c.cells(i, i) = 1.0;
  return c;
}

/// Value-behavior reference of the planted scenario, up to a positive factor.
inline CorrelationMatrix planted_behavior_reference(const std::vector<std::string>& behavior_constructs) {
  CorrelationMatrix c{value_labels(), behavior_constructs, Matrix(kValueCount, behavior_constructs.size()), false};
  for (ValueId v : kAllValues)
    for (std::size_t b = 0; b < behavior_constructs.size(); ++b)
      c.cells(index_of(v), b) = std::cos(circle_angle(v) - planted_behavior_angle(behavior_constructs[b]));
  return c;
}

}  // namespace valuesim
