#pragma once

#include <array>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "valuesim/error.hpp"
#include "valuesim/random.hpp"
#include "valuesim/values.hpp"

namespace valuesim {

/// Pool slots: 0..9 are the value primes in circle order, 10 is unprimed.
inline constexpr std::size_t kPrimeSlots = kValueCount + 1;
inline constexpr std::size_t kUnprimedSlot = kValueCount;

inline std::string slot_name(std::size_t slot) {
  return slot == kUnprimedSlot ? std::string("unprimed") : std::string(value_name(kAllValues[slot]));
}

struct HumanPrior {
  std::array<double, kValueCount> p_dominant{};
  double p_none = 0.0;

  void validate() const {
    double total = p_none;
    if (!(p_none >= 0.0 && p_none <= 1.0)) fail(Errc::InvalidArgument, "p_none outside [0, 1]");
    for (double p : p_dominant) {
      if (!(p >= 0.0 && p <= 1.0)) fail(Errc::InvalidArgument, "dominant-value proportion outside [0, 1]");
      total += p;
    }
    if (std::abs(total - 1.0) > 1e-9) fail(Errc::InvalidArgument, "prior proportions sum to " + std::to_string(total));
  }
};

/// Illustrative prior: 53% without a dominant value, the rest split evenly.
/// Synthetic; substitute measured proportions for real studies.
inline HumanPrior synthetic_symmetric_prior() {
  HumanPrior p;
  p.p_none = 0.53;
  p.p_dominant.fill(0.047);
  return p;
}

inline HumanPrior prior_from_json(const nlohmann::json& doc) {
  HumanPrior p;
  try {
    for (const auto& [k, v] : doc.at("p_dominant").items()) {
      auto id = parse_value(k);
      if (!id) fail(Errc::MalformedDocument, "unknown value '" + k + "' in prior");
      p.p_dominant[index_of(*id)] = v.get<double>();
    }
    p.p_none = doc.at("p_none").get<double>();
  } catch (const nlohmann::json::exception& e) {
    fail(Errc::MalformedDocument, std::string("prior: ") + e.what());
  }
  p.validate();
  return p;
}

inline HumanPrior load_prior_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Errc::IoError, "cannot open prior '" + path + "'");
  try {
    return prior_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    fail(Errc::MalformedDocument, path + ": " + e.what());
  }
}

struct PopulationWeights {
  std::array<double, kValueCount> w{};
  double w_unprimed = 0.0;

  double slot(std::size_t s) const noexcept { return s == kUnprimedSlot ? w_unprimed : w[s]; }

  double total() const noexcept {
    double t = w_unprimed;
    for (double x : w) t += x;
    return t;
  }

  void validate() const {
    for (std::size_t s = 0; s < kPrimeSlots; ++s)
      if (!(slot(s) >= 0.0)) fail(Errc::InvalidArgument, "negative weight for " + slot_name(s));
    if (std::abs(total() - 1.0) > 1e-12) fail(Errc::InvalidArgument, "weights sum to " + std::to_string(total()));
  }
};

enum class Strategy { Uniform, HNorm, HEven, HNp, ModelSpecific };

inline constexpr std::array<Strategy, 5> kAllStrategies = {Strategy::Uniform, Strategy::HNorm, Strategy::HEven,
                                                           Strategy::HNp, Strategy::ModelSpecific};

constexpr std::string_view strategy_name(Strategy s) noexcept {
  switch (s) {
    case Strategy::Uniform: return "uniform";
    case Strategy::HNorm: return "h-norm";
    case Strategy::HEven: return "h-even";
    case Strategy::HNp: return "h-np";
    case Strategy::ModelSpecific: return "model-specific";
  }
  return "";
}

inline std::optional<Strategy> parse_strategy(std::string_view s) {
  for (Strategy st : kAllStrategies)
    if (strategy_name(st) == s) return st;
  return std::nullopt;
}

inline PopulationWeights uniform_weights() {
  PopulationWeights p;
  p.w.fill(0.1);
  return p;
}

inline PopulationWeights h_norm(const HumanPrior& prior) {
  prior.validate();
  if (prior.p_none >= 1.0) fail(Errc::DegeneratePrior, "no respondent has a dominant value");
  PopulationWeights p;
  const double dominant = 1.0 - prior.p_none;
  for (std::size_t v = 0; v < kValueCount; ++v) p.w[v] = prior.p_dominant[v] / dominant;
  return p;
}

inline PopulationWeights h_even(const HumanPrior& prior) {
  prior.validate();
  PopulationWeights p;
  for (std::size_t v = 0; v < kValueCount; ++v) p.w[v] = prior.p_dominant[v] + prior.p_none / 10.0;
  return p;
}

inline PopulationWeights h_np(const HumanPrior& prior) {
  prior.validate();
  PopulationWeights p;
  p.w = prior.p_dominant;
  p.w_unprimed = prior.p_none;
  return p;
}

/// Weights proportional to per-prime similarity scores, negatives clamped to 0.
inline PopulationWeights model_specific(const std::array<double, kValueCount>& scores) {
  double total = 0.0;
  for (double s : scores) {
    if (!std::isfinite(s)) fail(Errc::InvalidArgument, "model-specific score is not finite");
    total += std::max(s, 0.0);
  }
  if (total <= 0.0) fail(Errc::AllZeroScores, "every per-prime similarity score is non-positive");
  PopulationWeights p;
  for (std::size_t v = 0; v < kValueCount; ++v) p.w[v] = std::max(scores[v], 0.0) / total;
  return p;
}

// ---------------------------------------------------------------------------
// Respondent pools

struct Respondent {
  std::vector<double> values;     // one score per value construct
  std::vector<double> behaviors;  // one score per behavior construct
};

/// Anything that can hand out respondents by (slot, index).
template <typename P>
concept RespondentSource = requires(const P& p, std::size_t slot, std::size_t i) {
  { p.size(slot) } -> std::convertible_to<std::size_t>;
  { p.at(slot, i) } -> std::convertible_to<const Respondent&>;
  { p.value_labels() } -> std::convertible_to<const std::vector<std::string>&>;
  { p.behavior_labels() } -> std::convertible_to<const std::vector<std::string>&>;
};

/// Per-prime lists of scored respondents.
class RespondentPool {
 public:
  RespondentPool(std::vector<std::string> value_labels, std::vector<std::string> behavior_labels = {})
      : value_labels_(std::move(value_labels)), behavior_labels_(std::move(behavior_labels)) {}

  void add(std::size_t slot, Respondent r) {
    if (slot >= kPrimeSlots) fail(Errc::InvalidArgument, "pool slot out of range");
    if (r.values.size() != value_labels_.size() || r.behaviors.size() != behavior_labels_.size())
      fail(Errc::ShapeMismatch, "respondent does not cover the pool's constructs");
    slots_[slot].push_back(std::move(r));
  }

  std::size_t size(std::size_t slot) const { return slots_.at(slot).size(); }
  const Respondent& at(std::size_t slot, std::size_t i) const { return slots_.at(slot).at(i); }
  const std::vector<Respondent>& slot(std::size_t s) const { return slots_.at(s); }
  const std::vector<std::string>& value_labels() const noexcept { return value_labels_; }
  const std::vector<std::string>& behavior_labels() const noexcept { return behavior_labels_; }

 private:
  std::vector<std::string> value_labels_;
  std::vector<std::string> behavior_labels_;
  std::array<std::vector<Respondent>, kPrimeSlots> slots_;
};

struct Draw {
  std::size_t slot;
  std::size_t index;
  bool operator==(const Draw&) const = default;
};

/// n i.i.d. respondents: a slot by weight, then a member uniformly with
/// replacement.
template <RespondentSource Pool>
std::vector<Draw> sample_population(const PopulationWeights& weights, const Pool& pool, std::size_t n,
                                    std::uint64_t seed) {
  weights.validate();
  if (n < 1) fail(Errc::InvalidArgument, "population size must be at least 1");
  std::array<double, kPrimeSlots> cumulative{};
  double running = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t s = 0; s < kPrimeSlots; ++s) {
    const double w = weights.slot(s);
    if (w > 0.0) {
      if (pool.size(s) == 0) fail(Errc::EmptyPoolForWeightedPrime, "no respondents for " + slot_name(s));
      last_positive = s;
    }
    running += w;
    cumulative[s] = running;
  }
  Rng rng(seed);
  std::vector<Draw> out;
  out.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double u = rng.uniform() * running;
    std::size_t slot = last_positive;
    for (std::size_t s = 0; s < kPrimeSlots; ++s)
      if (weights.slot(s) > 0.0 && u < cumulative[s]) {
        slot = s;
        break;
      }
    out.push_back({slot, static_cast<std::size_t>(rng.below(pool.size(slot)))});
  }
  return out;
}

}  // namespace valuesim
