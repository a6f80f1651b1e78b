#pragma once

#include <array>
#include <fstream>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "valuesim/digest.hpp"
#include "valuesim/error.hpp"
#include "valuesim/questionnaire.hpp"
#include "valuesim/values.hpp"

namespace valuesim {

inline constexpr std::array<std::string_view, kValueCount> kValuePrompts = {
    "Imagine that you are a person who greatly values power. You value social status and prestige, and "
    "control or dominance over people and resources.",
    "Imagine that you are a person who greatly values achievement. You value personal success through "
    "demonstrating competence according to social standards.",
    "Imagine that you are a person who greatly values hedonism. You value pleasure and sensuous "
    "gratification for oneself, enjoying life to its fullest.",
    "Imagine that you are a person who greatly values stimulation. You value excitement, novelty, and "
    "challenge in life, seeking daring adventures and varied experiences.",
    "Imagine that you are a person who greatly values self-direction. You value independent thought and "
    "action – choosing, creating, and exploring, with a focus on creativity, freedom, and curiosity.",
    "Imagine that you are a person who greatly values universalism. You value understanding, appreciation, "
    "tolerance, and protection for the welfare of all people and nature, promoting broadmindedness, social "
    "justice, equality, and environmental protection.",
    "Imagine that you are a person who greatly values benevolence. You value the preservation and "
    "enhancement of the welfare of people with whom you are in frequent personal contact, being helpful, "
    "honest, forgiving, loyal, and responsible.",
    "Imagine that you are a person who greatly values tradition. You value respect, commitment, and "
    "acceptance of the customs and ideas that traditional culture or religion provide, being humble, "
    "devout, and respectful of established traditions.",
    "Imagine that you are a person who greatly values conformity. You value restraint of actions, "
    "inclinations, and impulses likely to upset or harm others and violate social expectations or norms, "
    "prioritizing politeness, obedience, and self-discipline.",
    "Imagine that you are a person who greatly values security. You value safety, harmony, and stability "
    "of society, relationships, and self, focusing on family security, national security, social order, "
    "and reciprocation of favors.",
};

inline constexpr std::string_view kTranscriptHeader = "Here is a questionnaire you previously completed:";

inline std::string_view value_prompt(ValueId v) noexcept { return kValuePrompts[index_of(v)]; }

// ---------------------------------------------------------------------------
// Higher-order grouping

/// Where Hedonism goes. It sits between Openness to Change and
/// Self-Enhancement on the circle; `Split` gives half weight to each.
enum class HedonismPolicy { Split, OpennessToChange, SelfEnhancement };

struct HigherOrderMembership {
  std::vector<HigherOrderValue> groups;
  std::vector<double> weights;  // parallel to groups, sums to 1
};

inline HigherOrderMembership higher_order(ValueId v, HedonismPolicy policy = HedonismPolicy::Split) {
  using H = HigherOrderValue;
  switch (v) {
    case ValueId::SelfDirection:
    case ValueId::Stimulation:
      return {{H::OpennessToChange}, {1.0}};
    case ValueId::Power:
    case ValueId::Achievement:
      return {{H::SelfEnhancement}, {1.0}};
    case ValueId::Universalism:
    case ValueId::Benevolence:
      return {{H::SelfTranscendence}, {1.0}};
    case ValueId::Tradition:
    case ValueId::Conformity:
    case ValueId::Security:
      return {{H::Conservation}, {1.0}};
    case ValueId::Hedonism:
      switch (policy) {
        case HedonismPolicy::Split: return {{H::OpennessToChange, H::SelfEnhancement}, {0.5, 0.5}};
        case HedonismPolicy::OpennessToChange: return {{H::OpennessToChange}, {1.0}};
        case HedonismPolicy::SelfEnhancement: return {{H::SelfEnhancement}, {1.0}};
      }
  }
  return {};
}

/// Row-normalized 4x10 averaging matrix: row h holds the weight of each value
/// in the mean that forms higher-order value h.
inline std::array<std::array<double, kValueCount>, kHigherOrderCount> higher_order_weights(
    HedonismPolicy policy = HedonismPolicy::Split) {
  std::array<std::array<double, kValueCount>, kHigherOrderCount> w{};
  for (ValueId v : kAllValues) {
    auto m = higher_order(v, policy);
    for (std::size_t i = 0; i < m.groups.size(); ++i) w[index_of(m.groups[i])][index_of(v)] += m.weights[i];
  }
  for (auto& row : w) {
    double total = 0.0;
    for (double x : row) total += x;
    for (double& x : row) x /= total;
  }
  return w;
}

// ---------------------------------------------------------------------------
// Priming conditions

struct PrimingOnly {
  ValueId value;
};
struct TestOnly {
  std::string transcript;
  /// Prime whose answers filled the transcript; bookkeeping only, never rendered.
  std::optional<ValueId> source;
};
struct PrimingAndTest {
  ValueId value;
  std::string transcript;
};
struct Unprimed {};

using PrimingCondition = std::variant<PrimingOnly, TestOnly, PrimingAndTest, Unprimed>;

enum class ConditionKind { PrimingOnly, TestOnly, PrimingAndTest, Unprimed };

inline constexpr std::string_view condition_kind_name(ConditionKind k) noexcept {
  switch (k) {
    case ConditionKind::PrimingOnly: return "priming-only";
    case ConditionKind::TestOnly: return "test-only";
    case ConditionKind::PrimingAndTest: return "priming-and-test";
    case ConditionKind::Unprimed: return "unprimed";
  }
  return "";
}

inline std::optional<ConditionKind> parse_condition_kind(std::string_view s) {
  for (auto k : {ConditionKind::PrimingOnly, ConditionKind::TestOnly, ConditionKind::PrimingAndTest,
                 ConditionKind::Unprimed})
    if (condition_kind_name(k) == s) return k;
  return std::nullopt;
}

inline ConditionKind kind_of(const PrimingCondition& c) noexcept { return static_cast<ConditionKind>(c.index()); }

/// The value a condition attributes its answers to, if any.
inline std::optional<ValueId> prime_of(const PrimingCondition& c) {
  if (auto* p = std::get_if<PrimingOnly>(&c)) return p->value;
  if (auto* p = std::get_if<PrimingAndTest>(&c)) return p->value;
  if (auto* p = std::get_if<TestOnly>(&c)) return p->source;
  return std::nullopt;
}

/// Compact identity stored with responses, e.g. "priming-only:power" or "unprimed".
struct ConditionDescriptor {
  ConditionKind kind = ConditionKind::Unprimed;
  std::optional<ValueId> prime;

  std::string str() const {
    std::string s(condition_kind_name(kind));
    if (prime) (s += ':') += value_name(*prime);
    return s;
  }
  bool operator==(const ConditionDescriptor&) const = default;
};

inline ConditionDescriptor describe(const PrimingCondition& c) { return {kind_of(c), prime_of(c)}; }

inline std::optional<ConditionDescriptor> parse_descriptor(std::string_view s) {
  auto colon = s.find(':');
  auto kind = parse_condition_kind(s.substr(0, colon));
  if (!kind) return std::nullopt;
  ConditionDescriptor d{*kind, std::nullopt};
  if (colon != std::string_view::npos) {
    d.prime = parse_value(s.substr(colon + 1));
    if (!d.prime) return std::nullopt;
  }
  return d;
}

// ---------------------------------------------------------------------------
// Prompt assembly

enum class ResponseFormat { LikertDigit, YesNo };

inline constexpr std::string_view format_name(ResponseFormat f) noexcept {
  return f == ResponseFormat::LikertDigit ? "likert" : "yes_no";
}

/// Overridable prompt strings. `likert_instruction` may use {min} and {max}.
struct PromptConfig {
  std::array<std::string, kValueCount> value_prompts = [] {
    std::array<std::string, kValueCount> a;
    for (ValueId v : kAllValues) a[index_of(v)] = std::string(value_prompt(v));
    return a;
  }();
  std::string likert_instruction = "Answer with a single number from {min} to {max}.";
  std::string yes_no_instruction = "Answer Yes or No.";
};

/// Reads `{"values": {"power": "...", ...}, "instructions": {"likert": "...", "yes_no": "..."}}`.
/// Absent keys keep their defaults.
inline PromptConfig load_prompt_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Errc::IoError, "cannot open prompt config '" + path + "'");
  PromptConfig cfg;
  try {
    auto doc = nlohmann::json::parse(in);
    if (doc.contains("values"))
      for (const auto& [k, v] : doc.at("values").items()) {
        auto id = parse_value(k);
        if (!id) fail(Errc::MalformedDocument, path + ": unknown value '" + k + "'");
        cfg.value_prompts[index_of(*id)] = v.get<std::string>();
      }
    if (doc.contains("instructions")) {
      const auto& ins = doc.at("instructions");
      cfg.likert_instruction = ins.value("likert", cfg.likert_instruction);
      cfg.yes_no_instruction = ins.value("yes_no", cfg.yes_no_instruction);
    }
  } catch (const nlohmann::json::exception& e) {
    fail(Errc::MalformedDocument, path + ": " + e.what());
  }
  return cfg;
}

struct AssembledPrompt {
  std::string text;
  PrimingCondition condition;
  std::string item_id;
  ResponseFormat response_format = ResponseFormat::LikertDigit;
  std::string content_hash;
  // Scoring metadata carried alongside; not part of the hash.
  std::string construct;
  LikertScale scale;
  bool reverse_keyed = false;
};

inline std::string prompt_digest(std::string_view text, ResponseFormat format) {
  std::string keyed(format_name(format));
  keyed += '\n';
  keyed += text;
  return sha256_hex(keyed);
}

namespace detail {
inline void replace_all(std::string& s, std::string_view from, std::string_view to) {
  for (std::size_t pos = 0; (pos = s.find(from, pos)) != std::string::npos; pos += to.size())
    s.replace(pos, from.size(), to);
}

inline std::string render_item(const Item& item, const LikertScale& scale, ResponseFormat format) {
  std::string out = item.text;
  if (format == ResponseFormat::LikertDigit && !scale.anchors.empty()) {
    out += "\n(";
    bool first = true;
    for (const auto& [k, label] : scale.anchors) {
      if (!first) out += ", ";
      out += std::to_string(k) + " = " + label;
      first = false;
    }
    out += ")";
  }
  return out;
}
}  // namespace detail

inline std::string format_instruction(ResponseFormat format, const LikertScale& scale, const PromptConfig& cfg) {
  if (format == ResponseFormat::YesNo) return cfg.yes_no_instruction;
  std::string s = cfg.likert_instruction;
  detail::replace_all(s, "{min}", std::to_string(scale.min));
  detail::replace_all(s, "{max}", std::to_string(scale.max));
  return s;
}

inline AssembledPrompt assemble(const PrimingCondition& condition, const Item& item, const LikertScale& scale,
                                ResponseFormat format, const PromptConfig& cfg = {}) {
  if (item.text.empty()) fail(Errc::InvalidArgument, "item '" + item.id + "' has empty text");
  std::vector<std::string_view> parts;
  std::visit(
      [&](const auto& c) {
        using T = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<T, PrimingOnly>) {
          parts.push_back(cfg.value_prompts[index_of(c.value)]);
        } else if constexpr (std::is_same_v<T, TestOnly>) {
          parts.push_back(c.transcript);
        } else if constexpr (std::is_same_v<T, PrimingAndTest>) {
          parts.push_back(cfg.value_prompts[index_of(c.value)]);
          parts.push_back(c.transcript);
        }
      },
      condition);
  const std::string rendered = detail::render_item(item, scale, format);
  const std::string instruction = format_instruction(format, scale, cfg);
  parts.push_back(rendered);
  parts.push_back(instruction);

  AssembledPrompt p;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) p.text += "\n\n";
    p.text += parts[i];
  }
  p.condition = condition;
  p.item_id = item.id;
  p.response_format = format;
  p.content_hash = prompt_digest(p.text, format);
  p.construct = item.construct;
  p.scale = scale;
  p.reverse_keyed = item.reverse_keyed;
  return p;
}

/// Questionnaire order, one "<item text> Rating: <r>" line per item.
inline std::string render_filled_pvq(const Questionnaire& q, const Answers& answers) {
  std::string out(kTranscriptHeader);
  for (const auto& item : q.items) {
    auto it = answers.find(item.id);
    if (it == answers.end()) fail(Errc::IncompleteAnswers, "no answer for item '" + item.id + "'");
    out += '\n';
    out += item.text;
    out += " Rating: ";
    out += std::to_string(it->second);
  }
  return out;
}

}  // namespace valuesim
