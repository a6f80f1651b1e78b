#pragma once

#include <array>
#include <cctype>
#include <cstddef>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>

namespace valuesim {

/// The ten basic values in circle order. The underlying integer is the
/// position on the circle and doubles as the row index of every
/// value-indexed matrix.
enum class ValueId : std::size_t {
  Power,
  Achievement,
  Hedonism,
  Stimulation,
  SelfDirection,
  Universalism,
  Benevolence,
  Tradition,
  Conformity,
  Security,
};

inline constexpr std::size_t kValueCount = 10;

inline constexpr std::array<ValueId, kValueCount> kAllValues = {
    ValueId::Power,        ValueId::Achievement,   ValueId::Hedonism,  ValueId::Stimulation,
    ValueId::SelfDirection, ValueId::Universalism, ValueId::Benevolence, ValueId::Tradition,
    ValueId::Conformity,   ValueId::Security,
};

enum class HigherOrderValue : std::size_t {
  SelfEnhancement,
  SelfTranscendence,
  OpennessToChange,
  Conservation,
};

inline constexpr std::size_t kHigherOrderCount = 4;

inline constexpr std::array<HigherOrderValue, kHigherOrderCount> kAllHigherOrder = {
    HigherOrderValue::SelfEnhancement, HigherOrderValue::SelfTranscendence,
    HigherOrderValue::OpennessToChange, HigherOrderValue::Conservation};

constexpr std::size_t index_of(ValueId v) noexcept { return static_cast<std::size_t>(v); }
constexpr std::size_t index_of(HigherOrderValue h) noexcept { return static_cast<std::size_t>(h); }

/// Canonical lowercase name, used in files and matrix labels.
constexpr std::string_view value_name(ValueId v) noexcept {
  constexpr std::array<std::string_view, kValueCount> names = {
      "power",        "achievement", "hedonism",  "stimulation", "self-direction",
      "universalism", "benevolence", "tradition", "conformity",  "security"};
  return names[index_of(v)];
}

constexpr std::string_view higher_order_name(HigherOrderValue h) noexcept {
  constexpr std::array<std::string_view, kHigherOrderCount> names = {
      "self-enhancement", "self-transcendence", "openness-to-change", "conservation"};
  return names[index_of(h)];
}

namespace detail {
inline std::string fold_name(std::string_view s) {
  std::string out;
  for (char c : s)
    if (std::isalnum(static_cast<unsigned char>(c)))
      out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  return out;
}
}  // namespace detail

/// Accepts "self-direction", "SelfDirection", "self_direction" alike.
inline std::optional<ValueId> parse_value(std::string_view s) {
  const std::string folded = detail::fold_name(s);
  for (ValueId v : kAllValues)
    if (detail::fold_name(value_name(v)) == folded) return v;
  return std::nullopt;
}

inline std::optional<HigherOrderValue> parse_higher_order(std::string_view s) {
  const std::string folded = detail::fold_name(s);
  for (HigherOrderValue h : kAllHigherOrder)
    if (detail::fold_name(higher_order_name(h)) == folded) return h;
  return std::nullopt;
}

/// Angle of a value on the circle, evenly spaced in canonical order.
constexpr double circle_angle(ValueId v) noexcept {
  return 2.0 * std::numbers::pi * static_cast<double>(index_of(v)) / static_cast<double>(kValueCount);
}

}  // namespace valuesim
