#pragma once

#include <cctype>
#include <optional>
#include <string>
#include <string_view>

#include "valuesim/error.hpp"
#include "valuesim/questionnaire.hpp"

namespace valuesim {

/// First integer token of `text` that lies on the scale.
inline int parse_likert(std::string_view text, const LikertScale& scale) {
  bool saw_integer = false;
  const std::size_t n = text.size();
  for (std::size_t i = 0; i < n;) {
    if (!std::isdigit(static_cast<unsigned char>(text[i]))) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < n && std::isdigit(static_cast<unsigned char>(text[j]))) ++j;
    const bool negative =
        i > 0 && text[i - 1] == '-' && (i < 2 || !std::isalnum(static_cast<unsigned char>(text[i - 2])));
    saw_integer = true;
    // Tokens longer than 9 digits cannot be on any sane scale.
    if (j - i <= 9) {
      int value = std::stoi(std::string(text.substr(i, j - i)));
      if (negative) value = -value;
      if (scale.contains(value)) return value;
    }
    i = j;
  }
  if (saw_integer) fail(Errc::OutOfRange, "no integer in [" + std::to_string(scale.min) + ", " +
                                              std::to_string(scale.max) + "] in '" + std::string(text) + "'");
  fail(Errc::NoParse, "no integer in '" + std::string(text) + "'");
}

/// A leading yes/no decides; otherwise the first standalone yes/no word wins.
inline bool parse_yes_no(std::string_view text) {
  auto lower = [](char c) { return static_cast<char>(std::tolower(static_cast<unsigned char>(c))); };
  auto is_word = [](char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; };
  const std::size_t n = text.size();
  for (std::size_t i = 0; i < n;) {
    if (!is_word(text[i])) {
      ++i;
      continue;
    }
    std::size_t j = i;
    std::string word;
    while (j < n && is_word(text[j])) word.push_back(lower(text[j++]));
    if (word == "yes") return true;
    if (word == "no") return false;
    i = j;
  }
  fail(Errc::NoParse, "neither yes nor no in '" + std::string(text) + "'");
}

}  // namespace valuesim
