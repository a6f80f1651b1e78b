#pragma once

#include <algorithm>
#include <cstddef>
#include <fstream>
#include <istream>
#include <iterator>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "valuesim/error.hpp"
#include "valuesim/values.hpp"

namespace valuesim {

struct LikertScale {
  int min = 1;
  int max = 6;
  std::map<int, std::string> anchors;

  bool contains(int rating) const noexcept { return rating >= min && rating <= max; }
  double midpoint() const noexcept { return 0.5 * (min + max); }
  bool operator==(const LikertScale&) const = default;
};

struct Item {
  std::string id;
  std::string text;
  std::string construct;
  bool reverse_keyed = false;
};

struct Questionnaire {
  std::string name;
  LikertScale scale;
  std::vector<std::string> constructs;
  std::vector<Item> items;

  const Item* find_item(const std::string& id) const {
    auto it = std::find_if(items.begin(), items.end(), [&](const Item& i) { return i.id == id; });
    return it == items.end() ? nullptr : &*it;
  }
};

using Answers = std::map<std::string, int>;

struct ScoredProfile {
  std::map<std::string, double> construct_scores;
  std::map<std::string, std::size_t> n_items_used;

  /// Scores in the questionnaire's construct order; nullopt if any is missing.
  std::optional<std::vector<double>> ordered(const std::vector<std::string>& constructs) const {
    std::vector<double> out;
    out.reserve(constructs.size());
    for (const auto& c : constructs) {
      auto it = construct_scores.find(c);
      if (it == construct_scores.end()) return std::nullopt;
      out.push_back(it->second);
    }
    return out;
  }
};

struct ScoreOptions {
  /// Subtract the respondent's mean over constructs (the usual centering for value surveys).
  /// Off by default; centered scores are no longer bounded by the scale.
  bool ipsatize = false;
};

inline void validate_scale(const LikertScale& s) {
  if (s.min >= s.max)
    fail(Errc::ScaleBoundsInvalid,
         "scale min " + std::to_string(s.min) + " must be below max " + std::to_string(s.max));
  for (const auto& [k, _] : s.anchors)
    if (!s.contains(k)) fail(Errc::ScaleBoundsInvalid, "anchor " + std::to_string(k) + " outside scale");
}

inline void validate(const Questionnaire& q) {
  validate_scale(q.scale);
  std::set<std::string> constructs;
  for (const auto& c : q.constructs)
    if (!constructs.insert(c).second) fail(Errc::MalformedDocument, "duplicate construct '" + c + "'");
  std::set<std::string> ids;
  std::map<std::string, std::size_t> per_construct;
  for (const auto& item : q.items) {
    if (!ids.insert(item.id).second) fail(Errc::DuplicateItemId, "item id '" + item.id + "'");
    if (!constructs.count(item.construct))
      fail(Errc::UnknownConstruct, "item '" + item.id + "' references '" + item.construct + "'");
    ++per_construct[item.construct];
  }
  for (const auto& c : q.constructs)
    if (!per_construct.count(c)) fail(Errc::MalformedDocument, "construct '" + c + "' has no items");
}

/// A value instrument carries exactly the ten basic values as constructs.
/// Returns, per construct position, the value it measures.
inline std::vector<ValueId> value_constructs(const Questionnaire& q) {
  if (q.constructs.size() != kValueCount)
    fail(Errc::UnknownConstruct, "value instrument '" + q.name + "' needs exactly 10 constructs, has " +
                                     std::to_string(q.constructs.size()));
  std::vector<ValueId> out;
  std::set<ValueId> seen;
  for (const auto& c : q.constructs) {
    auto v = parse_value(c);
    if (!v) fail(Errc::UnknownConstruct, "'" + c + "' is not one of the ten values");
    if (!seen.insert(*v).second) fail(Errc::UnknownConstruct, "value '" + c + "' listed twice");
    out.push_back(*v);
  }
  return out;
}

inline Questionnaire questionnaire_from_json(const nlohmann::json& doc) {
  Questionnaire q;
  try {
    if (!doc.is_object()) fail(Errc::MalformedDocument, "questionnaire must be a JSON object");
    q.name = doc.at("name").get<std::string>();
    const auto& scale = doc.at("scale");
    q.scale.min = scale.at("min").get<int>();
    q.scale.max = scale.at("max").get<int>();
    if (scale.contains("anchors"))
      for (const auto& [k, v] : scale.at("anchors").items()) {
        std::size_t pos = 0;
        int key = std::stoi(k, &pos);
        if (pos != k.size()) fail(Errc::MalformedDocument, "anchor key '" + k + "' is not an integer");
        q.scale.anchors.emplace(key, v.get<std::string>());
      }
    q.constructs = doc.at("constructs").get<std::vector<std::string>>();
    for (const auto& it : doc.at("items")) {
      Item item;
      item.id = it.at("id").get<std::string>();
      item.text = it.at("text").get<std::string>();
      item.construct = it.at("construct").get<std::string>();
      item.reverse_keyed = it.value("reverse_keyed", false);
      q.items.push_back(std::move(item));
    }
  } catch (const nlohmann::json::exception& e) {
    fail(Errc::MalformedDocument, e.what());
  } catch (const std::invalid_argument& e) {
    fail(Errc::MalformedDocument, std::string("anchor key: ") + e.what());
  } catch (const std::out_of_range& e) {
    fail(Errc::MalformedDocument, std::string("anchor key: ") + e.what());
  }
  validate(q);
  return q;
}

inline Questionnaire load_questionnaire(std::istream& source) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(source);
  } catch (const nlohmann::json::parse_error& e) {
    fail(Errc::MalformedDocument, e.what());
  }
  return questionnaire_from_json(doc);
}

inline Questionnaire load_questionnaire_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Errc::IoError, "cannot open questionnaire '" + path + "'");
  try {
    return load_questionnaire(in);
  } catch (const Error& e) {
    throw Error(e.code(), path + ": " + e.what());
  }
}

inline nlohmann::json to_json(const Questionnaire& q) {
  nlohmann::json scale = {{"min", q.scale.min}, {"max", q.scale.max}};
  if (!q.scale.anchors.empty()) {
    nlohmann::json anchors = nlohmann::json::object();
    for (const auto& [k, v] : q.scale.anchors) anchors[std::to_string(k)] = v;
    scale["anchors"] = anchors;
  }
  nlohmann::json items = nlohmann::json::array();
  for (const auto& i : q.items)
    items.push_back({{"id", i.id}, {"text", i.text}, {"construct", i.construct}, {"reverse_keyed", i.reverse_keyed}});
  return {{"name", q.name}, {"scale", scale}, {"constructs", q.constructs}, {"items", items}};
}

inline int apply_reverse_key(int rating, const LikertScale& scale) {
  if (!scale.contains(rating))
    fail(Errc::RatingOutOfRange, std::to_string(rating) + " not in [" + std::to_string(scale.min) + ", " +
                                     std::to_string(scale.max) + "]");
  return scale.min + scale.max - rating;
}

/// Mean keyed rating per construct over the answered items. Constructs with
/// no answered item are left out of the profile.
inline ScoredProfile score_responses(const Questionnaire& q, const Answers& answers, ScoreOptions opts = {}) {
  std::unordered_map<std::string, const Item*> by_id;
  by_id.reserve(q.items.size());
  for (const auto& item : q.items) by_id.emplace(item.id, &item);

  std::map<std::string, double> sums;
  ScoredProfile out;
  for (const auto& [id, rating] : answers) {
    auto it = by_id.find(id);
    if (it == by_id.end()) fail(Errc::UnknownItemId, "'" + id + "' is not in '" + q.name + "'");
    if (!q.scale.contains(rating))
      fail(Errc::RatingOutOfRange, "item '" + id + "' rated " + std::to_string(rating));
    const Item& item = *it->second;
    sums[item.construct] += item.reverse_keyed ? apply_reverse_key(rating, q.scale) : rating;
    ++out.n_items_used[item.construct];
  }
  for (const auto& [c, sum] : sums)
    out.construct_scores[c] = sum / static_cast<double>(out.n_items_used[c]);

  if (opts.ipsatize && !out.construct_scores.empty()) {
    double mean = 0.0;
    for (const auto& [_, s] : out.construct_scores) mean += s;
    mean /= static_cast<double>(out.construct_scores.size());
    for (auto& [_, s] : out.construct_scores) s -= mean;
  }
  return out;
}

}  // namespace valuesim
