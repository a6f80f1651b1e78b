#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "valuesim/alignment.hpp"
#include "valuesim/error.hpp"
#include "valuesim/prompting.hpp"
#include "valuesim/random.hpp"
#include "valuesim/response_store.hpp"
#include "valuesim/values.hpp"

namespace valuesim {

struct BehaviorStatement {
  std::string id;  // "<behavior_name>#<position in pool>"
  std::string behavior_name;
  std::string statement;
  bool agree_means_behavior = true;
  std::vector<std::string> tags;
};

/// Statements grouped by behavior, behaviors in first-seen order.
struct StatementPool {
  std::vector<std::string> behaviors;
  std::map<std::string, std::vector<BehaviorStatement>> by_behavior;

  void add(BehaviorStatement s) {
    if (s.statement.empty()) fail(Errc::MalformedDocument, "empty statement for '" + s.behavior_name + "'");
    auto& list = by_behavior[s.behavior_name];
    if (list.empty()) behaviors.push_back(s.behavior_name);
    s.id = s.behavior_name + "#" + std::to_string(list.size());
    list.push_back(std::move(s));
  }
};

inline StatementPool load_statements(std::istream& in, const std::string& origin = "<statements>") {
  StatementPool pool;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      auto j = nlohmann::json::parse(line);
      BehaviorStatement s;
      s.behavior_name = j.at("behavior_name").get<std::string>();
      s.statement = j.at("statement").get<std::string>();
      s.agree_means_behavior = j.at("agree_means_behavior").get<bool>();
      if (j.contains("tags")) s.tags = j.at("tags").get<std::vector<std::string>>();
      pool.add(std::move(s));
    } catch (const nlohmann::json::exception& e) {
      fail(Errc::MalformedDocument, origin + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return pool;
}

inline StatementPool load_statements_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Errc::IoError, "cannot open statement pool '" + path + "'");
  return load_statements(in, path);
}

inline constexpr std::size_t kDefaultStatementsPerBehavior = 50;

/// Up to n statements per behavior, without replacement, seeded per behavior.
inline std::vector<BehaviorStatement> sample_statements(const StatementPool& pool, std::size_t n, std::uint64_t seed) {
  if (n < 1) fail(Errc::InvalidArgument, "need at least one statement per behavior");
  if (pool.behaviors.empty()) fail(Errc::EmptyPool, "statement pool has no behaviors");
  std::vector<BehaviorStatement> out;
  for (const auto& behavior : pool.behaviors) {
    auto list = pool.by_behavior.at(behavior);
    if (list.empty()) fail(Errc::EmptyPool, "no statements for '" + behavior + "'");
    Rng rng(derive_seed(seed, behavior));
    const std::size_t take = std::min(n, list.size());
    for (std::size_t i = 0; i < take; ++i) {
      const std::size_t j = i + static_cast<std::size_t>(rng.below(list.size() - i));
      std::swap(list[i], list[j]);
      out.push_back(list[i]);
    }
  }
  return out;
}

/// Fraction of answers endorsing each behavior, per prime (row) and behavior (column).
struct AgreementMatrix {
  std::vector<std::string> rows;
  std::vector<std::string> behaviors;
  Matrix cells;
  std::vector<std::size_t> n_answered;  // row-major, parallel to cells
  std::map<std::string, std::vector<std::string>> behavior_tags;

  std::size_t answered(std::size_t r, std::size_t c) const { return n_answered[r * behaviors.size() + c]; }
};

inline std::vector<std::string> value_labels() {
  std::vector<std::string> out;
  for (ValueId v : kAllValues) out.emplace_back(value_name(v));
  return out;
}

inline std::vector<std::string> higher_order_labels() {
  std::vector<std::string> out;
  for (HigherOrderValue h : kAllHigherOrder) out.emplace_back(higher_order_name(h));
  return out;
}

/// Endorsement = (answered yes) == agree_means_behavior. Records whose item is
/// not in `statements`, whose condition carries no value prime, or whose
/// answer did not parse are ignored.
inline AgreementMatrix agreement_matrix(const std::vector<ResponseRecord>& records,
                                        const std::vector<BehaviorStatement>& statements) {
  AgreementMatrix m;
  m.rows = value_labels();
  std::unordered_map<std::string, const BehaviorStatement*> by_id;
  std::map<std::string, std::size_t> column;
  for (const auto& s : statements) {
    by_id.emplace(s.id, &s);
    if (column.emplace(s.behavior_name, m.behaviors.size()).second) m.behaviors.push_back(s.behavior_name);
    auto& tags = m.behavior_tags[s.behavior_name];
    for (const auto& t : s.tags)
      if (std::find(tags.begin(), tags.end(), t) == tags.end()) tags.push_back(t);
  }
  const std::size_t nb = m.behaviors.size();
  std::vector<std::size_t> endorsed(kValueCount * nb, 0);
  m.n_answered.assign(kValueCount * nb, 0);
  for (const auto& r : records) {
    auto st = by_id.find(r.item_id);
    if (st == by_id.end()) continue;
    auto d = parse_descriptor(r.condition);
    if (!d || !d->prime) continue;
    const bool* yes = std::get_if<bool>(&r.parsed);
    if (!yes) continue;
    const std::size_t cell = index_of(*d->prime) * nb + column.at(st->second->behavior_name);
    ++m.n_answered[cell];
    if (*yes == st->second->agree_means_behavior) ++endorsed[cell];
  }
  m.cells = Matrix(kValueCount, nb);
  for (std::size_t v = 0; v < kValueCount; ++v)
    for (std::size_t b = 0; b < nb; ++b) {
      const std::size_t cell = v * nb + b;
      if (m.n_answered[cell] == 0)
        fail(Errc::EmptyCell, "no parsed answers for " + m.rows[v] + " x " + m.behaviors[b]);
      m.cells(v, b) = static_cast<double>(endorsed[cell]) / static_cast<double>(m.n_answered[cell]);
    }
  return m;
}

/// Weighted means of value rows into the four higher-order rows.
inline AgreementMatrix aggregate_higher_order(const AgreementMatrix& m, HedonismPolicy policy = HedonismPolicy::Split) {
  if (m.rows.size() != kValueCount || m.cells.rows() != kValueCount)
    fail(Errc::ShapeMismatch, "higher-order aggregation needs all ten value rows");
  const auto w = higher_order_weights(policy);
  const std::size_t nb = m.behaviors.size();
  AgreementMatrix out;
  out.rows = higher_order_labels();
  out.behaviors = m.behaviors;
  out.behavior_tags = m.behavior_tags;
  out.cells = Matrix(kHigherOrderCount, nb);
  out.n_answered.assign(kHigherOrderCount * nb, 0);
  for (std::size_t h = 0; h < kHigherOrderCount; ++h)
    for (std::size_t v = 0; v < kValueCount; ++v) {
      if (w[h][v] == 0.0) continue;
      for (std::size_t b = 0; b < nb; ++b) {
        out.cells(h, b) += w[h][v] * m.cells(v, b);
        out.n_answered[h * nb + b] += m.answered(v, b);
      }
    }
  return out;
}

/// Correlations between rows ("value vectors" over behaviors).
inline CorrelationMatrix value_vector_correlations(const AgreementMatrix& m) {
  const std::size_t n = m.cells.rows();
  if (m.behaviors.size() < 3) fail(Errc::LengthMismatch, "need at least 3 behaviors to correlate value vectors");
  for (std::size_t i = 0; i < n; ++i) {
    auto row = m.cells.row(i);
    if (std::all_of(row.begin(), row.end(), [&](double x) { return x == row[0]; }))
      fail(Errc::ConstantVector, "row '" + m.rows[i] + "' agrees equally with every behavior");
  }
  CorrelationMatrix c{m.rows, m.rows, Matrix::identity(n), true};
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) c.cells(i, j) = c.cells(j, i) = pearson(m.cells.row(i), m.cells.row(j));
  return c;
}

using BehaviorPredicate = std::function<bool(const std::string& behavior, const std::vector<std::string>& tags)>;

inline BehaviorPredicate has_tag(std::string tag) {
  return [tag = std::move(tag)](const std::string&, const std::vector<std::string>& tags) {
    return std::find(tags.begin(), tags.end(), tag) != tags.end();
  };
}

inline AgreementMatrix filter_behaviors(const AgreementMatrix& m, const BehaviorPredicate& keep) {
  std::vector<std::size_t> cols;
  for (std::size_t b = 0; b < m.behaviors.size(); ++b) {
    auto tags = m.behavior_tags.find(m.behaviors[b]);
    static const std::vector<std::string> none;
    if (keep(m.behaviors[b], tags == m.behavior_tags.end() ? none : tags->second)) cols.push_back(b);
  }
  if (cols.empty()) fail(Errc::NoMatch, "no behavior satisfies the filter");
  AgreementMatrix out;
  out.rows = m.rows;
  out.cells = Matrix(m.rows.size(), cols.size());
  out.n_answered.assign(m.rows.size() * cols.size(), 0);
  for (std::size_t k = 0; k < cols.size(); ++k) {
    const auto& name = m.behaviors[cols[k]];
    out.behaviors.push_back(name);
    if (auto t = m.behavior_tags.find(name); t != m.behavior_tags.end()) out.behavior_tags[name] = t->second;
    for (std::size_t r = 0; r < m.rows.size(); ++r) {
      out.cells(r, k) = m.cells(r, cols[k]);
      out.n_answered[r * cols.size() + k] = m.answered(r, cols[k]);
    }
  }
  return out;
}

}  // namespace valuesim
