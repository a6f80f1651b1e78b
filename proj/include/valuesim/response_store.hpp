#pragma once

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <tuple>
#include <variant>
#include <vector>

#include <json.hpp>

#include "valuesim/error.hpp"

namespace valuesim {

using ParsedAnswer = std::variant<std::monostate, int, bool>;

struct ResponseRecord {
  std::string content_hash;
  std::uint64_t repeat_index = 0;
  std::string raw_text;
  ParsedAnswer parsed;
  std::string condition;
  std::string item_id;
  std::string timestamp;
  std::string model_name;
  double temperature = 0.0;

  bool has_parse() const noexcept { return !std::holds_alternative<std::monostate>(parsed); }
};

inline std::string utc_now_iso8601() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

inline nlohmann::json to_json(const ResponseRecord& r) {
  nlohmann::json parsed;
  if (auto* i = std::get_if<int>(&r.parsed)) parsed = *i;
  else if (auto* b = std::get_if<bool>(&r.parsed)) parsed = *b;
  return {{"content_hash", r.content_hash}, {"repeat_index", r.repeat_index}, {"raw_text", r.raw_text},
          {"parsed", parsed},             {"condition", r.condition},       {"item_id", r.item_id},
          {"timestamp", r.timestamp},     {"model_name", r.model_name},     {"temperature", r.temperature}};
}

inline ResponseRecord record_from_json(const nlohmann::json& j) {
  ResponseRecord r;
  r.content_hash = j.at("content_hash").get<std::string>();
  r.repeat_index = j.at("repeat_index").get<std::uint64_t>();
  r.raw_text = j.at("raw_text").get<std::string>();
  const auto& p = j.at("parsed");
  if (p.is_boolean()) r.parsed = p.get<bool>();
  else if (p.is_number_integer()) r.parsed = p.get<int>();
  else if (!p.is_null()) throw nlohmann::json::type_error::create(302, "parsed must be int, bool or null", &j);
  r.condition = j.at("condition").get<std::string>();
  r.item_id = j.at("item_id").get<std::string>();
  r.timestamp = j.at("timestamp").get<std::string>();
  r.model_name = j.at("model_name").get<std::string>();
  r.temperature = j.at("temperature").get<double>();
  return r;
}

/// Cache identity of a response.
struct RecordKey {
  std::string content_hash;
  std::string model_name;
  double temperature;
  std::uint64_t repeat_index;

  auto operator<=>(const RecordKey&) const = default;
};

inline RecordKey key_of(const ResponseRecord& r) {
  return {r.content_hash, r.model_name, r.temperature, r.repeat_index};
}

/// Append-only JSONL store of responses, indexed by RecordKey.
/// Thread-safe; writes are serialized and flushed line by line.
class ResponseStore {
 public:
  explicit ResponseStore(std::filesystem::path path) : path_(std::move(path)) {
    if (std::filesystem::exists(path_)) load();
    if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path());
    out_.open(path_, std::ios::binary | std::ios::app);
    if (!out_) fail(Errc::IoError, "cannot open store '" + path_.string() + "' for append");
  }

  ResponseStore(const ResponseStore&) = delete;
  ResponseStore& operator=(const ResponseStore&) = delete;

  std::optional<ResponseRecord> find(const RecordKey& key) const {
    std::lock_guard lock(mu_);
    auto it = index_.find(key);
    if (it == index_.end()) return std::nullopt;
    return records_[it->second];
  }

  /// Stores `r` unless its key is present; returns the stored record.
  ResponseRecord append(ResponseRecord r) {
    std::lock_guard lock(mu_);
    auto key = key_of(r);
    if (auto it = index_.find(key); it != index_.end()) return records_[it->second];
    out_ << to_json(r).dump() << '\n';
    out_.flush();
    if (!out_) fail(Errc::IoError, "write to '" + path_.string() + "' failed");
    index_.emplace(std::move(key), records_.size());
    records_.push_back(r);
    return r;
  }

  std::vector<ResponseRecord> records() const {
    std::lock_guard lock(mu_);
    return records_;
  }

  std::size_t size() const {
    std::lock_guard lock(mu_);
    return records_.size();
  }

  const std::filesystem::path& path() const noexcept { return path_; }

 private:
  void load() {
    std::ifstream in(path_, std::ios::binary);
    if (!in) fail(Errc::IoError, "cannot read store '" + path_.string() + "'");
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (line.empty()) continue;
      try {
        ResponseRecord r = record_from_json(nlohmann::json::parse(line));
        auto key = key_of(r);
        if (index_.count(key))
          fail(Errc::StoreCorrupt, path_.string() + ":" + std::to_string(lineno) + ": duplicate record key");
        index_.emplace(std::move(key), records_.size());
        records_.push_back(std::move(r));
      } catch (const nlohmann::json::exception& e) {
        fail(Errc::StoreCorrupt, path_.string() + ":" + std::to_string(lineno) + ": " + e.what());
      }
    }
  }

  std::filesystem::path path_;
  mutable std::mutex mu_;
  std::ofstream out_;
  std::vector<ResponseRecord> records_;
  std::map<RecordKey, std::size_t> index_;
};

}  // namespace valuesim
