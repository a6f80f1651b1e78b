#pragma once

#ifndef VALUESIM_NO_OPENSSL
#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
#define CPPHTTPLIB_OPENSSL_SUPPORT
#endif
#endif

#include <algorithm>
#include <array>
#include <atomic>
#include <chrono>
#include <cstdlib>
#include <functional>
#include <optional>
#include <string>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "valuesim/error.hpp"
#include "valuesim/mock.hpp"
#include "valuesim/parsing.hpp"
#include "valuesim/prompting.hpp"
#include "valuesim/response_store.hpp"

namespace valuesim {

struct EndpointConfig {
  std::string base_url = "https://api.openai.com/v1";
  std::string model_name;
  std::string api_key;
  std::string api_key_env = "VALUESIM_API_KEY";
  double timeout_seconds = 60.0;
  std::size_t max_in_flight = 4;

  void validate() const {
    if (max_in_flight < 1) fail(Errc::InvalidArgument, "max_in_flight must be at least 1");
    if (!(timeout_seconds > 0.0)) fail(Errc::InvalidArgument, "timeout must be positive");
  }
};

struct SamplingConfig {
  double temperature = 0.7;
  std::size_t repeats = 100;
  int max_tokens = 16;

  void validate() const {
    if (!(temperature >= 0.0)) fail(Errc::InvalidArgument, "temperature must be non-negative");
    if (repeats < 1) fail(Errc::InvalidArgument, "repeats must be at least 1");
    if (max_tokens < 1) fail(Errc::InvalidArgument, "max_tokens must be at least 1");
  }
};

struct RetryPolicy {
  int max_attempts = 5;
  std::chrono::milliseconds base_delay{500};
  std::chrono::milliseconds max_delay{30000};
};

/// Something that turns one prompt into one sampled completion.
class ChatTransport {
 public:
  virtual ~ChatTransport() = default;
  virtual std::string model_name() const = 0;
  virtual std::string complete(const AssembledPrompt& prompt, const SamplingConfig& sampling,
                               std::uint64_t repeat_index) = 0;
  /// Completion requests issued so far (attempts, including retries).
  std::size_t calls() const noexcept { return calls_.load(); }

 protected:
  std::atomic<std::size_t> calls_{0};
};

namespace detail {
struct SplitUrl {
  std::string origin;  // scheme://host[:port]
  std::string path;    // prefix without trailing slash
};

inline SplitUrl split_base_url(const std::string& url) {
  auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) fail(Errc::InvalidArgument, "base_url '" + url + "' lacks a scheme");
  auto path_start = url.find('/', scheme_end + 3);
  SplitUrl s;
  s.origin = url.substr(0, path_start);
  s.path = path_start == std::string::npos ? "" : url.substr(path_start);
  while (!s.path.empty() && s.path.back() == '/') s.path.pop_back();
  return s;
}

inline std::optional<std::chrono::milliseconds> retry_after(const httplib::Response& res) {
  if (!res.has_header("Retry-After")) return std::nullopt;
  try {
    double secs = std::stod(res.get_header_value("Retry-After"));
    if (secs >= 0) return std::chrono::milliseconds(static_cast<long long>(secs * 1000.0));
  } catch (const std::exception&) {
  }
  return std::nullopt;
}
}  // namespace detail

/// OpenAI-compatible `POST {base_url}/chat/completions`.
class HttpTransport final : public ChatTransport {
 public:
  using Sleeper = std::function<void(std::chrono::milliseconds)>;

  explicit HttpTransport(EndpointConfig endpoint, RetryPolicy retry = {},
                         Sleeper sleeper = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); })
      : endpoint_(std::move(endpoint)), retry_(retry), sleep_(std::move(sleeper)),
        url_(detail::split_base_url(endpoint_.base_url)) {
    endpoint_.validate();
  }

  std::string model_name() const override { return endpoint_.model_name; }

  std::string complete(const AssembledPrompt& prompt, const SamplingConfig& sampling,
                       std::uint64_t /*repeat_index*/) override {
    const nlohmann::json body = {{"model", endpoint_.model_name},
                                 {"messages", {{{"role", "user"}, {"content", prompt.text}}}},
                                 {"temperature", sampling.temperature},
                                 {"max_tokens", sampling.max_tokens}};
    const std::string payload = body.dump();
    const std::string path = url_.path + "/chat/completions";

    std::optional<Error> last;
    std::optional<std::chrono::milliseconds> retry_hint;
    for (int attempt = 0; attempt < retry_.max_attempts; ++attempt) {
      if (attempt > 0) sleep_(retry_hint.value_or(backoff(attempt)));
      retry_hint.reset();
      ++calls_;

      httplib::Client client(url_.origin);
      const auto timeout = std::chrono::duration<double>(endpoint_.timeout_seconds);
      client.set_connection_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
      client.set_read_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
      client.set_write_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
      httplib::Headers headers;
      if (!endpoint_.api_key.empty()) headers.emplace("Authorization", "Bearer " + endpoint_.api_key);

      auto res = client.Post(path, headers, payload, "application/json");
      if (!res) {
        const auto err = res.error();
        const bool timed_out = err == httplib::Error::ConnectionTimeout || err == httplib::Error::Read;
        last = Error(timed_out ? Errc::Timeout : Errc::NetworkError,
                     endpoint_.base_url + ": " + httplib::to_string(err));
        continue;
      }
      if (res->status == 401 || res->status == 403)
        fail(Errc::AuthError, endpoint_.base_url + " rejected credentials (HTTP " + std::to_string(res->status) + ")");
      if (res->status == 429) {
        retry_hint = detail::retry_after(*res);
        last = Error(Errc::RateLimited, endpoint_.base_url + " returned HTTP 429");
        continue;
      }
      if (res->status >= 500) {
        last = Error(Errc::NetworkError, endpoint_.base_url + " returned HTTP " + std::to_string(res->status));
        continue;
      }
      if (res->status != 200)
        fail(Errc::NetworkError, endpoint_.base_url + " returned HTTP " + std::to_string(res->status) + ": " +
                                     res->body.substr(0, 200));
      try {
        auto doc = nlohmann::json::parse(res->body);
        return doc.at("choices").at(0).at("message").at("content").get<std::string>();
      } catch (const nlohmann::json::exception& e) {
        fail(Errc::NetworkError, "unexpected completion body: " + std::string(e.what()));
      }
    }
    throw *last;
  }

 private:
  std::chrono::milliseconds backoff(int attempt) const {
    auto d = retry_.base_delay * (1LL << std::min(attempt - 1, 20));
    return std::min<std::chrono::milliseconds>(d, retry_.max_delay);
  }

  EndpointConfig endpoint_;
  RetryPolicy retry_;
  Sleeper sleep_;
  detail::SplitUrl url_;
};

/// One persona per prime (ten values plus the unprimed pool).
struct MockPersonaSet {
  std::array<std::optional<MockPersona>, kValueCount + 1> personas;

  MockPersona& at(std::optional<ValueId> prime) {
    auto& slot = personas[prime ? index_of(*prime) : kValueCount];
    if (!slot) slot.emplace();
    return *slot;
  }
  const MockPersona& get(std::optional<ValueId> prime) const {
    const auto& slot = personas[prime ? index_of(*prime) : kValueCount];
    if (!slot)
      fail(Errc::InvalidArgument,
           "no mock persona for '" + std::string(prime ? value_name(*prime) : "unprimed") + "'");
    return *slot;
  }
};

class MockTransport final : public ChatTransport {
 public:
  explicit MockTransport(MockPersonaSet personas, std::string model = "mock")
      : personas_(std::move(personas)), model_(std::move(model)) {}

  std::string model_name() const override { return model_; }

  std::string complete(const AssembledPrompt& prompt, const SamplingConfig&, std::uint64_t repeat_index) override {
    ++calls_;
    return mock_complete(personas_.get(prime_of(prompt.condition)), prompt, repeat_index);
  }

 private:
  MockPersonaSet personas_;
  std::string model_;
};

/// Parses a completion per the prompt's format; failures give an empty parse.
inline ParsedAnswer parse_completion(const AssembledPrompt& prompt, std::string_view text) {
  try {
    if (prompt.response_format == ResponseFormat::YesNo) return parse_yes_no(text);
    return parse_likert(text, prompt.scale);
  } catch (const Error& e) {
    if (e.code() == Errc::NoParse || e.code() == Errc::OutOfRange) return std::monostate{};
    throw;
  }
}

/// Returns the stored response for (prompt, model, temperature, repeat) or
/// samples, parses and stores a new one. A hit performs no transport call.
inline ResponseRecord cached_complete(ResponseStore& store, ChatTransport& transport, const AssembledPrompt& prompt,
                                      const SamplingConfig& sampling, std::uint64_t repeat_index) {
  RecordKey key{prompt.content_hash, transport.model_name(), sampling.temperature, repeat_index};
  if (auto hit = store.find(key)) return *hit;
  ResponseRecord r;
  r.raw_text = transport.complete(prompt, sampling, repeat_index);
  r.content_hash = prompt.content_hash;
  r.repeat_index = repeat_index;
  r.parsed = parse_completion(prompt, r.raw_text);
  r.condition = describe(prompt.condition).str();
  r.item_id = prompt.item_id;
  r.timestamp = utc_now_iso8601();
  r.model_name = key.model_name;
  r.temperature = sampling.temperature;
  return store.append(std::move(r));
}

}  // namespace valuesim
