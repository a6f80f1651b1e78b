#include <gtest/gtest.h>

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <thread>

#include "support.hpp"

using namespace valuesim;
using testing_support::TempDir;

namespace {

AssembledPrompt likert_prompt(const std::string& construct = "power", ValueId prime = ValueId::Power,
                              bool reverse = false) {
  return assemble(PrimingOnly{prime}, Item{"i1", "Some portrait.", construct, reverse}, {1, 6, {}},
                  ResponseFormat::LikertDigit);
}

MockPersona flat(double mean, double sd = 0.0, std::uint64_t seed = 1) {
  MockPersona p;
  p.mean_rating["power"] = mean;
  p.noise_sd = sd;
  p.seed = seed;
  return p;
}

/// Local chat-completions endpoint whose behavior a test scripts per request.
class FakeServer {
 public:
  using Handler = std::function<void(const httplib::Request&, httplib::Response&)>;

  explicit FakeServer(Handler h) : handler_(std::move(h)) {
    server_.Post("/v1/chat/completions", [this](const httplib::Request& req, httplib::Response& res) {
      ++hits;
      handler_(req, res);
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~FakeServer() {
    server_.stop();
    thread_.join();
  }

  std::string base_url() const { return "http://127.0.0.1:" + std::to_string(port_) + "/v1"; }
  std::atomic<int> hits{0};

 private:
  Handler handler_;
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

void reply(httplib::Response& res, const std::string& content) {
  res.set_content(nlohmann::json{{"choices", {{{"message", {{"role", "assistant"}, {"content", content}}}}}}}.dump(),
                  "application/json");
}

EndpointConfig endpoint(const std::string& url) {
  EndpointConfig e;
  e.base_url = url;
  e.model_name = "test-model";
  e.api_key = "secret";
  e.timeout_seconds = 5;
  return e;
}

struct SleepLog {
  std::vector<std::chrono::milliseconds> waits;
  HttpTransport::Sleeper sleeper() {
    return [this](std::chrono::milliseconds d) { waits.push_back(d); };
  }
};

}  // namespace

TEST(Parsing, Likert) {
  const LikertScale s{1, 6, {}};
  EXPECT_EQ(parse_likert("4", s), 4);
  EXPECT_EQ(parse_likert("I would say 5 out of 6.", s), 5);
  EXPECT_EQ(parse_likert("Rating: 10, no, 3", s), 3);
  EXPECT_EQ(parse_likert("-2 then 2", LikertScale{-3, 3, {}}), -2);
  EXPECT_ERRC(parse_likert("I cannot answer.", s), NoParse);
  EXPECT_ERRC(parse_likert("", s), NoParse);
  EXPECT_ERRC(parse_likert("0 or 7", s), OutOfRange);
  EXPECT_ERRC(parse_likert("12345678901234567890", s), OutOfRange);
  EXPECT_EQ(parse_likert("4", s), parse_likert("4", s));
}

TEST(Parsing, YesNo) {
  EXPECT_TRUE(parse_yes_no("Yes, I agree."));
  EXPECT_FALSE(parse_yes_no("no"));
  EXPECT_FALSE(parse_yes_no("NO."));
  EXPECT_TRUE(parse_yes_no("Well... yes."));
  EXPECT_FALSE(parse_yes_no("I know it: no"));  // "know" is not "no"
  EXPECT_TRUE(parse_yes_no("Eyes open. Yes"));
  EXPECT_ERRC(parse_yes_no("Maybe."), NoParse);
  EXPECT_ERRC(parse_yes_no("nobody yesterday"), NoParse);
}

TEST(Mock, DegenerateNoiseReproducesRoundedMean) {
  const auto p = likert_prompt();
  for (std::uint64_t r = 0; r < 20; ++r) EXPECT_EQ(mock_complete(flat(4.0), p, r), "4");
  EXPECT_EQ(mock_complete(flat(6.9), p, 0), "6");
  EXPECT_EQ(mock_complete(flat(-3.0), p, 0), "1");
  EXPECT_EQ(mock_complete(flat(2.4), p, 0), "2");
}

TEST(Mock, DeterministicAndRepeatSensitive) {
  const auto p = likert_prompt();
  std::set<std::string> seen;
  for (std::uint64_t r = 0; r < 50; ++r) {
    const auto a = mock_complete(flat(3.5, 1.0, 9), p, r);
    EXPECT_EQ(a, mock_complete(flat(3.5, 1.0, 9), p, r));
    seen.insert(a);
  }
  EXPECT_GT(seen.size(), 2u);
}

TEST(Mock, ReverseKeyedAndYesNo) {
  EXPECT_EQ(mock_complete(flat(5.0), likert_prompt("power", ValueId::Power, true), 0), "2");
  const Item s{"s", "Statement.", "power", false};
  const auto yn = assemble(Unprimed{}, s, {0, 1, {}}, ResponseFormat::YesNo);
  EXPECT_EQ(mock_complete(flat(0.8), yn, 0), "Yes");
  EXPECT_EQ(mock_complete(flat(0.2), yn, 0), "No");
  const auto reversed = assemble(Unprimed{}, Item{"s", "Statement.", "power", true}, {0, 1, {}},
                                 ResponseFormat::YesNo);
  EXPECT_EQ(mock_complete(flat(0.8), reversed, 0), "No");
}

TEST(Mock, UnknownConstruct) {
  EXPECT_ERRC(mock_complete(flat(3.0), likert_prompt("benevolence"), 0), UnknownConstruct);
}

TEST(Mock, NoiseHasRequestedSpread) {
  const auto p = likert_prompt();
  MockPersona m = flat(0.0, 2.0, 3);
  double s = 0, ss = 0;
  const int n = 20000;
  for (int r = 0; r < n; ++r) {
    const double x = mock_sample(m, p, r);
    s += x;
    ss += x * x;
  }
  const double mean = s / n, sd = std::sqrt(ss / n - mean * mean);
  EXPECT_NEAR(mean, 0.0, 0.05);
  EXPECT_NEAR(sd, 2.0, 0.05);
}

TEST(Mock, LatentTermIsSharedAcrossItemsOfARepeat) {
  MockPersona m;
  m.mean_rating = {{"a", 0.0}, {"b", 0.0}, {"c", 0.0}};
  m.latent_angle = {{"a", 0.0}, {"b", 0.0}, {"c", std::numbers::pi}};
  m.latent_sd = 1.0;
  m.seed = 11;
  const LikertScale s{1, 6, {}};
  for (std::uint64_t r = 0; r < 10; ++r) {
    const double a = mock_sample(m, assemble(Unprimed{}, Item{"ia", "x", "a", false}, s, ResponseFormat::LikertDigit), r);
    const double b = mock_sample(m, assemble(Unprimed{}, Item{"ib", "y", "b", false}, s, ResponseFormat::LikertDigit), r);
    const double c = mock_sample(m, assemble(Unprimed{}, Item{"ic", "z", "c", false}, s, ResponseFormat::LikertDigit), r);
    EXPECT_DOUBLE_EQ(a, b);
    EXPECT_NEAR(a, -c, 1e-12);
  }
}

TEST(MockTransport, RoutesByPrime) {
  MockPersonaSet set;
  set.at(ValueId::Power) = flat(6.0);
  set.at(std::nullopt) = flat(1.0);
  MockTransport t(set);
  EXPECT_EQ(t.complete(likert_prompt(), {}, 0), "6");
  const auto unprimed = assemble(Unprimed{}, Item{"i1", "x", "power", false}, {1, 6, {}}, ResponseFormat::LikertDigit);
  EXPECT_EQ(t.complete(unprimed, {}, 0), "1");
  EXPECT_ERRC(t.complete(likert_prompt("power", ValueId::Security), {}, 0), InvalidArgument);
  EXPECT_EQ(t.calls(), 3u);
}

TEST(Store, PersistsAndReloads) {
  TempDir dir;
  const auto path = dir / "r.jsonl";
  ResponseRecord rec{"abc", 3, "Yes", true, "priming-only:power", "s#1", "2020-01-01T00:00:00Z", "m", 0.7};
  {
    ResponseStore store(path);
    store.append(rec);
    ResponseRecord other = rec;
    other.repeat_index = 4;
    other.parsed = std::monostate{};
    store.append(other);
    EXPECT_EQ(store.size(), 2u);
    EXPECT_EQ(store.append(rec).raw_text, "Yes");  // duplicate key: kept once
    EXPECT_EQ(store.size(), 2u);
  }
  ResponseStore again(path);
  EXPECT_EQ(again.size(), 2u);
  auto hit = again.find({"abc", "m", 0.7, 3});
  ASSERT_TRUE(hit);
  EXPECT_EQ(std::get<bool>(hit->parsed), true);
  EXPECT_EQ(hit->condition, "priming-only:power");
  EXPECT_FALSE(again.find({"abc", "m", 0.8, 3}));
  EXPECT_FALSE(again.find({"abc", "other", 0.7, 3}));
  EXPECT_FALSE(again.find({"abc", "m", 0.7, 4})->has_parse());
}

TEST(Store, FieldNames) {
  const ResponseRecord rec{"h", 1, "4", 4, "unprimed", "q", "t", "m", 0.5};
  const auto j = to_json(rec);
  for (const char* k : {"content_hash", "repeat_index", "raw_text", "parsed", "condition", "item_id", "timestamp",
                        "model_name", "temperature"})
    EXPECT_TRUE(j.contains(k)) << k;
  EXPECT_EQ(j.at("parsed"), 4);
}

TEST(Store, CorruptLines) {
  TempDir dir;
  const auto path = dir / "bad.jsonl";
  std::ofstream(path) << "{not json}\n";
  EXPECT_ERRC(ResponseStore(path), StoreCorrupt);
  const ResponseRecord rec{"h", 1, "4", 4, "unprimed", "q", "t", "m", 0.5};
  std::ofstream(path, std::ios::trunc) << to_json(rec).dump() << "\n" << to_json(rec).dump() << "\n";
  EXPECT_ERRC(ResponseStore(path), StoreCorrupt);
  std::ofstream(path, std::ios::trunc) << R"({"content_hash":"h"})" << "\n";
  EXPECT_ERRC(ResponseStore(path), StoreCorrupt);
}

TEST(Cache, HitsAvoidTransport) {
  TempDir dir;
  ResponseStore store(dir / "r.jsonl");
  MockPersonaSet set;
  set.at(ValueId::Power) = flat(3.0, 1.0, 5);
  MockTransport t(set);
  const auto p = likert_prompt();
  SamplingConfig s;
  const auto first = cached_complete(store, t, p, s, 0);
  EXPECT_EQ(t.calls(), 1u);
  const auto second = cached_complete(store, t, p, s, 0);
  EXPECT_EQ(t.calls(), 1u);
  EXPECT_EQ(first.raw_text, second.raw_text);
  EXPECT_EQ(first.timestamp, second.timestamp);
  EXPECT_EQ(first.condition, "priming-only:power");
  EXPECT_EQ(first.item_id, "i1");

  cached_complete(store, t, p, s, 1);
  EXPECT_EQ(t.calls(), 2u);
  SamplingConfig hotter = s;
  hotter.temperature = 1.0;
  cached_complete(store, t, p, hotter, 0);
  EXPECT_EQ(t.calls(), 3u);
  EXPECT_EQ(store.size(), 3u);
}

TEST(Cache, HundredRepeatsGiveHundredRecords) {
  TempDir dir;
  ResponseStore store(dir / "r.jsonl");
  MockPersonaSet set;
  set.at(ValueId::Power) = flat(3.0, 1.0, 5);
  MockTransport t(set);
  SamplingConfig s;
  EXPECT_EQ(s.temperature, 0.7);
  EXPECT_EQ(s.repeats, 100u);
  for (std::uint64_t r = 0; r < s.repeats; ++r) cached_complete(store, t, likert_prompt(), s, r);
  EXPECT_EQ(store.size(), 100u);
}

TEST(Cache, ParseFailuresAreStored) {
  TempDir dir;
  ResponseStore store(dir / "r.jsonl");
  class Chatty : public ChatTransport {
   public:
    std::string model_name() const override { return "chatty"; }
    std::string complete(const AssembledPrompt&, const SamplingConfig&, std::uint64_t) override {
      ++calls_;
      return "I'd rather not say.";
    }
  } t;
  const auto r = cached_complete(store, t, likert_prompt(), {}, 0);
  EXPECT_FALSE(r.has_parse());
  EXPECT_EQ(r.raw_text, "I'd rather not say.");
  EXPECT_EQ(store.size(), 1u);
}

TEST(Http, SendsOpenAiRequest) {
  nlohmann::json seen;
  std::string auth;
  FakeServer server([&](const httplib::Request& req, httplib::Response& res) {
    seen = nlohmann::json::parse(req.body);
    auth = req.get_header_value("Authorization");
    reply(res, "5");
  });
  HttpTransport t(endpoint(server.base_url()));
  SamplingConfig s;
  EXPECT_EQ(t.complete(likert_prompt(), s, 0), "5");
  EXPECT_EQ(seen.at("model"), "test-model");
  EXPECT_DOUBLE_EQ(seen.at("temperature").get<double>(), 0.7);
  EXPECT_EQ(seen.at("max_tokens"), 16);
  EXPECT_EQ(seen.at("messages").at(0).at("role"), "user");
  EXPECT_EQ(seen.at("messages").at(0).at("content"), likert_prompt().text);
  EXPECT_EQ(auth, "Bearer secret");
  EXPECT_EQ(t.calls(), 1u);
}

TEST(Http, RetriesServerErrorsWithBackoff) {
  FakeServer server([&](const httplib::Request&, httplib::Response& res) {
    if (server.hits < 3) {
      res.status = 503;
      return;
    }
    reply(res, "2");
  });
  SleepLog log;
  HttpTransport t(endpoint(server.base_url()), {}, log.sleeper());
  EXPECT_EQ(t.complete(likert_prompt(), {}, 0), "2");
  EXPECT_EQ(server.hits, 3);
  ASSERT_EQ(log.waits.size(), 2u);
  EXPECT_EQ(log.waits[0].count(), 500);
  EXPECT_EQ(log.waits[1].count(), 1000);
}

TEST(Http, HonorsRetryAfter) {
  FakeServer server([&](const httplib::Request&, httplib::Response& res) {
    if (server.hits == 1) {
      res.status = 429;
      res.set_header("Retry-After", "2");
      return;
    }
    reply(res, "Yes");
  });
  SleepLog log;
  HttpTransport t(endpoint(server.base_url()), {}, log.sleeper());
  EXPECT_EQ(t.complete(likert_prompt(), {}, 0), "Yes");
  ASSERT_EQ(log.waits.size(), 1u);
  EXPECT_EQ(log.waits[0].count(), 2000);
}

TEST(Http, PersistentRateLimitFails) {
  FakeServer server([&](const httplib::Request&, httplib::Response& res) { res.status = 429; });
  SleepLog log;
  HttpTransport t(endpoint(server.base_url()), {}, log.sleeper());
  EXPECT_ERRC(t.complete(likert_prompt(), {}, 0), RateLimited);
  EXPECT_EQ(server.hits, 5);
}

TEST(Http, AuthErrorIsFatal) {
  FakeServer server([&](const httplib::Request&, httplib::Response& res) { res.status = 401; });
  SleepLog log;
  HttpTransport t(endpoint(server.base_url()), {}, log.sleeper());
  EXPECT_ERRC(t.complete(likert_prompt(), {}, 0), AuthError);
  EXPECT_EQ(server.hits, 1);
  EXPECT_TRUE(log.waits.empty());
}

TEST(Http, UnreachableHostFailsAfterFiveAttempts) {
  // Grab a free port, then close it again so nothing listens there.
  const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  ASSERT_EQ(::bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr), 0);
  socklen_t len = sizeof addr;
  ::getsockname(fd, reinterpret_cast<sockaddr*>(&addr), &len);
  const int port = ntohs(addr.sin_port);
  ::close(fd);
  SleepLog log;
  HttpTransport t(endpoint("http://127.0.0.1:" + std::to_string(port) + "/v1"), {}, log.sleeper());
  EXPECT_ERRC(t.complete(likert_prompt(), {}, 0), NetworkError);
  EXPECT_EQ(t.calls(), 5u);
  EXPECT_EQ(log.waits.size(), 4u);
}

TEST(Http, SlowServerTimesOut) {
  FakeServer server([&](const httplib::Request&, httplib::Response& res) {
    std::this_thread::sleep_for(std::chrono::milliseconds(600));
    reply(res, "1");
  });
  auto e = endpoint(server.base_url());
  e.timeout_seconds = 0.2;
  SleepLog log;
  HttpTransport t(e, {2, std::chrono::milliseconds(1), std::chrono::milliseconds(1)}, log.sleeper());
  EXPECT_ERRC(t.complete(likert_prompt(), {}, 0), Timeout);
}

TEST(Http, BadBodyAndConfig) {
  FakeServer server([&](const httplib::Request&, httplib::Response& res) { res.set_content("{}", "application/json"); });
  HttpTransport t(endpoint(server.base_url()));
  EXPECT_ERRC(t.complete(likert_prompt(), {}, 0), NetworkError);
  EXPECT_ERRC(HttpTransport(endpoint("no-scheme")), InvalidArgument);
  auto e = endpoint(server.base_url());
  e.max_in_flight = 0;
  EXPECT_ERRC(HttpTransport(e), InvalidArgument);
  e = endpoint(server.base_url());
  e.timeout_seconds = 0;
  EXPECT_ERRC(HttpTransport(e), InvalidArgument);
}

TEST(Http, CacheHitMakesNoRequest) {
  FakeServer server([&](const httplib::Request&, httplib::Response& res) { reply(res, "3"); });
  TempDir dir;
  ResponseStore store(dir / "r.jsonl");
  HttpTransport t(endpoint(server.base_url()));
  const auto a = cached_complete(store, t, likert_prompt(), {}, 7);
  EXPECT_EQ(std::get<int>(a.parsed), 3);
  cached_complete(store, t, likert_prompt(), {}, 7);
  EXPECT_EQ(server.hits, 1);
  EXPECT_EQ(a.model_name, "test-model");
}
