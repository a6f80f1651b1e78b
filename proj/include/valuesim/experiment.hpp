#pragma once

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "valuesim/alignment.hpp"
#include "valuesim/digest.hpp"
#include "valuesim/error.hpp"
#include "valuesim/llm_client.hpp"
#include "valuesim/matrix_io.hpp"
#include "valuesim/persona_behavior.hpp"
#include "valuesim/planted.hpp"
#include "valuesim/population.hpp"
#include "valuesim/prompting.hpp"
#include "valuesim/questionnaire.hpp"
#include "valuesim/response_store.hpp"

namespace valuesim {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Configuration

struct ExperimentConfig {
  EndpointConfig endpoint;
  SamplingConfig sampling;
  fs::path value_questionnaire;
  std::vector<fs::path> behavior_questionnaires;
  std::optional<fs::path> statement_pool;
  std::size_t n_statements = kDefaultStatementsPerBehavior;
  std::size_t persona_repeats = 1;
  std::optional<std::string> behavior_tag;
  std::optional<fs::path> prior;
  Strategy strategy = Strategy::Uniform;
  ConditionKind condition = ConditionKind::PrimingOnly;
  std::optional<fs::path> human_value_matrix;
  std::optional<fs::path> human_behavior_matrix;
  fs::path output_dir = "out";
  std::optional<fs::path> store;
  std::uint64_t seed = 0;
  bool mock = false;
  std::optional<fs::path> mock_personas;
  std::optional<fs::path> prompt_config;
  std::size_t bootstrap_iterations = 100;
  std::size_t bootstrap_sample_size = 500;
  StructureOptions structure;
  HedonismPolicy hedonism = HedonismPolicy::Split;
  bool ipsatize = false;

  fs::path store_path() const { return store ? *store : output_dir / "responses.jsonl"; }
  std::string model_name() const {
    return endpoint.model_name.empty() && mock ? std::string("mock") : endpoint.model_name;
  }
};

namespace detail {
inline fs::path resolve(const fs::path& base, const std::string& p) {
  fs::path path(p);
  return path.is_absolute() ? path : base / path;
}

inline HedonismPolicy parse_hedonism(const std::string& s) {
  if (s == "split") return HedonismPolicy::Split;
  if (s == "openness-to-change") return HedonismPolicy::OpennessToChange;
  if (s == "self-enhancement") return HedonismPolicy::SelfEnhancement;
  fail(Errc::InvalidArgument, "hedonism policy '" + s + "' is not split|openness-to-change|self-enhancement");
}
}  // namespace detail

/// Relative paths resolve against `base_dir` (the config file's directory).
inline ExperimentConfig experiment_config_from_json(const nlohmann::json& doc, const fs::path& base_dir) {
  ExperimentConfig c;
  try {
    if (doc.contains("endpoint")) {
      const auto& e = doc.at("endpoint");
      c.endpoint.base_url = e.value("base_url", c.endpoint.base_url);
      c.endpoint.model_name = e.value("model_name", c.endpoint.model_name);
      c.endpoint.api_key_env = e.value("api_key_env", c.endpoint.api_key_env);
      c.endpoint.timeout_seconds = e.value("timeout", c.endpoint.timeout_seconds);
      c.endpoint.max_in_flight = e.value("max_in_flight", c.endpoint.max_in_flight);
    }
    if (doc.contains("sampling")) {
      const auto& s = doc.at("sampling");
      c.sampling.temperature = s.value("temperature", c.sampling.temperature);
      c.sampling.repeats = s.value("repeats", c.sampling.repeats);
      c.sampling.max_tokens = s.value("max_tokens", c.sampling.max_tokens);
    }
    c.value_questionnaire = detail::resolve(base_dir, doc.at("value_questionnaire").get<std::string>());
    for (const auto& p : doc.value("behavior_questionnaires", std::vector<std::string>{}))
      c.behavior_questionnaires.push_back(detail::resolve(base_dir, p));
    if (doc.contains("statement_pool")) c.statement_pool = detail::resolve(base_dir, doc.at("statement_pool"));
    c.n_statements = doc.value("n_statements", c.n_statements);
    c.persona_repeats = doc.value("persona_repeats", c.persona_repeats);
    if (doc.contains("behavior_tag")) c.behavior_tag = doc.at("behavior_tag").get<std::string>();
    if (doc.contains("prior")) c.prior = detail::resolve(base_dir, doc.at("prior"));
    if (doc.contains("strategy")) {
      auto s = parse_strategy(doc.at("strategy").get<std::string>());
      if (!s) fail(Errc::InvalidArgument, "unknown strategy '" + doc.at("strategy").get<std::string>() + "'");
      c.strategy = *s;
    }
    if (doc.contains("condition")) {
      auto k = parse_condition_kind(doc.at("condition").get<std::string>());
      if (!k) fail(Errc::InvalidArgument, "unknown condition '" + doc.at("condition").get<std::string>() + "'");
      c.condition = *k;
    }
    if (doc.contains("human_value_matrix"))
      c.human_value_matrix = detail::resolve(base_dir, doc.at("human_value_matrix"));
    if (doc.contains("human_behavior_matrix"))
      c.human_behavior_matrix = detail::resolve(base_dir, doc.at("human_behavior_matrix"));
    if (doc.contains("output_dir")) c.output_dir = detail::resolve(base_dir, doc.at("output_dir"));
    if (doc.contains("store")) c.store = detail::resolve(base_dir, doc.at("store"));
    c.seed = doc.value("seed", c.seed);
    c.mock = doc.value("mock", c.mock);
    if (doc.contains("mock_personas")) c.mock_personas = detail::resolve(base_dir, doc.at("mock_personas"));
    if (doc.contains("prompt_config")) c.prompt_config = detail::resolve(base_dir, doc.at("prompt_config"));
    if (doc.contains("bootstrap")) {
      const auto& b = doc.at("bootstrap");
      c.bootstrap_iterations = b.value("iterations", c.bootstrap_iterations);
      c.bootstrap_sample_size = b.value("sample_size", c.bootstrap_sample_size);
    }
    if (doc.contains("mds_transform")) {
      const auto t = doc.at("mds_transform").get<std::string>();
      if (t == "one-minus-r") c.structure.transform = DissimilarityTransform::OneMinusR;
      else if (t == "sqrt-two-one-minus-r") c.structure.transform = DissimilarityTransform::SqrtTwoOneMinusR;
      else fail(Errc::InvalidArgument, "unknown mds_transform '" + t + "'");
    }
    c.structure.procrustes.allow_reflection = doc.value("allow_reflection", true);
    if (doc.contains("hedonism")) c.hedonism = detail::parse_hedonism(doc.at("hedonism"));
    c.ipsatize = doc.value("ipsatize", false);
  } catch (const nlohmann::json::exception& e) {
    fail(Errc::MalformedDocument, std::string("experiment config: ") + e.what());
  }
  c.endpoint.validate();
  c.sampling.validate();
  return c;
}

inline ExperimentConfig load_experiment_config(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Errc::IoError, "cannot open config '" + path.string() + "'");
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    fail(Errc::MalformedDocument, path.string() + ": " + e.what());
  }
  return experiment_config_from_json(doc, path.parent_path());
}

inline void require_file(const fs::path& p, const std::string& what) {
  if (!fs::is_regular_file(p)) fail(Errc::IoError, what + " '" + p.string() + "' does not exist");
}

// ---------------------------------------------------------------------------
// Instruments

struct Instruments {
  Questionnaire values;
  std::vector<ValueId> value_ids;  // per construct of `values`
  std::vector<Questionnaire> behaviors;
  std::vector<std::string> behavior_labels;
  PromptConfig prompts;
};

inline Instruments load_instruments(const ExperimentConfig& cfg) {
  Instruments in;
  require_file(cfg.value_questionnaire, "value questionnaire");
  in.values = load_questionnaire_file(cfg.value_questionnaire.string());
  in.value_ids = value_constructs(in.values);
  std::set<std::string> seen;
  for (const auto& p : cfg.behavior_questionnaires) {
    require_file(p, "behavior questionnaire");
    in.behaviors.push_back(load_questionnaire_file(p.string()));
    for (const auto& c : in.behaviors.back().constructs) {
      if (!seen.insert(c).second)
        fail(Errc::MalformedDocument, "behavior construct '" + c + "' appears in more than one questionnaire");
      in.behavior_labels.push_back(c);
    }
  }
  if (cfg.prompt_config) in.prompts = load_prompt_config(cfg.prompt_config->string());
  return in;
}

// ---------------------------------------------------------------------------
// Mock personas

inline MockPersona persona_from_json(const nlohmann::json& j) {
  MockPersona p;
  p.mean_rating = j.at("mean_rating").get<std::map<std::string, double>>();
  p.noise_sd = j.value("noise_sd", 0.0);
  p.seed = j.value("seed", std::uint64_t{0});
  p.latent_sd = j.value("latent_sd", 0.0);
  if (j.contains("latent_angle")) p.latent_angle = j.at("latent_angle").get<std::map<std::string, double>>();
  if (j.contains("construct_noise_sd"))
    p.construct_noise_sd = j.at("construct_noise_sd").get<std::map<std::string, double>>();
  if (p.noise_sd < 0.0 || p.latent_sd < 0.0) fail(Errc::InvalidArgument, "mock persona spreads must be non-negative");
  return p;
}

/// `{"personas": {"power": {...}, ..., "unprimed": {...}}}`
inline MockPersonaSet load_mock_personas(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Errc::IoError, "cannot open mock personas '" + path.string() + "'");
  MockPersonaSet set;
  try {
    auto doc = nlohmann::json::parse(in);
    for (const auto& [name, spec] : doc.at("personas").items()) {
      if (name == "unprimed") {
        set.at(std::nullopt) = persona_from_json(spec);
        continue;
      }
      auto v = parse_value(name);
      if (!v) fail(Errc::MalformedDocument, path.string() + ": unknown persona '" + name + "'");
      set.at(*v) = persona_from_json(spec);
    }
  } catch (const nlohmann::json::exception& e) {
    fail(Errc::MalformedDocument, path.string() + ": " + e.what());
  }
  return set;
}

inline std::unique_ptr<ChatTransport> make_transport(const ExperimentConfig& cfg, const Instruments& in) {
  if (cfg.mock) {
    MockPersonaSet personas;
    if (cfg.mock_personas) {
      personas = load_mock_personas(*cfg.mock_personas);
    } else {
      std::vector<std::string> statement_behaviors;
      if (cfg.statement_pool && fs::exists(*cfg.statement_pool))
        statement_behaviors = load_statements_file(cfg.statement_pool->string()).behaviors;
      personas = planted_circumplex_personas(in.values, in.behaviors, statement_behaviors,
                                             derive_seed(cfg.seed, "mock"));
    }
    return std::make_unique<MockTransport>(std::move(personas), cfg.model_name());
  }
  EndpointConfig endpoint = cfg.endpoint;
  if (endpoint.api_key.empty() && !endpoint.api_key_env.empty())
    if (const char* key = std::getenv(endpoint.api_key_env.c_str())) endpoint.api_key = key;
  return std::make_unique<HttpTransport>(std::move(endpoint));
}

// ---------------------------------------------------------------------------
// Survey plan

struct SurveyTask {
  std::size_t slot;
  std::uint64_t repeat;
  AssembledPrompt prompt;
};

inline std::vector<std::size_t> active_slots(const ExperimentConfig& cfg) {
  if (cfg.condition == ConditionKind::Unprimed) return {kUnprimedSlot};
  std::vector<std::size_t> slots;
  for (std::size_t s = 0; s < kPrimeSlots; ++s) slots.push_back(s);
  return slots;
}

inline PrimingCondition value_condition(std::size_t slot) {
  if (slot == kUnprimedSlot) return Unprimed{};
  return PrimingOnly{kAllValues[slot]};
}

inline std::vector<SurveyTask> value_survey_tasks(const ExperimentConfig& cfg, const Instruments& in) {
  std::vector<SurveyTask> tasks;
  for (std::size_t slot : active_slots(cfg)) {
    const PrimingCondition cond = value_condition(slot);
    for (const auto& item : in.values.items) {
      const AssembledPrompt prompt = assemble(cond, item, in.values.scale, ResponseFormat::LikertDigit, in.prompts);
      for (std::uint64_t r = 0; r < cfg.sampling.repeats; ++r) tasks.push_back({slot, r, prompt});
    }
  }
  return tasks;
}

/// Answers given to `q` under `cond` on one repeat, read from the store.
inline Answers stored_answers(const ResponseStore& store, const std::string& model, const SamplingConfig& sampling,
                              const Questionnaire& q, const PrimingCondition& cond, std::uint64_t repeat,
                              const PromptConfig& prompts) {
  Answers out;
  for (const auto& item : q.items) {
    const AssembledPrompt p = assemble(cond, item, q.scale, ResponseFormat::LikertDigit, prompts);
    auto rec = store.find({p.content_hash, model, sampling.temperature, repeat});
    if (!rec) continue;
    if (auto* v = std::get_if<int>(&rec->parsed)) out.emplace(item.id, *v);
  }
  return out;
}

/// Context that precedes behavior items for one (slot, repeat). Conditions that
/// need the filled value questionnaire return nullopt if it is incomplete.
inline std::optional<PrimingCondition> behavior_condition(const ExperimentConfig& cfg, const Instruments& in,
                                                          const ResponseStore& store, std::size_t slot,
                                                          std::uint64_t repeat) {
  if (slot == kUnprimedSlot) return PrimingCondition{Unprimed{}};
  const ValueId v = kAllValues[slot];
  auto transcript = [&]() -> std::optional<std::string> {
    const Answers a = stored_answers(store, cfg.model_name(), cfg.sampling, in.values, PrimingOnly{v}, repeat,
                                     in.prompts);
    try {
      return render_filled_pvq(in.values, a);
    } catch (const Error& e) {
      if (e.code() == Errc::IncompleteAnswers) return std::nullopt;
      throw;
    }
  };
  switch (cfg.condition) {
    case ConditionKind::PrimingOnly: return PrimingCondition{PrimingOnly{v}};
    case ConditionKind::Unprimed: return PrimingCondition{Unprimed{}};
    case ConditionKind::TestOnly: {
      auto t = transcript();
      if (!t) return std::nullopt;
      return PrimingCondition{TestOnly{std::move(*t), v}};
    }
    case ConditionKind::PrimingAndTest: {
      auto t = transcript();
      if (!t) return std::nullopt;
      return PrimingCondition{PrimingAndTest{v, std::move(*t)}};
    }
  }
  return std::nullopt;
}

struct BehaviorPlan {
  std::vector<SurveyTask> tasks;
  std::size_t skipped_repeats = 0;  // no complete transcript available
};

inline BehaviorPlan behavior_survey_tasks(const ExperimentConfig& cfg, const Instruments& in,
                                          const ResponseStore& store) {
  BehaviorPlan plan;
  if (in.behaviors.empty()) return plan;
  for (std::size_t slot : active_slots(cfg))
    for (std::uint64_t r = 0; r < cfg.sampling.repeats; ++r) {
      auto cond = behavior_condition(cfg, in, store, slot, r);
      if (!cond) {
        ++plan.skipped_repeats;
        continue;
      }
      for (const auto& q : in.behaviors)
        for (const auto& item : q.items)
          plan.tasks.push_back({slot, r, assemble(*cond, item, q.scale, ResponseFormat::LikertDigit, in.prompts)});
    }
  return plan;
}

/// Samples every task through the cache with up to `max_in_flight` workers.
/// Records come back in task order; the first failure stops the run after
/// in-flight work finishes, and everything already stored stays stored.
inline std::vector<ResponseRecord> run_tasks(const std::vector<SurveyTask>& tasks, ResponseStore& store,
                                             ChatTransport& transport, const SamplingConfig& sampling,
                                             std::size_t max_in_flight) {
  std::vector<ResponseRecord> out(tasks.size());
  std::atomic<std::size_t> next{0};
  std::atomic<bool> stop{false};
  std::mutex err_mu;
  std::exception_ptr err;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= tasks.size() || stop.load()) return;
      const auto& t = tasks[i];
      try {
        out[i] = cached_complete(store, transport, t.prompt, sampling, t.repeat);
      } catch (const Error& e) {
        std::lock_guard lock(err_mu);
        if (!err)
          err = std::make_exception_ptr(Error(e.code(), "item '" + t.prompt.item_id + "' under " +
                                                            describe(t.prompt.condition).str() + ", repeat " +
                                                            std::to_string(t.repeat) + ": " + e.detail()));
        stop = true;
      } catch (...) {
        std::lock_guard lock(err_mu);
        if (!err) err = std::current_exception();
        stop = true;
      }
    }
  };
  const std::size_t n_workers = std::max<std::size_t>(1, std::min(max_in_flight, tasks.size()));
  if (n_workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t k = 0; k < n_workers; ++k) pool.emplace_back(worker);
  }
  if (err) std::rethrow_exception(err);
  return out;
}

// ---------------------------------------------------------------------------
// Output helpers

inline void write_text_file(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(Errc::IoError, "cannot write '" + path.string() + "'");
  out << content;
  if (!out) fail(Errc::IoError, "write to '" + path.string() + "' failed");
}

inline std::string read_text_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Errc::IoError, "cannot read '" + path.string() + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

/// Rewrites `manifest.json`: every other file under `dir` with its digest.
inline void write_manifest(const fs::path& dir) {
  std::vector<fs::path> files;
  for (const auto& entry : fs::recursive_directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().filename() != "manifest.json") files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  nlohmann::json artifacts = nlohmann::json::array();
  for (const auto& f : files) {
    const std::string content = read_text_file(f);
    artifacts.push_back({{"path", fs::relative(f, dir).generic_string()},
                         {"sha256", sha256_hex(content)},
                         {"bytes", content.size()}});
  }
  write_text_file(dir / "manifest.json", dump_json_17({{"artifacts", artifacts}}));
}

// ---------------------------------------------------------------------------
// survey

struct SurveySummary {
  std::size_t value_records = 0;
  std::size_t behavior_records = 0;
  std::size_t skipped_repeats = 0;
  std::size_t transport_calls = 0;
};

inline SurveySummary run_survey(const ExperimentConfig& cfg, const Instruments& in, ResponseStore& store,
                                ChatTransport& transport) {
  SurveySummary s;
  const std::size_t calls_before = transport.calls();
  // Test conditions read value answers given under priming, so the value
  // questionnaire always runs first and under PrimingOnly.
  const auto value_tasks = value_survey_tasks(cfg, in);
  s.value_records = run_tasks(value_tasks, store, transport, cfg.sampling, cfg.endpoint.max_in_flight).size();
  const auto plan = behavior_survey_tasks(cfg, in, store);
  s.behavior_records = run_tasks(plan.tasks, store, transport, cfg.sampling, cfg.endpoint.max_in_flight).size();
  s.skipped_repeats = plan.skipped_repeats;
  s.transport_calls = transport.calls() - calls_before;
  return s;
}

inline SurveySummary cmd_survey(const ExperimentConfig& cfg, ChatTransport* transport_override = nullptr) {
  const Instruments in = load_instruments(cfg);
  fs::create_directories(cfg.output_dir);
  ResponseStore store(cfg.store_path());
  std::unique_ptr<ChatTransport> owned;
  ChatTransport* transport = transport_override;
  if (!transport) {
    owned = make_transport(cfg, in);
    transport = owned.get();
  }
  const SurveySummary s = run_survey(cfg, in, store, *transport);
  write_manifest(cfg.output_dir);
  return s;
}

// ---------------------------------------------------------------------------
// Pools

struct PoolBuild {
  RespondentPool pool;
  std::array<std::size_t, kPrimeSlots> incomplete{};
};

/// One respondent per (slot, repeat) whose value (and behavior) profiles are
/// complete; partially answered constructs score from the answered items.
inline PoolBuild build_pool(const ExperimentConfig& cfg, const Instruments& in, const ResponseStore& store) {
  PoolBuild b{RespondentPool(value_labels(), in.behavior_labels), {}};
  const ScoreOptions opts{cfg.ipsatize};
  for (std::size_t slot : active_slots(cfg))
    for (std::uint64_t r = 0; r < cfg.sampling.repeats; ++r) {
      const Answers va = stored_answers(store, cfg.model_name(), cfg.sampling, in.values, value_condition(slot), r,
                                        in.prompts);
      auto scored = score_responses(in.values, va, opts).ordered(in.values.constructs);
      auto cond = scored ? behavior_condition(cfg, in, store, slot, r) : std::nullopt;
      if (!scored || !cond) {
        ++b.incomplete[slot];
        continue;
      }
      Respondent resp;
      resp.values.assign(kValueCount, 0.0);
      for (std::size_t k = 0; k < in.value_ids.size(); ++k) resp.values[index_of(in.value_ids[k])] = (*scored)[k];
      bool complete = true;
      for (const auto& q : in.behaviors) {
        const Answers ba = stored_answers(store, cfg.model_name(), cfg.sampling, q, *cond, r, in.prompts);
        auto bs = score_responses(q, ba, opts).ordered(q.constructs);
        if (!bs) {
          complete = false;
          break;
        }
        resp.behaviors.insert(resp.behaviors.end(), bs->begin(), bs->end());
      }
      if (!complete) {
        ++b.incomplete[slot];
        continue;
      }
      b.pool.add(slot, std::move(resp));
    }
  return b;
}

/// Every respondent of the weighted slots, each weighted w_slot / |slot|:
/// the exact mixture the population sampler draws from.
inline std::pair<std::pair<DataMatrix, DataMatrix>, std::vector<double>> pooled_data(
    const RespondentPool& pool, const PopulationWeights& weights) {
  std::vector<Draw> draws;
  std::vector<double> row_weights;
  for (std::size_t s = 0; s < kPrimeSlots; ++s) {
    if (weights.slot(s) <= 0.0) continue;
    if (pool.size(s) == 0) fail(Errc::EmptyPoolForWeightedPrime, "no respondents for " + slot_name(s));
    for (std::size_t i = 0; i < pool.size(s); ++i) {
      draws.push_back({s, i});
      row_weights.push_back(weights.slot(s) / static_cast<double>(pool.size(s)));
    }
  }
  return {materialize(pool, draws), std::move(row_weights)};
}

/// Reorders a reference matrix to the requested row/column label order.
inline CorrelationMatrix align_labels(const CorrelationMatrix& c, const std::vector<std::string>& rows,
                                      const std::vector<std::string>& cols, const std::string& what) {
  auto position = [&](const std::vector<std::string>& have, const std::string& want, bool is_row) {
    for (std::size_t i = 0; i < have.size(); ++i)
      if (have[i] == want || (is_row && parse_value(have[i]) && parse_value(have[i]) == parse_value(want))) return i;
    fail(Errc::LabelMismatch, what + " lacks label '" + want + "'");
  };
  if (c.rows() != rows.size() || c.cols() != cols.size())
    fail(Errc::ShapeMismatch, what + " is " + std::to_string(c.rows()) + "x" + std::to_string(c.cols()) +
                                  ", expected " + std::to_string(rows.size()) + "x" + std::to_string(cols.size()));
  const bool square = c.row_labels == c.col_labels;
  CorrelationMatrix out{rows, cols, Matrix(rows.size(), cols.size()), false};
  std::vector<std::size_t> ri, ci;
  for (const auto& r : rows) ri.push_back(position(c.row_labels, r, true));
  for (const auto& k : cols) ci.push_back(position(c.col_labels, k, square));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < cols.size(); ++j) out.cells(i, j) = c.cells(ri[i], ci[j]);
  out.symmetric = rows == cols && out.cells.is_symmetric(1e-12);
  out.validate();
  return out;
}

// ---------------------------------------------------------------------------
// score

struct References {
  CorrelationMatrix values;
  std::optional<CorrelationMatrix> behaviors;
};

inline References load_references(const ExperimentConfig& cfg, const Instruments& in) {
  if (!cfg.human_value_matrix) fail(Errc::InvalidArgument, "config needs human_value_matrix");
  require_file(*cfg.human_value_matrix, "human value matrix");
  References refs;
  refs.values = align_labels(read_matrix_csv_file(cfg.human_value_matrix->string()), value_labels(), value_labels(),
                             cfg.human_value_matrix->string());
  if (!refs.values.symmetric) fail(Errc::NotSymmetric, "human value matrix must be symmetric with unit diagonal");
  if (cfg.human_behavior_matrix && !in.behavior_labels.empty()) {
    require_file(*cfg.human_behavior_matrix, "human behavior matrix");
    refs.behaviors = align_labels(read_matrix_csv_file(cfg.human_behavior_matrix->string()), value_labels(),
                                  in.behavior_labels, cfg.human_behavior_matrix->string());
  }
  return refs;
}

struct ScoreOutcome {
  Strategy strategy;
  PopulationWeights weights;
  std::optional<std::array<double, kValueCount>> model_specific_scores;
  CorrelationMatrix model_values;
  StructureComparison structure;
  double structure_vectorized_r = 0.0;
  BootstrapReport structure_bootstrap;
  std::optional<CorrelationMatrix> model_value_behavior;
  std::optional<double> s_b;
  std::optional<BootstrapReport> behavior_bootstrap;
  std::vector<std::string> warnings;
};

/// Per-prime similarity of each primed pool's own value structure to the
/// human one. Pools too small or with constant columns score 0.
inline std::array<double, kValueCount> per_prime_scores(const RespondentPool& pool, const CorrelationMatrix& human,
                                                        std::vector<std::string>& warnings) {
  std::array<double, kValueCount> s{};
  for (std::size_t v = 0; v < kValueCount; ++v) {
    try {
      PopulationWeights point;
      point.w[v] = 1.0;
      const auto [data, w] = pooled_data(pool, point);
      s[v] = matrix_similarity(human, corr_matrix(data.first));
    } catch (const Error& e) {
      warnings.push_back("model-specific score for " + slot_name(v) + " set to 0: " + e.what());
      s[v] = 0.0;
    }
  }
  return s;
}

inline PopulationWeights strategy_weights(Strategy st, const std::optional<HumanPrior>& prior,
                                          const RespondentPool& pool, const CorrelationMatrix& human,
                                          ScoreOutcome& out) {
  const HumanPrior p = prior ? *prior : synthetic_symmetric_prior();
  switch (st) {
    case Strategy::Uniform: return uniform_weights();
    case Strategy::HNorm: return h_norm(p);
    case Strategy::HEven: return h_even(p);
    case Strategy::HNp: return h_np(p);
    case Strategy::ModelSpecific: {
      out.model_specific_scores = per_prime_scores(pool, human, out.warnings);
      return model_specific(*out.model_specific_scores);
    }
  }
  return uniform_weights();
}

inline ScoreOutcome score_pool(const RespondentPool& pool, Strategy strategy, const std::optional<HumanPrior>& prior,
                               const References& refs, const StructureOptions& structure, std::size_t iterations,
                               std::size_t sample_size, std::uint64_t seed) {
  ScoreOutcome out;
  out.strategy = strategy;
  out.weights = strategy_weights(strategy, prior, pool, refs.values, out);
  const auto [data, row_w] = pooled_data(pool, out.weights);
  out.model_values = corr_matrix(data.first, row_w);
  out.structure = compare_structure(refs.values, out.model_values, structure);
  if (out.structure.model.negative_eigenvalues > 0)
    out.warnings.push_back("model MDS clamped " + std::to_string(out.structure.model.negative_eigenvalues) +
                           " negative eigenvalue(s)");
  if (out.structure.human.negative_eigenvalues > 0)
    out.warnings.push_back("human MDS clamped " + std::to_string(out.structure.human.negative_eigenvalues) +
                           " negative eigenvalue(s)");
  out.structure_vectorized_r = matrix_similarity(refs.values, out.model_values);
  out.structure_bootstrap = bootstrap_similarity(pool, out.weights, refs.values, ComparisonKind::Structure,
                                                 {iterations, sample_size, derive_seed(seed, "bootstrap/structure")});
  if (refs.behaviors && !pool.behavior_labels().empty()) {
    out.model_value_behavior = value_behavior_matrix(data.first, data.second, row_w);
    out.s_b = behavior_score(*refs.behaviors, *out.model_value_behavior);
    out.behavior_bootstrap = bootstrap_similarity(pool, out.weights, *refs.behaviors, ComparisonKind::Behavior,
                                                  {iterations, sample_size, derive_seed(seed, "bootstrap/behavior")});
  }
  return out;
}

inline nlohmann::json to_json(const BootstrapReport& r) {
  return {{"iterations", r.iterations}, {"sample_size", r.sample_size}, {"correlations", r.correlations},
          {"mean_r", r.mean_r},         {"t_statistic", r.t_statistic}, {"p_value", r.p_value},
          {"seed", r.seed},             {"degenerate", r.degenerate}};
}

inline nlohmann::json to_json(const ProcrustesResult& p) {
  return {{"rotation", {{p.rotation(0, 0), p.rotation(0, 1)}, {p.rotation(1, 0), p.rotation(1, 1)}}},
          {"scale", p.scale},
          {"translation", {p.translation[0], p.translation[1]}},
          {"disparity", p.disparity},
          {"reflected", p.reflected}};
}

inline nlohmann::json to_json(const PopulationWeights& w) {
  nlohmann::json j = nlohmann::json::object();
  for (std::size_t s = 0; s < kPrimeSlots; ++s) j[slot_name(s)] = w.slot(s);
  return j;
}

inline nlohmann::json report_json(const ExperimentConfig& cfg, const ScoreOutcome& o, const PoolBuild& pb) {
  nlohmann::json sizes = nlohmann::json::object(), incomplete = nlohmann::json::object();
  for (std::size_t s = 0; s < kPrimeSlots; ++s) {
    sizes[slot_name(s)] = pb.pool.size(s);
    incomplete[slot_name(s)] = pb.incomplete[s];
  }
  nlohmann::json j = {
      {"strategy", std::string(strategy_name(o.strategy))},
      {"condition", std::string(condition_kind_name(cfg.condition))},
      {"model_name", cfg.model_name()},
      {"temperature", cfg.sampling.temperature},
      {"seed", cfg.seed},
      {"weights", to_json(o.weights)},
      {"pool_sizes", sizes},
      {"incomplete_respondents", incomplete},
      {"structure",
       {{"s_v", o.structure.score},
        {"vectorized_r", o.structure_vectorized_r},
        {"procrustes", to_json(o.structure.alignment)},
        {"bootstrap", to_json(o.structure_bootstrap)}}},
      {"warnings", o.warnings},
  };
  if (o.model_specific_scores) {
    nlohmann::json s = nlohmann::json::object();
    for (std::size_t v = 0; v < kValueCount; ++v) s[slot_name(v)] = (*o.model_specific_scores)[v];
    j["model_specific_scores"] = s;
  }
  if (o.s_b) j["behavior"] = {{"s_b", *o.s_b}, {"bootstrap", to_json(*o.behavior_bootstrap)}};
  return j;
}

inline std::string embedding_csv(const Embedding& e, const Matrix& points) {
  return matrix_csv_string(e.labels, {"x", "y"}, points);
}

/// Writes the report and every intermediate matrix under `dir`, names tagged with `suffix`.
inline void write_score_artifacts(const fs::path& dir, const std::string& suffix, const nlohmann::json& report,
                                  const ScoreOutcome& o) {
  write_text_file(dir / ("report" + suffix + ".json"), dump_json_17(report));
  write_text_file(dir / ("model_value_corr" + suffix + ".csv"),
                  matrix_csv_string(o.model_values.row_labels, o.model_values.col_labels, o.model_values.cells));
  write_text_file(dir / ("mds_human" + suffix + ".csv"), embedding_csv(o.structure.human, o.structure.human.points));
  write_text_file(dir / ("mds_model" + suffix + ".csv"), embedding_csv(o.structure.model, o.structure.model.points));
  write_text_file(dir / ("mds_model_aligned" + suffix + ".csv"),
                  embedding_csv(o.structure.model, apply_transform(o.structure.alignment, o.structure.model.points)));
  if (o.model_value_behavior)
    write_text_file(dir / ("model_value_behavior_corr" + suffix + ".csv"),
                    matrix_csv_string(o.model_value_behavior->row_labels, o.model_value_behavior->col_labels,
                                      o.model_value_behavior->cells));
}

struct ScoreRun {
  PoolBuild pools;
  ScoreOutcome outcome;
  nlohmann::json report;
};

inline ScoreRun cmd_score(const ExperimentConfig& cfg) {
  const Instruments in = load_instruments(cfg);
  const References refs = load_references(cfg, in);
  std::optional<HumanPrior> prior;
  if (cfg.prior) prior = load_prior_file(cfg.prior->string());
  require_file(cfg.store_path(), "response store");
  ResponseStore store(cfg.store_path());
  PoolBuild pools = build_pool(cfg, in, store);
  ScoreOutcome outcome = score_pool(pools.pool, cfg.strategy, prior, refs, cfg.structure, cfg.bootstrap_iterations,
                                    cfg.bootstrap_sample_size, cfg.seed);
  nlohmann::json report = report_json(cfg, outcome, pools);
  write_score_artifacts(cfg.output_dir, "", report, outcome);
  write_manifest(cfg.output_dir);
  return {std::move(pools), std::move(outcome), std::move(report)};
}

// ---------------------------------------------------------------------------
// compare-strategies

struct StrategyRow {
  Strategy strategy;
  ScoreOutcome outcome;
};

inline std::string strategies_csv(const std::vector<StrategyRow>& rows) {
  std::ostringstream os;
  os << "strategy,structure_mean_r,s_v,structure_p,behavior_mean_r,s_b,behavior_p\n";
  for (const auto& r : rows) {
    const auto& o = r.outcome;
    os << strategy_name(r.strategy) << ',' << format_real(o.structure_bootstrap.mean_r) << ','
       << format_real(o.structure.score) << ',' << format_real(o.structure_bootstrap.p_value) << ',';
    if (o.behavior_bootstrap)
      os << format_real(o.behavior_bootstrap->mean_r) << ',' << format_real(*o.s_b) << ','
         << format_real(o.behavior_bootstrap->p_value);
    else
      os << ",,";
    os << '\n';
  }
  return os.str();
}

inline std::vector<StrategyRow> cmd_compare_strategies(const ExperimentConfig& cfg) {
  const Instruments in = load_instruments(cfg);
  const References refs = load_references(cfg, in);
  std::optional<HumanPrior> prior;
  if (cfg.prior) prior = load_prior_file(cfg.prior->string());
  require_file(cfg.store_path(), "response store");
  ResponseStore store(cfg.store_path());
  const PoolBuild pools = build_pool(cfg, in, store);
  std::vector<StrategyRow> rows;
  for (Strategy st : kAllStrategies) {
    ScoreOutcome o = score_pool(pools.pool, st, prior, refs, cfg.structure, cfg.bootstrap_iterations,
                                cfg.bootstrap_sample_size, cfg.seed);
    write_score_artifacts(cfg.output_dir, "_" + std::string(strategy_name(st)), report_json(cfg, o, pools), o);
    rows.push_back({st, std::move(o)});
  }
  write_text_file(cfg.output_dir / "strategies.csv", strategies_csv(rows));
  write_manifest(cfg.output_dir);
  return rows;
}

// ---------------------------------------------------------------------------
// persona

struct PersonaRun {
  std::vector<BehaviorStatement> statements;
  AgreementMatrix values;
  AgreementMatrix higher_order;
  CorrelationMatrix higher_order_correlations;
  std::optional<AgreementMatrix> filtered;
  std::size_t transport_calls = 0;
};

inline std::string agreement_csv(const AgreementMatrix& m) { return matrix_csv_string(m.rows, m.behaviors, m.cells); }

inline PersonaRun cmd_persona(const ExperimentConfig& cfg, ChatTransport* transport_override = nullptr) {
  if (!cfg.statement_pool) fail(Errc::InvalidArgument, "config needs statement_pool");
  require_file(*cfg.statement_pool, "statement pool");
  const StatementPool statements = load_statements_file(cfg.statement_pool->string());
  std::unique_ptr<ChatTransport> owned;
  ChatTransport* transport = transport_override;
  if (!transport) {
    owned = make_transport(cfg, load_instruments(cfg));
    transport = owned.get();
  }
  PromptConfig prompts;
  if (cfg.prompt_config) prompts = load_prompt_config(cfg.prompt_config->string());

  PersonaRun run;
  run.statements = sample_statements(statements, cfg.n_statements, derive_seed(cfg.seed, "persona/statements"));
  const LikertScale binary{0, 1, {}};
  std::vector<SurveyTask> tasks;
  for (ValueId v : kAllValues)
    for (const auto& s : run.statements) {
      const Item item{s.id, s.statement, s.behavior_name, !s.agree_means_behavior};
      const AssembledPrompt p = assemble(PrimingOnly{v}, item, binary, ResponseFormat::YesNo, prompts);
      for (std::uint64_t r = 0; r < cfg.persona_repeats; ++r) tasks.push_back({index_of(v), r, p});
    }
  fs::create_directories(cfg.output_dir);
  ResponseStore store(cfg.store_path());
  const std::size_t before = transport->calls();
  const auto records = run_tasks(tasks, store, *transport, cfg.sampling, cfg.endpoint.max_in_flight);
  run.transport_calls = transport->calls() - before;

  run.values = agreement_matrix(records, run.statements);
  run.higher_order = aggregate_higher_order(run.values, cfg.hedonism);
  run.higher_order_correlations = value_vector_correlations(run.higher_order);
  write_text_file(cfg.output_dir / "agreement_values.csv", agreement_csv(run.values));
  write_text_file(cfg.output_dir / "agreement_higher_order.csv", agreement_csv(run.higher_order));
  write_text_file(cfg.output_dir / "higher_order_correlations.csv",
                  matrix_csv_string(run.higher_order_correlations.row_labels,
                                    run.higher_order_correlations.col_labels, run.higher_order_correlations.cells));
  if (cfg.behavior_tag) {
    run.filtered = filter_behaviors(run.higher_order, has_tag(*cfg.behavior_tag));
    write_text_file(cfg.output_dir / ("agreement_higher_order_" + *cfg.behavior_tag + ".csv"),
                    agreement_csv(*run.filtered));
  }
  write_manifest(cfg.output_dir);
  return run;
}

}  // namespace valuesim
