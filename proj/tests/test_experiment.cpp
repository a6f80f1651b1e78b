#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <fstream>

#include "support.hpp"

using namespace valuesim;
using testing_support::fixture;
using testing_support::TempDir;

namespace {

ExperimentConfig small_config(const TempDir& dir, std::uint64_t repeats = 4) {
  ExperimentConfig cfg = load_experiment_config(fixture("experiment_mock.json"));
  cfg.output_dir = dir.path();
  cfg.sampling.repeats = repeats;
  cfg.bootstrap_iterations = 10;
  cfg.bootstrap_sample_size = 100;
  cfg.n_statements = 6;
  return cfg;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

/// Counts calls and refuses to answer; any use is a test failure.
class RefusingTransport : public ChatTransport {
 public:
  std::string model_name() const override { return "mock"; }
  std::string complete(const AssembledPrompt&, const SamplingConfig&, std::uint64_t) override {
    ++calls_;
    fail(Errc::NetworkError, "offline");
  }
};

int run_cli(const std::string& args) {
  const std::string cmd = std::string(VALUESIM_CLI) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST(Config, LoadsAndResolvesPaths) {
  const auto cfg = load_experiment_config(fixture("experiment_mock.json"));
  EXPECT_TRUE(cfg.mock);
  EXPECT_EQ(cfg.model_name(), "mock");
  EXPECT_EQ(cfg.sampling.repeats, 20u);
  EXPECT_EQ(cfg.sampling.temperature, 0.7);
  EXPECT_EQ(cfg.value_questionnaire, fixture("pvq_synthetic.json"));
  EXPECT_EQ(cfg.behavior_questionnaires.size(), 2u);
  EXPECT_EQ(cfg.bootstrap_iterations, 100u);
  EXPECT_EQ(cfg.bootstrap_sample_size, 500u);
  EXPECT_EQ(cfg.strategy, Strategy::Uniform);
  EXPECT_EQ(cfg.condition, ConditionKind::PrimingOnly);
  EXPECT_EQ(cfg.store_path(), cfg.output_dir / "responses.jsonl");
  const auto live = load_experiment_config(fixture("experiment_live.json"));
  EXPECT_FALSE(live.mock);
  EXPECT_EQ(live.endpoint.api_key_env, "VALUESIM_API_KEY");
}

TEST(Config, Errors) {
  const auto base = fixture("");
  auto doc = nlohmann::json::parse(slurp(fixture("experiment_mock.json")));
  auto with = [&](const char* key, nlohmann::json v) {
    auto d = doc;
    d[key] = std::move(v);
    return d;
  };
  EXPECT_ERRC(experiment_config_from_json(with("strategy", "best"), base), InvalidArgument);
  EXPECT_ERRC(experiment_config_from_json(with("condition", "primed"), base), InvalidArgument);
  EXPECT_ERRC(experiment_config_from_json(with("mds_transform", "log"), base), InvalidArgument);
  EXPECT_ERRC(experiment_config_from_json(with("seed", "x"), base), MalformedDocument);
  EXPECT_ERRC(experiment_config_from_json(with("sampling", {{"repeats", 0}}), base), InvalidArgument);
  auto no_values = doc;
  no_values.erase("value_questionnaire");
  EXPECT_ERRC(experiment_config_from_json(no_values, base), MalformedDocument);
  EXPECT_ERRC(load_experiment_config(fixture("nothing.json")), IoError);
  TempDir dir;
  ExperimentConfig cfg = small_config(dir);
  cfg.value_questionnaire = dir / "gone.json";
  EXPECT_ERRC(cmd_survey(cfg), IoError);
}

TEST(Pipeline, SurveyScoreAndWarmCache) {
  TempDir dir;
  const auto cfg = small_config(dir);
  const auto cold = cmd_survey(cfg);
  EXPECT_EQ(cold.value_records, 11u * 4u * 40u);
  EXPECT_EQ(cold.behavior_records, 11u * 4u * (60u + 24u));
  EXPECT_EQ(cold.transport_calls, cold.value_records + cold.behavior_records);
  EXPECT_EQ(cold.skipped_repeats, 0u);

  RefusingTransport offline;
  const auto warm = cmd_survey(cfg, &offline);
  EXPECT_EQ(warm.transport_calls, 0u);
  EXPECT_EQ(offline.calls(), 0u);
  EXPECT_EQ(warm.value_records, cold.value_records);

  const auto first = cmd_score(cfg);
  const std::string report1 = slurp(dir / "report.json");
  const auto second = cmd_score(cfg);
  EXPECT_EQ(slurp(dir / "report.json"), report1);
  EXPECT_EQ(first.report, second.report);

  for (std::size_t s = 0; s < kPrimeSlots; ++s) EXPECT_EQ(first.pools.pool.size(s), s == kUnprimedSlot ? 4u : 4u);
  const auto& r = first.report;
  EXPECT_EQ(r.at("strategy"), "uniform");
  EXPECT_EQ(r.at("model_name"), "mock");
  EXPECT_EQ(r.at("seed"), cfg.seed);
  EXPECT_EQ(r.at("structure").at("bootstrap").at("correlations").size(), 10u);
  EXPECT_TRUE(r.contains("behavior"));
  const double s_v = r.at("structure").at("s_v");
  EXPECT_GE(s_v, 0.0);
  EXPECT_LE(s_v, 1.0);
  for (const char* f : {"report.json", "model_value_corr.csv", "mds_human.csv", "mds_model.csv",
                        "mds_model_aligned.csv", "model_value_behavior_corr.csv", "manifest.json", "responses.jsonl"})
    EXPECT_TRUE(std::filesystem::exists(dir / f)) << f;
}

TEST(Pipeline, ManifestHashesArtifacts) {
  TempDir dir;
  const auto cfg = small_config(dir, 3);
  cmd_survey(cfg);
  cmd_score(cfg);
  const auto m = nlohmann::json::parse(slurp(dir / "manifest.json"));
  std::vector<std::string> paths;
  for (const auto& a : m.at("artifacts")) {
    const std::string p = a.at("path");
    paths.push_back(p);
    const std::string content = slurp(dir / p);
    EXPECT_EQ(a.at("sha256"), sha256_hex(content)) << p;
    EXPECT_EQ(a.at("bytes"), content.size()) << p;
  }
  EXPECT_TRUE(std::is_sorted(paths.begin(), paths.end()));
  EXPECT_EQ(std::count(paths.begin(), paths.end(), "manifest.json"), 0);
  EXPECT_EQ(std::count(paths.begin(), paths.end(), "report.json"), 1);
}

TEST(Pipeline, SelfReferenceScoresOne) {
  TempDir dir;
  auto cfg = small_config(dir, 6);
  cmd_survey(cfg);
  cmd_score(cfg);
  TempDir again;
  cfg.human_value_matrix = dir / "model_value_corr.csv";
  cfg.human_behavior_matrix = dir / "model_value_behavior_corr.csv";
  cfg.store = dir / "responses.jsonl";
  cfg.output_dir = again.path();
  const auto run = cmd_score(cfg);
  EXPECT_EQ(run.outcome.structure.score, 1.0);
  EXPECT_NEAR(*run.outcome.s_b, 1.0, 1e-12);
  EXPECT_NEAR(run.outcome.structure_vectorized_r, 1.0, 1e-12);
}

TEST(Pipeline, HnpEchoesPriorAndMissingStoreIsReported) {
  TempDir dir;
  auto cfg = small_config(dir, 3);
  cfg.strategy = Strategy::HNp;
  try {
    cmd_score(cfg);
    FAIL() << "expected IoError";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::IoError);
    EXPECT_NE(std::string(e.what()).find(cfg.store_path().string()), std::string::npos) << e.what();
  }
  cmd_survey(cfg);
  const auto run = cmd_score(cfg);
  EXPECT_EQ(run.report.at("weights").at("unprimed"), 0.53);
  EXPECT_EQ(run.outcome.weights.w_unprimed, 0.53);
}

TEST(Pipeline, CompareStrategies) {
  TempDir dir;
  const auto cfg = small_config(dir, 5);
  cmd_survey(cfg);
  const auto rows = cmd_compare_strategies(cfg);
  ASSERT_EQ(rows.size(), 5u);
  std::istringstream csv(slurp(dir / "strategies.csv"));
  std::string line;
  std::getline(csv, line);
  EXPECT_EQ(line, "strategy,structure_mean_r,s_v,structure_p,behavior_mean_r,s_b,behavior_p");
  std::size_t n = 0;
  while (std::getline(csv, line)) {
    const auto fields = detail::split_csv_line(line);
    ASSERT_EQ(fields.size(), 7u);
    EXPECT_EQ(fields[0], strategy_name(kAllStrategies[n]));
    for (std::size_t k : {1, 2, 4, 5}) {
      const double x = std::stod(fields[k]);
      EXPECT_GE(x, -1.0);
      EXPECT_LE(x, 1.0);
    }
    for (std::size_t k : {3, 6}) {
      const double p = std::stod(fields[k]);
      EXPECT_GE(p, 0.0);
      EXPECT_LE(p, 1.0);
    }
    ++n;
  }
  EXPECT_EQ(n, 5u);
  for (Strategy s : kAllStrategies)
    EXPECT_TRUE(std::filesystem::exists(dir / ("report_" + std::string(strategy_name(s)) + ".json")));
  const auto ms = nlohmann::json::parse(slurp(dir / "report_model-specific.json"));
  const auto& scores = ms.at("model_specific_scores");
  double total = 0;
  for (ValueId v : kAllValues) total += std::max(0.0, scores.at(std::string(value_name(v))).get<double>());
  for (ValueId v : kAllValues) {
    const std::string name(value_name(v));
    EXPECT_NEAR(ms.at("weights").at(name).get<double>(), std::max(0.0, scores.at(name).get<double>()) / total, 1e-15);
  }
}

TEST(Pipeline, TestOnlyConditionUsesTranscripts) {
  TempDir dir;
  auto cfg = small_config(dir, 2);
  cfg.condition = ConditionKind::TestOnly;
  const auto s = cmd_survey(cfg);
  EXPECT_EQ(s.skipped_repeats, 0u);
  std::size_t test_only = 0;
  for (const auto& r : ResponseStore(cfg.store_path()).records())
    test_only += r.condition.rfind("test-only:", 0) == 0;
  EXPECT_EQ(test_only, 10u * 2u * 84u);
  const auto run = cmd_score(cfg);
  EXPECT_EQ(run.report.at("condition"), "test-only");
  for (std::size_t v = 0; v < kValueCount; ++v) EXPECT_EQ(run.pools.pool.size(v), 2u);
}

TEST(Pipeline, UnprimedConditionSurveysOneSlot) {
  TempDir dir;
  auto cfg = small_config(dir, 2);
  cfg.condition = ConditionKind::Unprimed;
  const auto s = cmd_survey(cfg);
  EXPECT_EQ(s.value_records, 2u * 40u);
  EXPECT_ERRC(cmd_score(cfg), EmptyPoolForWeightedPrime);
}

TEST(Pipeline, Persona) {
  TempDir dir;
  auto cfg = small_config(dir);
  cfg.n_statements = 20;
  const auto run = cmd_persona(cfg);
  EXPECT_EQ(run.statements.size(), 10u * 20u);
  EXPECT_EQ(run.transport_calls, 10u * 200u);
  EXPECT_EQ(run.values.cells.rows(), 10u);
  EXPECT_EQ(run.higher_order.cells.rows(), 4u);
  ASSERT_TRUE(run.filtered);
  EXPECT_EQ(run.filtered->behaviors.size(), 3u);
  auto at = [&](HigherOrderValue a, HigherOrderValue b) {
    return run.higher_order_correlations.cells(index_of(a), index_of(b));
  };
  EXPECT_LT(at(HigherOrderValue::Conservation, HigherOrderValue::OpennessToChange), 0.0);
  EXPECT_LT(at(HigherOrderValue::SelfEnhancement, HigherOrderValue::SelfTranscendence), 0.0);
  for (const char* f : {"agreement_values.csv", "agreement_higher_order.csv", "higher_order_correlations.csv",
                        "agreement_higher_order_politically-conservative.csv"})
    EXPECT_TRUE(std::filesystem::exists(dir / f)) << f;
  RefusingTransport offline;
  const auto warm = cmd_persona(cfg, &offline);
  EXPECT_EQ(warm.transport_calls, 0u);
  EXPECT_EQ(warm.values.cells, run.values.cells);
}

TEST(Cli, ExitCodes) {
  TempDir dir;
  const std::string cfg = fixture("experiment_mock.json").string();
  const std::string out = "--out " + dir.path().string();
  EXPECT_EQ(run_cli(""), 1);
  EXPECT_EQ(run_cli("survey"), 1);
  EXPECT_EQ(run_cli("score --config " + cfg + " " + out + " --strategy best"), 1);
  EXPECT_EQ(run_cli("score --config " + (dir / "none.json").string()), 2);
  EXPECT_EQ(run_cli("score --config " + cfg + " " + out), 2);  // no responses yet
  EXPECT_EQ(run_cli("survey --config " + cfg + " " + out + " --seed 5"), 0);
  EXPECT_EQ(run_cli("score --config " + cfg + " " + out + " --seed 5 --strategy h-even"), 0);
  EXPECT_EQ(nlohmann::json::parse(slurp(dir / "report.json")).at("strategy"), "h-even");
  EXPECT_EQ(run_cli("compare-strategies --config " + cfg + " " + out + " --seed 5"), 0);
  EXPECT_TRUE(std::filesystem::exists(dir / "strategies.csv"));
  EXPECT_EQ(run_cli("--help"), 0);
}
