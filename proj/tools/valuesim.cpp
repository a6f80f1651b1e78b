#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "valuesim/valuesim.hpp"

namespace {

struct Overrides {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> strategy;
  std::optional<std::string> condition;
  std::optional<std::string> out;
  bool mock = false;
};

void add_common(CLI::App* cmd, Overrides& o, bool scoring) {
  cmd->add_option("--config", o.config, "experiment config (JSON)")->required();
  cmd->add_option("--seed", o.seed, "master seed");
  cmd->add_option("--condition", o.condition, "priming-only | test-only | priming-and-test | unprimed");
  cmd->add_option("--out", o.out, "output directory");
  cmd->add_flag("--mock", o.mock, "use mock personas instead of the endpoint");
  if (scoring) cmd->add_option("--strategy", o.strategy, "uniform | h-norm | h-even | h-np | model-specific");
}

valuesim::ExperimentConfig resolve(const Overrides& o) {
  using namespace valuesim;
  ExperimentConfig cfg = load_experiment_config(o.config);
  if (o.seed) cfg.seed = *o.seed;
  if (o.mock) cfg.mock = true;
  if (o.out) {
    cfg.output_dir = *o.out;
    if (!cfg.store) cfg.store = cfg.output_dir / "responses.jsonl";
  }
  if (o.strategy) {
    auto s = parse_strategy(*o.strategy);
    if (!s) fail(Errc::InvalidArgument, "unknown strategy '" + *o.strategy + "'");
    cfg.strategy = *s;
  }
  if (o.condition) {
    auto k = parse_condition_kind(*o.condition);
    if (!k) fail(Errc::InvalidArgument, "unknown condition '" + *o.condition + "'");
    cfg.condition = *k;
  }
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"valuesim: value-primed LLM population simulation"};
  app.require_subcommand(1);
  Overrides o;
  auto* survey = app.add_subcommand("survey", "administer questionnaires to primed pools");
  auto* persona = app.add_subcommand("persona", "value-persona behavior statements");
  auto* score = app.add_subcommand("score", "score stored responses against human references");
  auto* compare = app.add_subcommand("compare-strategies", "score under every weighting strategy");
  add_common(survey, o, false);
  add_common(persona, o, false);
  add_common(score, o, true);
  add_common(compare, o, false);
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  using namespace valuesim;
  try {
    const ExperimentConfig cfg = resolve(o);
    if (survey->parsed()) {
      const auto s = cmd_survey(cfg);
      std::cout << "survey: " << s.value_records << " value and " << s.behavior_records << " behavior responses, "
                << s.transport_calls << " new completions";
      if (s.skipped_repeats) std::cout << ", " << s.skipped_repeats << " repeats without a complete transcript";
      std::cout << "\n";
    } else if (persona->parsed()) {
      const auto r = cmd_persona(cfg);
      std::cout << "persona: " << r.statements.size() << " statements, " << r.transport_calls
                << " new completions, matrices in " << cfg.output_dir.lexically_normal().string() << "\n";
    } else if (score->parsed()) {
      const auto r = cmd_score(cfg);
      std::cout << "S_V " << format_real(r.outcome.structure.score) << "  mean_r "
                << format_real(r.outcome.structure_bootstrap.mean_r) << "  p "
                << format_real(r.outcome.structure_bootstrap.p_value);
      if (r.outcome.s_b) std::cout << "  S_B " << format_real(*r.outcome.s_b);
      std::cout << "\n";
      for (const auto& w : r.outcome.warnings) std::cerr << "warning: " << w << "\n";
    } else if (compare->parsed()) {
      const auto rows = cmd_compare_strategies(cfg);
      std::cout << strategies_csv(rows);
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.is_validation() ? 1 : 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
