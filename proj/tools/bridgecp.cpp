#include <iostream>

#include "CLI11.hpp"
#include "bridgecp/cli.hpp"

using namespace bridgecp;

namespace {

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<int> model;
};

void add_common(CLI::App* cmd, Common& c, bool with_model) {
  cmd->add_option("--config", c.config, "run configuration file (key = value)");
  cmd->add_option("--seed", c.seed, "master seed (overrides the config)");
  cmd->add_option("--out", c.out, "output directory (overrides the config)");
  if (with_model) cmd->add_option("--model", c.model, "named model 1..8 (overrides the config)")->check(CLI::Range(1, 8));
}

RunConfig build_config(const Common& c) {
  RunConfig config;
  if (!c.config.empty()) config = load_config(c.config);
  Overrides o;
  o.seed = c.seed;
  if (c.out) o.out = *c.out;
  o.model = c.model;
  apply_overrides(config, o);
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bayesian bridge random-effects logistic change-point models"};
  app.require_subcommand(1);

  Common sim_opts, fit_opts;
  auto* sim = app.add_subcommand("simulate", "generate a synthetic cohort and its truth record");
  add_common(sim, sim_opts, false);
  auto* fit = app.add_subcommand("fit", "run the sampler and write draws, diagnostics and summaries");
  add_common(fit, fit_opts, true);

  std::vector<std::string> compare_runs;
  std::optional<std::string> compare_out;
  auto* compare = app.add_subcommand("compare", "compare fitted runs on the same panel by DIC and LPML");
  compare->add_option("runs", compare_runs, "fit output directories")->required()->expected(2, -1);
  compare->add_option("--out", compare_out, "directory for compare.csv");

  std::string summarize_run;
  std::optional<std::string> summarize_out;
  auto* summarize = app.add_subcommand("summarize", "re-summarize the draws of a fit directory");
  summarize->add_option("run", summarize_run, "fit output directory")->required();
  summarize->add_option("--out", summarize_out, "output directory (default: the run directory)");

  std::string diagnose_run;
  std::optional<std::string> diagnose_out;
  std::size_t max_lag = 40;
  auto* diagnose = app.add_subcommand("diagnose", "PSRF, ACF and ESS for every scalar parameter");
  diagnose->add_option("run", diagnose_run, "fit output directory")->required();
  diagnose->add_option("--out", diagnose_out, "output directory (default: the run directory)");
  diagnose->add_option("--max-lag", max_lag, "largest ACF lag reported");

  CLI11_PARSE(app, argc, argv);

  try {
    if (sim->parsed()) {
      cmd_simulate(build_config(sim_opts), std::cout);
    } else if (fit->parsed()) {
      cmd_fit(build_config(fit_opts), std::cout);
    } else if (compare->parsed()) {
      std::vector<std::filesystem::path> dirs(compare_runs.begin(), compare_runs.end());
      std::optional<std::filesystem::path> out;
      if (compare_out) out = *compare_out;
      cmd_compare(dirs, out, std::cout);
    } else if (summarize->parsed()) {
      cmd_summarize(summarize_run, summarize_out.value_or(summarize_run), std::cout);
    } else if (diagnose->parsed()) {
      cmd_diagnose(diagnose_run, diagnose_out.value_or(diagnose_run), max_lag, std::cout);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
