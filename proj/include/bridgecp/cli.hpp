#pragma once

// Run configuration (flat `key = value` text) and the batch commands behind
// the command-line tool.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "bridgecp/diagnostics.hpp"
#include "bridgecp/io.hpp"
#include "bridgecp/summary.hpp"

namespace bridgecp {

class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

struct RunConfig {
  std::optional<std::uint64_t> seed;  // mandatory before any command runs
  std::optional<std::filesystem::path> data;  // panel CSV
  std::optional<CohortShape> cohort;          // or a synthetic cohort
  TrueParams truth = default_truth();
  PanelOptions panel;
  ModelSpec spec = model_spec(1);
  SamplerConfig sampler;
  DevianceMode deviance = DevianceMode::conditional;
  PValueMode pvalue = PValueMode::conditional;
  SummaryOptions summary;
  std::filesystem::path out = "out";

  // Resolved settings as text, one `key = value` per line, excluding the
  // output directory. Parsing it back gives the same configuration.
  std::string canonical_text() const;
  std::string hash() const;
  std::uint64_t require_seed() const;
};

// Keys not listed in the documentation are rejected with their line number.
RunConfig parse_config(std::istream& in, const std::string& origin = "config");
RunConfig load_config(const std::filesystem::path& path);

// Command-line overrides applied after the file.
struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::filesystem::path> out;
  std::optional<int> model;
};
void apply_overrides(RunConfig& config, const Overrides& overrides);

// The panel for fit: loaded from `data` or generated from `cohort`.
Panel resolve_panel(const RunConfig& config);

struct SimulateResult {
  std::size_t n_clusters = 0;
  std::size_t n_records = 0;
  std::filesystem::path panel_path;
  std::filesystem::path truth_path;
};
SimulateResult cmd_simulate(const RunConfig& config, std::ostream& log);

struct FitResult {
  PosteriorDraws draws;
  FitSummary fit;
  PosteriorSummary summary;
  std::filesystem::path report_path;
  std::filesystem::path draws_path;
};
FitResult cmd_fit(const RunConfig& config, std::ostream& log);

// Re-summarizes the draws of a finished fit directory into `out`.
void cmd_summarize(const std::filesystem::path& run_dir, const std::filesystem::path& out,
                   std::ostream& log);

// PSRF / ACF / ESS for every scalar parameter of a fit directory.
void cmd_diagnose(const std::filesystem::path& run_dir, const std::filesystem::path& out,
                  std::size_t max_lag, std::ostream& log);

struct CompareRow {
  std::string run;
  std::string model;
  double d_bar = 0.0;
  double p_d = 0.0;
  double dic = 0.0;
  double lpml = 0.0;
  double dic_gap = 0.0;  // DIC minus the best DIC
  bool overwhelming = false;  // gap above 10
};
// Rejects runs whose panel hashes differ, naming both.
std::vector<CompareRow> cmd_compare(const std::vector<std::filesystem::path>& run_dirs,
                                    const std::optional<std::filesystem::path>& out,
                                    std::ostream& log);

// Report JSON of a fit, free of timestamps so reruns are byte-identical.
std::string report_json(const RunConfig& config, const Panel& panel, const PosteriorDraws& draws,
                        const FitSummary& fit, const PosteriorSummary& summary);

}  // namespace bridgecp
