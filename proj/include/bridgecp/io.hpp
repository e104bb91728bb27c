#pragma once

// Panel CSV ingestion and output, the synthetic cohort generator with its
// truth sidecar, and the draws file.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "bridgecp/mcmc.hpp"

namespace bridgecp {

inline const std::vector<std::string> kPanelColumns{"youth_id", "year", "age",
                                                    "repeat_offense", "severe", "outcome"};

// Header is mandatory; extra columns are ignored, missing ones rejected.
// Every error names the 1-based file row (the header is row 1).
Panel read_panel_csv(std::istream& in, const PanelOptions& options);
Panel load_panel(const std::filesystem::path& path, const PanelOptions& options);
void write_panel_csv(std::ostream& out, const Panel& panel);
void save_panel(const std::filesystem::path& path, const Panel& panel);

// Shortest decimal text that reads back to the same double.
std::string format_double(double v);

/// Shape of a synthetic cohort: cluster sizes plus the covariate laws.
struct CohortShape {
  std::map<int, int> cluster_sizes{{2, 326}, {3, 28}, {4, 3}, {5, 1}};
  // Age at the first charge ~ N(first_age_mean, age_sd) clamped to
  // [age_min, age_max] and rounded to 0.1; later charges add the elapsed years.
  double first_age_mean = 14.1;
  double age_sd = 1.8;
  double age_min = 9.0;
  double age_max = 19.0;
  double p_severe_first = 322.0 / 358.0;
  double p_severe_repeat = 284.0 / 395.0;
  // Relative weights for the year of the first charge, one per window year
  // (empty: block weights giving ~36% before 1995 and ~33% from 2000).
  std::vector<double> first_year_weights;
  // Years between successive charges ~ Geometric(gap_p) on {0, 1, ...}.
  double gap_p = 0.55;

  std::size_t n_clusters() const;
  std::size_t n_records() const;
  void validate(const PanelOptions& options) const;
};

/// Generating parameter values, keyed by design-column name.
struct TrueParams {
  std::map<std::string, double> beta1;
  std::map<std::string, double> beta2;
  double phi = 0.8;
  std::optional<int> T = 1995;
};

// Conditional log odds ratios with the change-point indicator at log(0.256);
// the intercept puts the pooled moving-forward rate near 0.7.
TrueParams default_truth();

struct Cohort {
  Panel panel;
  TrueParams truth;
  std::vector<double> B;  // per-cluster random effects used
  std::uint64_t seed = 0;
};

Cohort generate_cohort(const CohortShape& shape, const TrueParams& truth, std::uint64_t seed,
                       const PanelOptions& options = {});

// The full generating state as a ChainState for the given panel.
ChainState truth_state(const TrueParams& truth, const Panel& panel, std::vector<double> B);

std::string truth_json(const Cohort& cohort);
// Parses a truth sidecar; B is returned through `B` when non-null.
TrueParams parse_truth_json(const std::string& text, std::vector<double>* B = nullptr);

// Draws file: one CSV row per retained draw with chain, iteration, every
// parameter (B by cluster position) and the log likelihood, %.17g.
std::vector<std::string> draws_columns(const PosteriorDraws& draws);
void write_draws(std::ostream& out, const PosteriorDraws& draws);
// Reads a draws file back; per-observation log densities are recomputed
// from the panel.
PosteriorDraws read_draws(std::istream& in, const Panel& panel);

std::vector<std::string> split_csv_line(const std::string& line);

}  // namespace bridgecp
