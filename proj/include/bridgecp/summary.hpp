#pragma once

// Posterior summary tables: marginal odds ratios, the repeat-offense effect
// before and after the change-point, P[T = j], phi, and the by-year series.

#include <optional>
#include <string>
#include <vector>

#include "bridgecp/mcmc.hpp"

namespace bridgecp {

struct ScalarSummary {
  double mean = 0.0;
  double sd = 0.0;
  double lower = 0.0;  // 2.5%
  double upper = 0.0;  // 97.5%
};
// Mean, SD (n - 1) and the central 95% interval of a draw column.
ScalarSummary summarize_values(std::span<const double> values);

struct OddsRow {
  std::string name;
  ScalarSummary odds;  // exp(phi beta_k)
};

struct ChangepointRow {
  int year = 0;
  double frequency = 0.0;  // share of draws with T = year
  std::optional<ScalarSummary> gamma;  // when gamma is sampled
};

struct ProfileSpec {
  std::string name;
  std::optional<double> age;  // unset: the panel's age center
  int repeat_offense = 0;
  int severe = 0;
};
std::vector<ProfileSpec> default_profiles();

struct SeriesPoint {
  int year = 0;
  std::size_t n_records = 0;
  std::optional<double> observed;  // observed proportion moving forward
  double mean = 0.0;
  double lower = 0.0;
  double upper = 0.0;
};

struct ProfileSeries {
  ProfileSpec profile;
  std::vector<SeriesPoint> points;
};

struct PosteriorSummary {
  std::vector<OddsRow> odds;
  std::optional<ScalarSummary> repeat_before;  // exp(phi beta_repeat)
  std::optional<ScalarSummary> repeat_after;   // exp(phi (beta_repeat + beta_cp_repeat))
  std::vector<ChangepointRow> changepoint;
  ScalarSummary phi;
  double band_level = 0.90;
  std::vector<SeriesPoint> by_year;
  std::vector<ProfileSeries> profiles;
};

struct SummaryOptions {
  double band_level = 0.90;
  std::vector<ProfileSpec> profiles = default_profiles();
};

PosteriorSummary summarize_posterior(const PosteriorDraws& draws, const Panel& panel,
                                     const SummaryOptions& options = {});

}  // namespace bridgecp
