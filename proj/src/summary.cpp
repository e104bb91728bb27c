#include "bridgecp/summary.hpp"

#include <algorithm>
#include <stdexcept>

namespace bridgecp {

namespace {

std::optional<std::size_t> index_of(const std::vector<std::string>& names, const std::string& name) {
  auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) return std::nullopt;
  return static_cast<std::size_t>(it - names.begin());
}

// Marginal probabilities are logistic(phi * eta); written out here rather than
// through BridgeParam so constructed draws with phi = 1 still summarize.

// Probability of moving forward at the population level for an arbitrary
// covariate row, given one draw.
double profile_prob(const Draw& d, const Panel& panel, const ChargeRecord& record) {
  const auto dv = design_vectors(record, d.state.T, panel.options().design, panel.age_center());
  double eta = 0.0;
  for (std::size_t k = 0; k < dv.x1.size(); ++k) eta += d.state.beta1[k] * dv.x1[k];
  for (std::size_t k = 0; k < d.state.beta2.size(); ++k) eta += d.state.beta2[k] * dv.x2[k];
  return logistic(d.state.phi * eta);
}

SeriesPoint band(int year, std::vector<double>& values, double level) {
  std::sort(values.begin(), values.end());
  SeriesPoint p;
  p.year = year;
  // A constant column summarizes to exactly its value.
  p.mean = values.front() == values.back() ? values.front() : mean(values);
  p.lower = sorted_quantile(values, 0.5 * (1.0 - level));
  p.upper = sorted_quantile(values, 1.0 - 0.5 * (1.0 - level));
  return p;
}

}  // namespace

ScalarSummary summarize_values(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("cannot summarize an empty column");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  if (sorted.front() == sorted.back()) return {sorted.front(), 0.0, sorted.front(), sorted.front()};
  return {mean(values), std::sqrt(variance(values)), sorted_quantile(sorted, 0.025),
          sorted_quantile(sorted, 0.975)};
}

std::vector<ProfileSpec> default_profiles() {
  return {{"first-time, non-severe", std::nullopt, 0, 0},
          {"first-time, severe", std::nullopt, 0, 1},
          {"repeat, non-severe", std::nullopt, 1, 0},
          {"repeat, severe", std::nullopt, 1, 1}};
}

PosteriorSummary summarize_posterior(const PosteriorDraws& draws, const Panel& panel,
                                     const SummaryOptions& options) {
  if (draws.draws.empty()) throw std::invalid_argument("posterior summary needs at least one draw");
  if (!(options.band_level > 0.0 && options.band_level < 1.0))
    throw std::invalid_argument("band level must lie in (0, 1)");
  PosteriorSummary out;
  out.band_level = options.band_level;
  const std::size_t g = draws.draws.size();
  std::vector<double> col(g);

  auto fill = [&](auto&& f) {
    for (std::size_t i = 0; i < g; ++i) col[i] = f(draws.draws[i]);
    return summarize_values(col);
  };
  for (std::size_t k = 0; k < draws.beta1_names.size(); ++k)
    out.odds.push_back({draws.beta1_names[k],
                        fill([k](const Draw& d) { return std::exp(d.state.phi * d.state.beta1[k]); })});
  for (std::size_t k = 0; k < draws.beta2_names.size(); ++k)
    out.odds.push_back({draws.beta2_names[k],
                        fill([k](const Draw& d) { return std::exp(d.state.phi * d.state.beta2[k]); })});

  if (const auto rep = index_of(draws.beta1_names, "repeat_offense")) {
    const std::size_t r = *rep;
    out.repeat_before = fill([r](const Draw& d) { return std::exp(d.state.phi * d.state.beta1[r]); });
    if (const auto inter = index_of(draws.beta2_names, "cp_repeat")) {
      const std::size_t j = *inter;
      out.repeat_after = fill(
          [r, j](const Draw& d) { return std::exp(d.state.phi * (d.state.beta1[r] + d.state.beta2[j])); });
    }
  }

  if (draws.has_changepoint) {
    for (std::size_t j = 0; j < draws.candidate_years.size(); ++j) {
      ChangepointRow row;
      row.year = draws.candidate_years[j];
      std::size_t hits = 0;
      for (const auto& d : draws.draws) hits += *d.state.T == row.year;
      row.frequency = static_cast<double>(hits) / static_cast<double>(g);
      if (draws.has_gamma) row.gamma = fill([j](const Draw& d) { return d.state.gamma[j]; });
      out.changepoint.push_back(row);
    }
  }
  out.phi = fill([](const Draw& d) { return d.state.phi; });

  // Average population-level probability over the records of each year.
  const auto& opt = panel.options();
  std::vector<double> values(g);
  for (int year = opt.first_year; year <= opt.last_year; ++year) {
    std::vector<std::size_t> rows;
    double observed = 0.0;
    for (std::size_t r = 0; r < panel.n_records(); ++r)
      if (panel.records()[r].year == year) {
        rows.push_back(r);
        observed += panel.records()[r].outcome;
      }
    if (rows.empty()) continue;
    for (std::size_t i = 0; i < g; ++i) {
      const auto& s = draws.draws[i].state;
      double acc = 0.0;
      for (std::size_t r : rows) acc += logistic(s.phi * linear_predictor(s.beta1, s.beta2, panel, r, s.T));
      values[i] = acc / static_cast<double>(rows.size());
    }
    SeriesPoint p = band(year, values, options.band_level);
    p.n_records = rows.size();
    p.observed = observed / static_cast<double>(rows.size());
    out.by_year.push_back(p);
  }

  for (const auto& prof : options.profiles) {
    ProfileSeries series{prof, {}};
    for (int year = opt.first_year; year <= opt.last_year; ++year) {
      ChargeRecord rec;
      rec.youth_id = "profile";
      rec.year = year;
      rec.age = prof.age.value_or(panel.age_center());
      rec.repeat_offense = prof.repeat_offense;
      rec.severe = prof.severe;
      for (std::size_t i = 0; i < g; ++i) values[i] = profile_prob(draws.draws[i], panel, rec);
      series.points.push_back(band(year, values, options.band_level));
    }
    out.profiles.push_back(std::move(series));
  }
  return out;
}

}  // namespace bridgecp
