#include "bridgecp/model.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

namespace bridgecp {

namespace {

std::string where(const ChargeRecord& r, std::size_t index) {
  if (r.source_row > 0) return "row " + std::to_string(r.source_row);
  return "record " + std::to_string(index + 1) + " (youth '" + r.youth_id + "')";
}

void validate_record(const ChargeRecord& r, std::size_t index, const PanelOptions& opt) {
  auto fail = [&](const std::string& column, const std::string& msg) {
    throw DataError(where(r, index) + ", column " + column + ": " + msg);
  };
  if (r.youth_id.empty()) fail("youth_id", "empty identifier");
  if (r.youth_id.find_first_of(",\"\r\n") != std::string::npos)
    fail("youth_id", "identifier contains a delimiter character");
  if (r.year < opt.first_year || r.year > opt.last_year)
    fail("year", std::to_string(r.year) + " is outside the study window " +
                     std::to_string(opt.first_year) + "-" + std::to_string(opt.last_year));
  if (!(r.age > 0.0) || !std::isfinite(r.age)) fail("age", "age must be positive");
  if (r.repeat_offense != 0 && r.repeat_offense != 1)
    fail("repeat_offense", std::to_string(r.repeat_offense) + " is not binary");
  if (r.severe != 0 && r.severe != 1) fail("severe", std::to_string(r.severe) + " is not binary");
  if (r.outcome != 0 && r.outcome != 1) fail("outcome", std::to_string(r.outcome) + " is not binary");
}

double median_age(const std::vector<ChargeRecord>& records) {
  std::vector<double> ages;
  ages.reserve(records.size());
  for (const auto& r : records) ages.push_back(r.age);
  return quantile(ages, 0.5);
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::vector<std::string> x1_names(const DesignConfig& design) {
  std::vector<std::string> names;
  if (design.intercept) names.emplace_back("intercept");
  names.insert(names.end(), {"age", "repeat_offense", "severe", "year"});
  if (design.notification != NotificationCoding::none) names.emplace_back("notification");
  return names;
}

const std::vector<std::string>& Panel::x2_names() {
  static const std::vector<std::string> names{"cp_indicator", "cp_linear", "cp_quadratic",
                                              "cp_repeat"};
  return names;
}

std::array<double, kChangepointTerms> changepoint_basis(const ChargeRecord& record, int changepoint) {
  if (record.year < changepoint) return {0.0, 0.0, 0.0, 0.0};
  const double d = record.year - changepoint;
  return {1.0, d, d * d, static_cast<double>(record.repeat_offense)};
}

DesignVector design_vectors(const ChargeRecord& record, std::optional<int> changepoint,
                            const DesignConfig& design, double age_center) {
  DesignVector v;
  if (design.intercept) v.x1.push_back(1.0);
  v.x1.push_back(record.age - age_center);
  v.x1.push_back(record.repeat_offense);
  v.x1.push_back(record.severe);
  v.x1.push_back(record.year - design.year_center);
  switch (design.notification) {
    case NotificationCoding::from_year:
      v.x1.push_back(record.year >= design.notification_year ? 1.0 : 0.0);
      break;
    case NotificationCoding::single_year:
      v.x1.push_back(record.year == design.notification_year ? 1.0 : 0.0);
      break;
    case NotificationCoding::none:
      break;
  }
  if (changepoint) v.x2 = changepoint_basis(record, *changepoint);
  return v;
}

Panel::Panel(std::vector<ChargeRecord> records, PanelOptions options,
             std::vector<std::string> extra_youths)
    : options_(std::move(options)) {
  if (options_.first_year > options_.last_year) throw DataError("study window is empty");
  for (std::size_t k = 1; k < options_.candidate_years.size(); ++k)
    if (options_.candidate_years[k] <= options_.candidate_years[k - 1])
      throw DataError("candidate years must be strictly increasing");
  for (std::size_t k = 0; k < records.size(); ++k) validate_record(records[k], k, options_);

  // Group by youth in order of first appearance, stable-sorted by year.
  std::vector<std::string> order;
  std::unordered_map<std::string, std::vector<std::size_t>> members;
  for (std::size_t k = 0; k < records.size(); ++k) {
    auto [it, inserted] = members.try_emplace(records[k].youth_id);
    if (inserted) order.push_back(records[k].youth_id);
    it->second.push_back(k);
  }
  for (auto& id : extra_youths) {
    if (members.try_emplace(id).second) order.push_back(id);
  }

  records_.reserve(records.size());
  for (const auto& id : order) {
    auto& idx = members[id];
    std::stable_sort(idx.begin(), idx.end(),
                     [&](std::size_t a, std::size_t b) { return records[a].year < records[b].year; });
    Cluster c{id, records_.size(), records_.size() + idx.size()};
    if (c.size() < 2) {
      std::string msg = "youth '" + id + "' has " + std::to_string(c.size()) +
                        " record(s); at least 2 are required";
      if (!idx.empty()) msg = where(records[idx.front()], idx.front()) + ": " + msg;
      if (options_.strict) throw DataError(msg);
      warnings_.push_back(msg);
    }
    for (std::size_t k : idx) {
      records_.push_back(std::move(records[k]));
      record_cluster_.push_back(clusters_.size());
    }
    cluster_index_.emplace(id, clusters_.size());
    clusters_.push_back(std::move(c));
  }

  age_center_ = options_.design.age_center.value_or(records_.empty() ? 0.0 : median_age(records_));
  x1_names_ = bridgecp::x1_names(options_.design);
  x1_.reserve(records_.size() * p1());
  for (const auto& r : records_) {
    const auto dv = design_vectors(r, std::nullopt, options_.design, age_center_);
    x1_.insert(x1_.end(), dv.x1.begin(), dv.x1.end());
  }
}

std::optional<std::size_t> Panel::find_cluster(const std::string& youth_id) const {
  auto it = cluster_index_.find(youth_id);
  if (it == cluster_index_.end()) return std::nullopt;
  return it->second;
}

std::size_t Panel::candidate_index(int year) const {
  const auto& cy = options_.candidate_years;
  auto it = std::find(cy.begin(), cy.end(), year);
  if (it == cy.end()) throw std::invalid_argument(std::to_string(year) + " is not a candidate year");
  return static_cast<std::size_t>(it - cy.begin());
}

Panel Panel::with_outcomes(std::span<const int> outcomes) const {
  if (outcomes.size() != records_.size())
    throw std::invalid_argument("outcome count does not match the panel");
  std::vector<ChargeRecord> copy = records_;
  for (std::size_t k = 0; k < copy.size(); ++k) copy[k].outcome = outcomes[k];
  std::vector<std::string> ids;
  for (const auto& c : clusters_) ids.push_back(c.youth_id);
  PanelOptions opt = options_;
  opt.design.age_center = age_center_;
  opt.strict = false;
  Panel out(std::move(copy), opt, std::move(ids));
  out.warnings_ = warnings_;
  out.options_.strict = options_.strict;
  return out;
}

std::string Panel::canonical_text() const {
  std::ostringstream os;
  os << "window=" << options_.first_year << "-" << options_.last_year << ";candidates=";
  for (std::size_t k = 0; k < options_.candidate_years.size(); ++k)
    os << (k ? "," : "") << options_.candidate_years[k];
  os << ";age_center=" << fmt(age_center_) << "\n";
  for (const auto& c : clusters_) {
    os << c.youth_id << ":";
    for (std::size_t r = c.begin; r < c.end; ++r) {
      const auto& rec = records_[r];
      os << " " << rec.year << "/" << fmt(rec.age) << "/" << rec.repeat_offense << "/" << rec.severe
         << "/" << rec.outcome;
    }
    os << "\n";
  }
  return os.str();
}

std::string Panel::hash() const { return hash_hex(fnv1a64(canonical_text())); }

void ChainState::check(const Panel& panel, const ModelSpec& spec) const {
  if (beta1.size() != panel.p1()) throw std::invalid_argument("beta1 has the wrong dimension");
  if (beta2.size() != (spec.has_changepoint() ? panel.p2() : 0))
    throw std::invalid_argument("beta2 has the wrong dimension");
  if (B.size() != panel.n_clusters()) throw std::invalid_argument("B has the wrong length");
  if (!BridgeParam::valid(phi)) throw std::invalid_argument("phi outside (0, 1)");
  if (spec.has_changepoint()) {
    if (!T) throw std::invalid_argument("change-point year missing");
    panel.candidate_index(*T);
  } else if (T) {
    throw std::invalid_argument("change-point year set for a model without one");
  }
  if (spec.has_gamma()) {
    if (gamma.size() != panel.candidate_years().size())
      throw std::invalid_argument("gamma has the wrong length");
    double total = 0.0;
    for (double g : gamma) {
      if (g < 0.0) throw std::invalid_argument("gamma has a negative entry");
      total += g;
    }
    if (std::abs(total - 1.0) > 1e-12) throw std::invalid_argument("gamma does not sum to one");
  }
}

double linear_predictor(std::span<const double> beta1, std::span<const double> beta2,
                        const Panel& panel, std::size_t record, std::optional<int> changepoint) {
  const auto x1 = panel.x1(record);
  double eta = 0.0;
  for (std::size_t k = 0; k < x1.size(); ++k) eta += beta1[k] * x1[k];
  if (changepoint && !beta2.empty()) {
    const auto x2 = changepoint_basis(panel.records()[record], *changepoint);
    for (std::size_t k = 0; k < x2.size(); ++k) eta += beta2[k] * x2[k];
  }
  return eta;
}

double conditional_prob(const ChainState& state, const Panel& panel, std::size_t record) {
  const double b = state.B[panel.cluster_of(record)];
  return logistic(b + linear_predictor(state.beta1, state.beta2, panel, record, state.T));
}

double conditional_prob(const ChainState& state, const Panel& panel, const ChargeRecord& record) {
  const auto cluster = panel.find_cluster(record.youth_id);
  if (!cluster) throw std::out_of_range("youth '" + record.youth_id + "' is not in the panel");
  const auto dv = design_vectors(record, state.T, panel.options().design, panel.age_center());
  double eta = state.B[*cluster];
  for (std::size_t k = 0; k < dv.x1.size(); ++k) eta += state.beta1[k] * dv.x1[k];
  for (std::size_t k = 0; k < state.beta2.size(); ++k) eta += state.beta2[k] * dv.x2[k];
  return logistic(eta);
}

double marginal_prob(std::span<const double> beta1, std::span<const double> beta2, double phi,
                     const Panel& panel, std::size_t record, std::optional<int> changepoint) {
  return marginalize_logit(linear_predictor(beta1, beta2, panel, record, changepoint),
                           BridgeParam(phi));
}

std::vector<double> observation_log_densities(const ChainState& state, const Panel& panel) {
  std::vector<double> out(panel.n_records());
  for (std::size_t r = 0; r < out.size(); ++r) {
    const double eta = state.B[panel.cluster_of(r)] +
                       linear_predictor(state.beta1, state.beta2, panel, r, state.T);
    out[r] = bernoulli_logit_log_density(panel.records()[r].outcome, eta);
  }
  return out;
}

double log_likelihood(const ChainState& state, const Panel& panel) {
  double acc = 0.0;
  for (double v : observation_log_densities(state, panel)) acc += v;
  return acc;
}

double marginal_log_likelihood(const ChainState& state, const Panel& panel) {
  double acc = 0.0;
  for (std::size_t r = 0; r < panel.n_records(); ++r) {
    const double eta = linear_predictor(state.beta1, state.beta2, panel, r, state.T);
    acc += bernoulli_logit_log_density(panel.records()[r].outcome, state.phi * eta);
  }
  return acc;
}

LogPosteriorTerms log_posterior_terms(const ChainState& state, const Panel& panel,
                                      const ModelSpec& spec) {
  LogPosteriorTerms t;
  t.phi = log_prior_phi(state.phi, spec.phi_a, spec.phi_b);
  if (!BridgeParam::valid(state.phi)) {
    t.random_effects = kNegInf;
    return t;
  }
  const BridgeParam phi(state.phi);
  t.log_likelihood = log_likelihood(state, panel);
  for (double b : state.B) t.random_effects += bridge_log_pdf(b, phi);
  t.beta = log_prior_beta(state.beta1, spec.tau) + log_prior_beta(state.beta2, spec.tau);
  if (const auto* w = spec.dirichlet()) {
    t.gamma = log_dirichlet(state.gamma, *w);
    if (t.gamma == kNegInf || !state.T) {
      t.changepoint = kNegInf;
    } else {
      const double g = state.gamma[panel.candidate_index(*state.T)];
      t.changepoint = g > 0.0 ? std::log(g) : kNegInf;
    }
  } else if (const auto* f = std::get_if<FixedChangepoint>(&spec.changepoint)) {
    t.changepoint = (state.T && *state.T == f->year) ? 0.0 : kNegInf;
  }
  return t;
}

double log_posterior(const ChainState& state, const Panel& panel, const ModelSpec& spec) {
  return log_posterior_terms(state, panel, spec).total();
}

PosteriorGradient log_posterior_gradient(const ChainState& state, const Panel& panel,
                                         const ModelSpec& spec) {
  PosteriorGradient g;
  g.beta1.assign(state.beta1.size(), 0.0);
  g.beta2.assign(state.beta2.size(), 0.0);
  g.B.assign(state.B.size(), 0.0);
  for (std::size_t r = 0; r < panel.n_records(); ++r) {
    const auto& rec = panel.records()[r];
    const double p = conditional_prob(state, panel, r);
    const double resid = rec.outcome - p;
    g.B[panel.cluster_of(r)] += resid;
    const auto x1 = panel.x1(r);
    for (std::size_t k = 0; k < x1.size(); ++k) g.beta1[k] += resid * x1[k];
    if (state.T && !state.beta2.empty()) {
      const auto x2 = changepoint_basis(rec, *state.T);
      for (std::size_t k = 0; k < x2.size(); ++k) g.beta2[k] += resid * x2[k];
    }
  }
  auto sign = [](double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); };
  for (std::size_t k = 0; k < g.beta1.size(); ++k) g.beta1[k] -= spec.tau * sign(state.beta1[k]);
  for (std::size_t k = 0; k < g.beta2.size(); ++k) g.beta2[k] -= spec.tau * sign(state.beta2[k]);
  // d/db log f(b | phi) = -phi sinh(phi b) / (cosh(phi b) + cos(phi pi))
  const double phi = state.phi;
  for (std::size_t i = 0; i < g.B.size(); ++i) {
    const double x = phi * state.B[i];
    const double slope = std::abs(x) > 30.0 ? std::copysign(phi, x)
                                             : phi * std::sinh(x) / (std::cosh(x) + std::cos(phi * kPi));
    g.B[i] -= slope;
  }
  return g;
}

std::vector<int> simulate_outcomes(const ChainState& state, const Panel& panel, Rng& rng) {
  std::vector<int> y(panel.n_records());
  for (std::size_t r = 0; r < y.size(); ++r) y[r] = rng.bernoulli(conditional_prob(state, panel, r));
  return y;
}

ChainState sample_prior_state(const Panel& panel, const ModelSpec& spec, Rng& rng) {
  ChainState s;
  s.beta1.resize(panel.p1());
  for (double& b : s.beta1) b = rng.laplace(spec.tau);
  if (spec.has_changepoint()) {
    s.beta2.resize(panel.p2());
    for (double& b : s.beta2) b = rng.laplace(spec.tau);
  }
  do {
    s.phi = rng.beta(spec.phi_a, spec.phi_b);
  } while (!BridgeParam::valid(s.phi));
  const BridgeParam phi(s.phi);
  s.B.resize(panel.n_clusters());
  for (double& b : s.B) b = bridge_draw(phi, rng);
  if (const auto* w = spec.dirichlet()) {
    s.gamma = rng.dirichlet(w->alpha);
    s.T = panel.candidate_years()[rng.categorical(s.gamma)];
  } else if (const auto* f = std::get_if<FixedChangepoint>(&spec.changepoint)) {
    s.T = f->year;
  }
  return s;
}

}  // namespace bridgecp
