#include <algorithm>
#include <cstdio>
#include <exception>
#include <iterator>
#include <sstream>
#include <thread>

#include "bridgecp/mcmc.hpp"

namespace bridgecp {

namespace {

constexpr std::size_t kAdaptEvery = 25;
constexpr int kMaxShrinks = 1000;

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

// Bridge uniforms (u, 1 - u) of b, both accurate in their tails.
std::pair<double, double> bridge_tails(double b, BridgeParam phi) {
  if (b >= 0.0) {
    const double s = bridge_survival(b, phi);
    return {1.0 - s, s};
  }
  const double u = bridge_survival(-b, phi);
  return {u, 1.0 - u};
}

}  // namespace

void SamplerConfig::validate() const {
  if (n_iterations == 0) throw std::invalid_argument("sampler needs at least one iteration");
  if (burn_in >= n_iterations) throw std::invalid_argument("burn_in must be below n_iterations");
  if (thinning < 1) throw std::invalid_argument("thinning must be >= 1");
  if (n_chains < 1) throw std::invalid_argument("n_chains must be >= 1");
  if (!(slice.initial_width > 0.0)) throw std::invalid_argument("slice width must be positive");
  if (slice.max_doublings < 1) throw std::invalid_argument("slice doubling budget must be >= 1");
}

std::size_t SamplerConfig::retained_per_chain() const {
  return (n_iterations - burn_in + thinning - 1) / thinning;
}

std::string describe(const ChainState& state) {
  std::ostringstream os;
  os << "state: beta1=[";
  for (std::size_t k = 0; k < state.beta1.size(); ++k) os << (k ? ", " : "") << fmt(state.beta1[k]);
  os << "] beta2=[";
  for (std::size_t k = 0; k < state.beta2.size(); ++k) os << (k ? ", " : "") << fmt(state.beta2[k]);
  os << "] phi=" << fmt(state.phi) << " T=" << (state.T ? std::to_string(*state.T) : "none");
  if (!state.B.empty()) {
    const auto [lo, hi] = std::minmax_element(state.B.begin(), state.B.end());
    os << " B in [" << fmt(*lo) << ", " << fmt(*hi) << "] (n=" << state.B.size() << ")";
  }
  return os.str();
}

GibbsSampler::GibbsSampler(const Panel& panel, const ModelSpec& spec, const SamplerConfig& config,
                           ChainState initial, Rng rng)
    : panel_(panel), spec_(spec), config_(config), state_(std::move(initial)), rng_(std::move(rng)) {
  config_.validate();
  spec_.validate(panel_.candidate_years());
  state_.check(panel_, spec_);

  const std::size_t n = panel_.n_records();
  y_.resize(n);
  for (std::size_t r = 0; r < n; ++r) y_[r] = panel_.records()[r].outcome;

  nz1_.assign(panel_.p1(), {});
  for (std::size_t r = 0; r < n; ++r) {
    const auto x = panel_.x1(r);
    for (std::size_t k = 0; k < x.size(); ++k)
      if (x[k] != 0.0) nz1_[k].emplace_back(r, x[k]);
  }
  if (panel_.options().design.intercept) intercept_column_ = 0;

  if (spec_.has_changepoint()) {
    const auto& years = panel_.candidate_years();
    x2_.resize(years.size());
    nz2_.resize(years.size());
    for (std::size_t c = 0; c < years.size(); ++c) {
      x2_[c].resize(n);
      for (std::size_t r = 0; r < n; ++r) {
        x2_[c][r] = changepoint_basis(panel_.records()[r], years[c]);
        for (std::size_t k = 0; k < kChangepointTerms; ++k)
          if (x2_[c][r][k] != 0.0) nz2_[c][k].emplace_back(r, x2_[c][r][k]);
      }
    }
    const int first = years.empty() ? 0 : years.front();
    for (std::size_t r = 0; r < n; ++r)
      if (panel_.records()[r].year >= first) cp_records_.push_back(r);
  }

  const std::size_t slots = kBeta1 + panel_.p1() + (spec_.has_changepoint() ? panel_.p2() : 0);
  widths_.assign(slots, config_.slice.initial_width);
  widths_[kPhi] = widths_[kPhiNc] = std::min(config_.slice.initial_width, 0.25);
  jump_sum_.assign(slots, 0.0);
  jump_count_.assign(slots, 0);
  resync();
}

void GibbsSampler::set_state(ChainState state) {
  state.check(panel_, spec_);
  state_ = std::move(state);
  resync();
}

void GibbsSampler::resync() {
  const std::size_t n = panel_.n_records();
  fixed_.assign(n, 0.0);
  cp_.assign(n, 0.0);
  for (std::size_t r = 0; r < n; ++r) {
    const auto x = panel_.x1(r);
    double acc = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) acc += state_.beta1[k] * x[k];
    fixed_[r] = acc;
  }
  if (spec_.has_changepoint()) {
    t_index_ = panel_.candidate_index(*state_.T);
    for (std::size_t r = 0; r < n; ++r) {
      const auto& x = x2_[t_index_][r];
      double acc = 0.0;
      for (std::size_t k = 0; k < kChangepointTerms; ++k) acc += state_.beta2[k] * x[k];
      cp_[r] = acc;
    }
  }
}

double GibbsSampler::eta(std::size_t r) const {
  return state_.B[panel_.cluster_of(r)] + fixed_[r] + cp_[r];
}

// Doubling and shrinkage with the acceptance check that keeps the update
// reversible when the interval was doubled.
template <class F>
double GibbsSampler::slice(double x0, F&& log_density, std::size_t slot, const char* what) {
  auto fail = [&](const std::string& why) {
    throw SliceError(std::string(what) + ": " + why + " (x0=" + fmt(x0) +
                     ", width=" + fmt(widths_[slot]) + "); " + describe(state_));
  };
  const double f0 = log_density(x0);
  if (!std::isfinite(f0)) fail("current value has non-finite log density " + fmt(f0));
  const double level = f0 - rng_.exponential();
  const double w = widths_[slot];
  double left = x0 - w * rng_.uniform();
  double right = left + w;
  double f_left = log_density(left);
  double f_right = log_density(right);
  int doublings = 0;
  while (f_left > level || f_right > level) {
    if (++doublings > config_.slice.max_doublings) fail("doubling did not bracket the slice");
    if (rng_.uniform() < 0.5) {
      left -= right - left;
      f_left = log_density(left);
    } else {
      right += right - left;
      f_right = log_density(right);
    }
  }

  auto acceptable = [&](double x1) {
    if (doublings == 0) return true;
    double lh = left, rh = right;
    double f_lh = f_left, f_rh = f_right;
    bool differ = false;
    while (rh - lh > 1.1 * w) {
      const double mid = 0.5 * (lh + rh);
      if ((x0 < mid) != (x1 < mid)) differ = true;
      if (x1 < mid) {
        rh = mid;
        f_rh = log_density(rh);
      } else {
        lh = mid;
        f_lh = log_density(lh);
      }
      if (differ && level >= f_lh && level >= f_rh) return false;
    }
    return true;
  };

  double lo = left, hi = right;
  for (int k = 0; k < kMaxShrinks; ++k) {
    const double x1 = lo + rng_.uniform() * (hi - lo);
    if (log_density(x1) > level && acceptable(x1)) {
      jump_sum_[slot] += std::abs(x1 - x0);
      ++jump_count_[slot];
      return x1;
    }
    (x1 < x0 ? lo : hi) = x1;
  }
  fail("shrinkage did not terminate");
  return x0;
}

double GibbsSampler::update_random_effect(std::size_t i) {
  const Cluster& c = panel_.clusters().at(i);
  const BridgeLogDensity prior(BridgeParam(state_.phi));
  auto target = [&](double b) {
    double acc = prior(b);
    for (std::size_t r = c.begin; r < c.end; ++r)
      acc += bernoulli_logit_log_density(y_[r], b + fixed_[r] + cp_[r]);
    return acc;
  };
  state_.B[i] = slice(state_.B[i], target, kB, "B");
  return state_.B[i];
}

double GibbsSampler::update_beta1(std::size_t k) {
  const auto& nz = nz1_.at(k);
  const double old = state_.beta1[k];
  scratch_.resize(nz.size());
  for (std::size_t j = 0; j < nz.size(); ++j) scratch_[j] = eta(nz[j].first) - old * nz[j].second;
  auto target = [&](double v) {
    double acc = log_prior_beta_coordinate(v, spec_.tau);
    for (std::size_t j = 0; j < nz.size(); ++j)
      acc += bernoulli_logit_log_density(y_[nz[j].first], scratch_[j] + v * nz[j].second);
    return acc;
  };
  const double v = slice(old, target, kBeta1 + k, "beta1");
  for (const auto& [r, x] : nz) fixed_[r] += (v - old) * x;
  state_.beta1[k] = v;
  return v;
}

double GibbsSampler::update_beta2(std::size_t k) {
  if (!spec_.has_changepoint()) throw std::logic_error("model has no change-point terms");
  const auto& nz = nz2_[t_index_].at(k);
  const double old = state_.beta2[k];
  scratch_.resize(nz.size());
  for (std::size_t j = 0; j < nz.size(); ++j) scratch_[j] = eta(nz[j].first) - old * nz[j].second;
  auto target = [&](double v) {
    double acc = log_prior_beta_coordinate(v, spec_.tau);
    for (std::size_t j = 0; j < nz.size(); ++j)
      acc += bernoulli_logit_log_density(y_[nz[j].first], scratch_[j] + v * nz[j].second);
    return acc;
  };
  const double v = slice(old, target, kBeta1 + panel_.p1() + k, "beta2");
  for (const auto& [r, x] : nz) cp_[r] += (v - old) * x;
  state_.beta2[k] = v;
  return v;
}

double GibbsSampler::update_phi() {
  auto target = [&](double p) {
    if (!BridgeParam::valid(p)) return kNegInf;
    const BridgeLogDensity f{BridgeParam(p)};
    double acc = log_prior_phi(p, spec_.phi_a, spec_.phi_b);
    for (double b : state_.B) acc += f(b);
    return acc;
  };
  state_.phi = slice(state_.phi, target, kPhi, "phi");
  return state_.phi;
}

double GibbsSampler::update_phi_noncentered() {
  const BridgeParam current(state_.phi);
  std::vector<std::pair<double, double>> tails(state_.B.size());
  for (std::size_t i = 0; i < tails.size(); ++i) tails[i] = bridge_tails(state_.B[i], current);
  std::vector<double> b(state_.B.size());
  auto target = [&](double p) {
    if (!BridgeParam::valid(p)) return kNegInf;
    const BridgeParam phi(p);
    for (std::size_t i = 0; i < b.size(); ++i)
      b[i] = bridge_quantile_tails(tails[i].first, tails[i].second, phi);
    double acc = log_prior_phi(p, spec_.phi_a, spec_.phi_b);
    for (std::size_t r = 0; r < y_.size(); ++r)
      acc += bernoulli_logit_log_density(y_[r], b[panel_.cluster_of(r)] + fixed_[r] + cp_[r]);
    return acc;
  };
  const double p = slice(state_.phi, target, kPhiNc, "phi (non-centred)");
  const BridgeParam phi(p);
  for (std::size_t i = 0; i < b.size(); ++i)
    state_.B[i] = bridge_quantile_tails(tails[i].first, tails[i].second, phi);
  state_.phi = p;
  return p;
}

double GibbsSampler::shift_intercept() {
  if (intercept_column_ < 0) return 0.0;
  const auto k = static_cast<std::size_t>(intercept_column_);
  const BridgeLogDensity f(BridgeParam(state_.phi));
  const double b0 = state_.beta1[k];
  auto target = [&](double c) {
    double acc = log_prior_beta_coordinate(b0 + c, spec_.tau);
    for (double b : state_.B) acc += f(b - c);
    return acc;
  };
  const double c = slice(0.0, target, kShift, "intercept shift");
  state_.beta1[k] += c;
  for (double& b : state_.B) b -= c;
  for (const auto& [r, x] : nz1_[k]) fixed_[r] += c * x;
  return c;
}

std::vector<double> GibbsSampler::changepoint_probabilities() const {
  const auto& years = panel_.candidate_years();
  std::vector<double> logw(years.size(), 0.0);
  if (const auto* w = spec_.dirichlet()) {
    for (std::size_t c = 0; c < years.size(); ++c) {
      double acc = config_.collapse_gamma ? std::log(w->alpha[c])
                                          : (state_.gamma[c] > 0.0 ? std::log(state_.gamma[c]) : kNegInf);
      for (std::size_t r : cp_records_) {
        const auto& x = x2_[c][r];
        double cp = 0.0;
        for (std::size_t k = 0; k < kChangepointTerms; ++k) cp += state_.beta2[k] * x[k];
        acc += bernoulli_logit_log_density(y_[r], state_.B[panel_.cluster_of(r)] + fixed_[r] + cp);
      }
      logw[c] = acc;
    }
  } else if (const auto* f = std::get_if<FixedChangepoint>(&spec_.changepoint)) {
    for (std::size_t c = 0; c < years.size(); ++c) logw[c] = years[c] == f->year ? 0.0 : kNegInf;
  } else {
    throw std::logic_error("model has no change-point");
  }
  const double norm = log_sum_exp(logw);
  for (double& v : logw) v = std::exp(v - norm);
  return logw;
}

int GibbsSampler::update_changepoint() {
  if (const auto* f = std::get_if<FixedChangepoint>(&spec_.changepoint)) return f->year;
  const auto probs = changepoint_probabilities();
  const std::size_t c = rng_.categorical(probs);
  if (c != t_index_) {
    state_.T = panel_.candidate_years()[c];
    t_index_ = c;
    for (std::size_t r = 0; r < cp_.size(); ++r) {
      const auto& x = x2_[c][r];
      double acc = 0.0;
      for (std::size_t k = 0; k < kChangepointTerms; ++k) acc += state_.beta2[k] * x[k];
      cp_[r] = acc;
    }
  }
  return *state_.T;
}

const std::vector<double>& GibbsSampler::update_gamma() {
  const auto* w = spec_.dirichlet();
  if (!w) return state_.gamma;
  std::vector<double> alpha = w->alpha;
  alpha[t_index_] += 1.0;
  state_.gamma = rng_.dirichlet(alpha);
  return state_.gamma;
}

void GibbsSampler::adapt_widths() {
  if (++adapt_calls_ % kAdaptEvery != 0) return;
  for (std::size_t s = 0; s < widths_.size(); ++s) {
    if (jump_count_[s] == 0) continue;
    const double mean_jump = jump_sum_[s] / static_cast<double>(jump_count_[s]);
    widths_[s] = std::clamp(3.0 * mean_jump, 1e-4, 1e3);
    jump_sum_[s] = 0.0;
    jump_count_[s] = 0;
  }
}

void GibbsSampler::sweep(bool adapt) {
  resync();
  for (std::size_t i = 0; i < state_.B.size(); ++i) update_random_effect(i);
  for (std::size_t k = 0; k < state_.beta1.size(); ++k) update_beta1(k);
  for (std::size_t k = 0; k < state_.beta2.size(); ++k) update_beta2(k);
  if (config_.interweave) shift_intercept();
  update_phi();
  if (config_.interweave && panel_.n_records() > 0) update_phi_noncentered();
  if (spec_.has_changepoint()) update_changepoint();
  if (spec_.has_gamma()) update_gamma();
  if (adapt) {
    adapt_widths();
  } else {
    std::fill(jump_sum_.begin(), jump_sum_.end(), 0.0);
    std::fill(jump_count_.begin(), jump_count_.end(), 0);
  }
}

double GibbsSampler::log_likelihood() const {
  double acc = 0.0;
  for (std::size_t r = 0; r < y_.size(); ++r) acc += bernoulli_logit_log_density(y_[r], eta(r));
  return acc;
}

void GibbsSampler::observation_log_densities(std::span<double> out) const {
  for (std::size_t r = 0; r < y_.size(); ++r) out[r] = bernoulli_logit_log_density(y_[r], eta(r));
}

std::vector<const Draw*> PosteriorDraws::chain(std::size_t c) const {
  std::vector<const Draw*> out;
  for (const auto& d : draws)
    if (d.chain == c) out.push_back(&d);
  return out;
}

ChainState initial_state(const Panel& panel, const ModelSpec& spec, bool jitter, Rng& rng) {
  ChainState s;
  s.beta1.assign(panel.p1(), 0.0);
  if (spec.has_changepoint()) s.beta2.assign(panel.p2(), 0.0);
  s.B.assign(panel.n_clusters(), 0.0);
  const double prior_mean = spec.phi_a / (spec.phi_a + spec.phi_b);
  s.phi = prior_mean;
  if (jitter) {
    for (double& b : s.beta1) b += rng.normal();
    for (double& b : s.beta2) b += rng.normal();
    s.phi = logistic(std::log(prior_mean / (1.0 - prior_mean)) + rng.normal());
  }
  s.phi = std::clamp(s.phi, 1e-3, 1.0 - 1e-3);
  if (const auto* w = spec.dirichlet()) {
    s.gamma = dirichlet_expectations(*w);
    const auto mode = std::max_element(w->alpha.begin(), w->alpha.end()) - w->alpha.begin();
    s.T = panel.candidate_years()[static_cast<std::size_t>(mode)];
  } else if (const auto* f = std::get_if<FixedChangepoint>(&spec.changepoint)) {
    s.T = f->year;
  }
  return s;
}

PosteriorDraws run_chains(const Panel& panel, const ModelSpec& spec, const SamplerConfig& config) {
  config.validate();
  spec.validate(panel.candidate_years());

  PosteriorDraws out;
  out.beta1_names = panel.x1_names();
  if (spec.has_changepoint()) out.beta2_names = Panel::x2_names();
  out.candidate_years = panel.candidate_years();
  out.has_changepoint = spec.has_changepoint();
  out.has_gamma = spec.has_gamma();
  out.n_chains = config.n_chains;
  out.n_obs = panel.n_records();

  const std::size_t keep = config.retained_per_chain();
  struct ChainOutput {
    std::vector<Draw> draws;
    std::vector<double> obs;
  };
  std::vector<ChainOutput> results(config.n_chains);
  std::vector<std::exception_ptr> errors(config.n_chains);

  auto run_one = [&](std::size_t c) {
    std::size_t it = 0;
    try {
      Rng rng = Rng::derive(config.seed, c);
      ChainState init = initial_state(panel, spec, config.jitter_init, rng);
      GibbsSampler sampler(panel, spec, config, std::move(init), std::move(rng));
      auto& res = results[c];
      res.draws.reserve(keep);
      res.obs.resize(keep * panel.n_records());
      for (it = 1; it <= config.n_iterations; ++it) {
        sampler.sweep(config.adapt_widths && it <= config.burn_in);
        if (it <= config.burn_in || (it - config.burn_in - 1) % config.thinning != 0) continue;
        const std::size_t g = res.draws.size();
        auto row = std::span<double>(res.obs).subspan(g * panel.n_records(), panel.n_records());
        sampler.observation_log_densities(row);
        double ll = 0.0;
        for (double v : row) ll += v;
        res.draws.push_back({c, it, sampler.state(), ll});
      }
    } catch (const std::exception& e) {
      errors[c] = std::make_exception_ptr(std::runtime_error(
          "chain " + std::to_string(c) + ", iteration " + std::to_string(it) + ": " + e.what()));
    }
  };

  if (config.n_chains == 1) {
    run_one(0);
  } else {
    std::vector<std::thread> threads;
    for (std::size_t c = 0; c < config.n_chains; ++c) threads.emplace_back(run_one, c);
    for (auto& t : threads) t.join();
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  out.draws.reserve(keep * config.n_chains);
  out.obs_log_density.reserve(keep * config.n_chains * panel.n_records());
  for (auto& res : results) {
    std::move(res.draws.begin(), res.draws.end(), std::back_inserter(out.draws));
    out.obs_log_density.insert(out.obs_log_density.end(), res.obs.begin(), res.obs.end());
  }
  return out;
}

}  // namespace bridgecp
