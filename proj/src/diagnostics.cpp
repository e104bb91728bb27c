#include "bridgecp/diagnostics.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <stdexcept>

namespace bridgecp {

namespace {

constexpr double kClamp = 1e-12;

void require_draws(const PosteriorDraws& draws, const char* what) {
  if (draws.draws.empty()) throw std::invalid_argument(std::string(what) + " needs at least one retained draw");
}

}  // namespace

std::string to_string(DevianceMode mode) {
  return mode == DevianceMode::conditional ? "conditional" : "marginal";
}

std::string to_string(PValueMode mode) {
  return mode == PValueMode::conditional ? "conditional" : "mixed";
}

DicResult dic_from_deviances(std::span<const double> deviances, double d_at_plugin) {
  if (deviances.empty()) throw std::invalid_argument("DIC needs at least one deviance draw");
  DicResult r;
  r.d_bar = mean(deviances);
  r.d_at_plugin = d_at_plugin;
  r.p_d = r.d_bar - d_at_plugin;
  r.dic = r.d_bar + r.p_d;
  return r;
}

ChainState plugin_state(const PosteriorDraws& draws) {
  require_draws(draws, "plug-in estimate");
  const ChainState& first = draws.draws.front().state;
  ChainState s;
  s.beta1.assign(first.beta1.size(), 0.0);
  s.beta2.assign(first.beta2.size(), 0.0);
  s.B.assign(first.B.size(), 0.0);
  s.gamma.assign(first.gamma.size(), 0.0);
  s.phi = 0.0;
  std::map<int, std::size_t> t_count;
  for (const auto& d : draws.draws) {
    for (std::size_t k = 0; k < s.beta1.size(); ++k) s.beta1[k] += d.state.beta1[k];
    for (std::size_t k = 0; k < s.beta2.size(); ++k) s.beta2[k] += d.state.beta2[k];
    for (std::size_t i = 0; i < s.B.size(); ++i) s.B[i] += d.state.B[i];
    for (std::size_t j = 0; j < s.gamma.size(); ++j) s.gamma[j] += d.state.gamma[j];
    s.phi += d.state.phi;
    if (d.state.T) ++t_count[*d.state.T];
  }
  const double g = static_cast<double>(draws.draws.size());
  for (double& v : s.beta1) v /= g;
  for (double& v : s.beta2) v /= g;
  for (double& v : s.B) v /= g;
  for (double& v : s.gamma) v /= g;
  s.phi /= g;
  if (!t_count.empty()) {
    auto best = t_count.begin();
    for (auto it = t_count.begin(); it != t_count.end(); ++it)
      if (it->second > best->second) best = it;
    s.T = best->first;
  }
  return s;
}

DicResult compute_dic(const PosteriorDraws& draws, const Panel& panel, DevianceMode mode) {
  require_draws(draws, "DIC");
  std::vector<double> dev;
  dev.reserve(draws.draws.size());
  for (const auto& d : draws.draws)
    dev.push_back(-2.0 * (mode == DevianceMode::conditional ? d.log_likelihood
                                                             : marginal_log_likelihood(d.state, panel)));
  const ChainState plug = plugin_state(draws);
  const double d_plug = -2.0 * (mode == DevianceMode::conditional ? log_likelihood(plug, panel)
                                                                   : marginal_log_likelihood(plug, panel));
  return dic_from_deviances(dev, d_plug);
}

CpoResult cpo_from_log_densities(std::span<const double> log_density, std::size_t n_draws,
                                 std::size_t n_obs) {
  if (n_draws == 0) throw std::invalid_argument("CPO needs at least one retained draw");
  if (log_density.size() != n_draws * n_obs)
    throw std::invalid_argument("log-density matrix does not match draws x observations");
  CpoResult r;
  r.log_cpo.resize(n_obs);
  std::vector<double> neg(n_draws);
  const double log_g = std::log(static_cast<double>(n_draws));
  for (std::size_t i = 0; i < n_obs; ++i) {
    for (std::size_t g = 0; g < n_draws; ++g) neg[g] = -log_density[g * n_obs + i];
    // CPO = 1 / mean(1 / f), evaluated as -(logsumexp(-log f) - log G).
    const double lc = -(log_sum_exp(neg) - log_g);
    r.log_cpo[i] = lc;
    if (!(std::exp(lc) > 0.0)) ++r.underflows;
    r.lpml += lc;
  }
  return r;
}

CpoResult compute_cpo_lpml(const PosteriorDraws& draws) {
  return cpo_from_log_densities(draws.obs_log_density, draws.draws.size(), draws.n_obs);
}

double pearson_discrepancy(std::span<const int> y, std::span<const double> p, std::size_t* clamped) {
  double acc = 0.0;
  for (std::size_t r = 0; r < y.size(); ++r) {
    double q = p[r];
    if (q < kClamp || q > 1.0 - kClamp) {
      q = std::clamp(q, kClamp, 1.0 - kClamp);
      if (clamped) ++*clamped;
    }
    const double e = y[r] - q;
    acc += e * e / (q * (1.0 - q));
  }
  return acc;
}

PValueResult bayesian_pvalue(const PosteriorDraws& draws, const Panel& panel, Rng& rng,
                             PValueMode mode) {
  require_draws(draws, "Bayesian p-value");
  const std::size_t n = panel.n_records();
  std::vector<int> y(n), y_rep(n);
  for (std::size_t r = 0; r < n; ++r) y[r] = panel.records()[r].outcome;
  std::vector<double> p(n);
  std::vector<double> b_rep(panel.n_clusters());
  PValueResult out;
  std::size_t exceed = 0;
  for (const auto& d : draws.draws) {
    const ChainState& s = d.state;
    if (mode == PValueMode::conditional) {
      for (std::size_t r = 0; r < n; ++r) {
        p[r] = conditional_prob(s, panel, r);
        y_rep[r] = rng.bernoulli(p[r]);
      }
    } else {
      const BridgeParam phi(s.phi);
      for (double& b : b_rep) b = bridge_draw(phi, rng);
      for (std::size_t r = 0; r < n; ++r) {
        const double eta = linear_predictor(s.beta1, s.beta2, panel, r, s.T);
        p[r] = marginalize_logit(eta, phi);
        y_rep[r] = rng.bernoulli(logistic(b_rep[panel.cluster_of(r)] + eta));
      }
    }
    const double obs = pearson_discrepancy(y, p, &out.clamped);
    const double rep = pearson_discrepancy(y_rep, p, &out.clamped);
    if (rep > obs) ++exceed;
  }
  out.n_draws = draws.draws.size();
  out.p = static_cast<double>(exceed) / static_cast<double>(out.n_draws);
  return out;
}

FitSummary summarize_fit(const PosteriorDraws& draws, const Panel& panel, Rng& rng,
                         DevianceMode deviance, PValueMode pvalue) {
  FitSummary s;
  s.deviance_mode = deviance;
  s.pvalue_mode = pvalue;
  s.dic = compute_dic(draws, panel, deviance);
  const auto cpo = compute_cpo_lpml(draws);
  s.lpml = cpo.lpml;
  s.cpo_underflows = cpo.underflows;
  s.pvalue = bayesian_pvalue(draws, panel, rng, pvalue);
  return s;
}

}  // namespace bridgecp
