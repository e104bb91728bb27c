#include <algorithm>
#include <limits>
#include <stdexcept>

#include "bridgecp/mcmc.hpp"

namespace bridgecp {

std::vector<std::string> scalar_parameter_names(const PosteriorDraws& draws) {
  std::vector<std::string> names;
  for (const auto& n : draws.beta1_names) names.push_back(n);
  for (const auto& n : draws.beta2_names) names.push_back(n);
  names.push_back("phi");
  if (draws.has_changepoint) names.push_back("T");
  if (draws.has_gamma)
    for (int y : draws.candidate_years) names.push_back("gamma_" + std::to_string(y));
  return names;
}

std::function<double(const Draw&)> parameter_selector(const PosteriorDraws& draws,
                                                      const std::string& name) {
  for (std::size_t k = 0; k < draws.beta1_names.size(); ++k)
    if (draws.beta1_names[k] == name) return [k](const Draw& d) { return d.state.beta1[k]; };
  for (std::size_t k = 0; k < draws.beta2_names.size(); ++k)
    if (draws.beta2_names[k] == name) return [k](const Draw& d) { return d.state.beta2[k]; };
  if (name == "phi") return [](const Draw& d) { return d.state.phi; };
  if (name == "T" && draws.has_changepoint)
    return [](const Draw& d) { return static_cast<double>(*d.state.T); };
  if (draws.has_gamma)
    for (std::size_t j = 0; j < draws.candidate_years.size(); ++j)
      if (name == "gamma_" + std::to_string(draws.candidate_years[j]))
        return [j](const Draw& d) { return d.state.gamma[j]; };
  if (name == "log_likelihood") return [](const Draw& d) { return d.log_likelihood; };
  throw std::invalid_argument("unknown parameter '" + name + "'");
}

std::vector<std::vector<double>> parameter_by_chain(const PosteriorDraws& draws,
                                                   const std::string& name) {
  const auto select = parameter_selector(draws, name);
  std::vector<std::vector<double>> out(draws.n_chains);
  for (const auto& d : draws.draws) out.at(d.chain).push_back(select(d));
  return out;
}

double gelman_rubin(const std::vector<std::vector<double>>& chains) {
  if (chains.size() < 2)
    throw std::invalid_argument("Gelman-Rubin diagnostic unavailable: needs at least 2 chains");
  std::size_t n = chains.front().size();
  for (const auto& c : chains) n = std::min(n, c.size());
  const std::size_t half = n / 2;
  if (half < 2) throw std::invalid_argument("Gelman-Rubin diagnostic needs at least 4 draws per chain");

  // Split each chain into its first and last halves.
  std::vector<std::span<const double>> parts;
  for (const auto& c : chains) {
    parts.emplace_back(c.data(), half);
    parts.emplace_back(c.data() + (n - half), half);
  }
  const double len = static_cast<double>(half);
  std::vector<double> means, vars;
  for (auto p : parts) {
    means.push_back(mean(p));
    vars.push_back(variance(p));
  }
  const double w = mean(vars);
  const double b = len * variance(means);
  if (w <= 0.0) return b <= 0.0 ? 1.0 : std::numeric_limits<double>::infinity();
  const double var_plus = (len - 1.0) / len * w + b / len;
  return std::sqrt(var_plus / w);
}

double gelman_rubin(const PosteriorDraws& draws, const std::string& name) {
  return gelman_rubin(parameter_by_chain(draws, name));
}

namespace {

std::vector<double> autocovariance(std::span<const double> x, std::size_t max_lag) {
  const std::size_t n = x.size();
  const double mu = mean(x);
  std::vector<double> gamma(max_lag + 1, 0.0);
  for (std::size_t lag = 0; lag <= max_lag; ++lag) {
    double acc = 0.0;
    for (std::size_t t = 0; t + lag < n; ++t) acc += (x[t] - mu) * (x[t + lag] - mu);
    gamma[lag] = acc / static_cast<double>(n);
  }
  return gamma;
}

// Geyer's initial positive sequence: lag pairs are summed until a pair
// turns non-positive.
double geyer_tau(std::span<const double> x, double gamma0) {
  const std::size_t n = x.size();
  const double mu = mean(x);
  auto rho = [&](std::size_t lag) {
    double acc = 0.0;
    for (std::size_t t = 0; t + lag < n; ++t) acc += (x[t] - mu) * (x[t + lag] - mu);
    return acc / static_cast<double>(n) / gamma0;
  };
  double tau = -1.0;
  for (std::size_t k = 0; k + 1 < n; k += 2) {
    const double pair = (k == 0 ? 1.0 : rho(k)) + rho(k + 1);
    if (pair <= 0.0) break;
    tau += 2.0 * pair;
  }
  return std::max(tau, 1.0 / static_cast<double>(n));
}

}  // namespace

AcfResult autocorrelation_and_ess(std::span<const double> series, std::size_t max_lag) {
  const std::size_t n = series.size();
  if (n < 2 || max_lag >= n) throw std::invalid_argument("max_lag must be below the series length");
  AcfResult out;
  const auto gamma = autocovariance(series, max_lag);
  out.acf.assign(max_lag + 1, 0.0);
  if (gamma[0] <= 0.0) {
    out.acf[0] = 1.0;
    out.ess = static_cast<double>(n);
    return out;
  }
  for (std::size_t k = 0; k <= max_lag; ++k) out.acf[k] = gamma[k] / gamma[0];
  out.ess = static_cast<double>(n) / geyer_tau(series, gamma[0]);
  return out;
}

AcfResult autocorrelation_and_ess(const PosteriorDraws& draws, const std::string& name,
                                  std::size_t max_lag) {
  const auto chains = parameter_by_chain(draws, name);
  AcfResult pooled;
  pooled.acf.assign(max_lag + 1, 0.0);
  std::size_t used = 0;
  for (const auto& c : chains) {
    if (c.size() <= max_lag) continue;
    const auto r = autocorrelation_and_ess(c, max_lag);
    for (std::size_t k = 0; k <= max_lag; ++k) pooled.acf[k] += r.acf[k];
    pooled.ess += r.ess;
    ++used;
  }
  if (used == 0) throw std::invalid_argument("max_lag must be below the retained chain length");
  for (double& v : pooled.acf) v /= static_cast<double>(used);
  return pooled;
}

}  // namespace bridgecp
