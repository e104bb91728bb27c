#include "bridgecp/priors.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace bridgecp {

namespace {

std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

Interval central95(std::vector<double>& values) {
  std::sort(values.begin(), values.end());
  return {sorted_quantile(values, 0.025), sorted_quantile(values, 0.975)};
}

}  // namespace

double DirichletWeights::alpha_plus() const {
  return std::accumulate(alpha.begin(), alpha.end(), 0.0);
}

void DirichletWeights::validate() const {
  if (alpha.empty()) throw std::invalid_argument("Dirichlet weights are empty");
  for (double a : alpha)
    if (!(a > 0.0) || !std::isfinite(a))
      throw std::invalid_argument("Dirichlet weights must be positive and finite");
}

const DirichletWeights* ModelSpec::dirichlet() const {
  if (const auto* d = std::get_if<DirichletChangepoint>(&changepoint)) return &d->weights;
  return nullptr;
}

void ModelSpec::validate(std::span<const int> candidate_years) const {
  if (!(tau > 0.0) || !std::isfinite(tau)) throw std::invalid_argument("DE rate tau must be positive");
  if (!(phi_a > 0.0) || !(phi_b > 0.0))
    throw std::invalid_argument("Beta prior on phi needs a, b > 0");
  if (const auto* w = dirichlet()) {
    w->validate();
    if (w->alpha.size() != candidate_years.size())
      throw std::invalid_argument("Dirichlet weights (" + std::to_string(w->alpha.size()) +
                                  ") do not match the candidate years (" +
                                  std::to_string(candidate_years.size()) + ")");
  }
  if (const auto* f = std::get_if<FixedChangepoint>(&changepoint)) {
    if (std::find(candidate_years.begin(), candidate_years.end(), f->year) == candidate_years.end())
      throw std::invalid_argument("fixed change-point year " + std::to_string(f->year) +
                                  " is not a candidate year");
  }
  if (model_id && !canonical())
    throw std::invalid_argument("model " + std::to_string(*model_id) +
                                " fields differ from its named configuration");
}

bool ModelSpec::canonical() const {
  if (!model_id || *model_id < 1 || *model_id > 8) return false;
  return canonical_text() == model_spec(*model_id).canonical_text();
}

std::string ModelSpec::label() const {
  if (canonical()) return "Model " + std::to_string(*model_id);
  return "custom (non-canonical)";
}

std::string ModelSpec::canonical_text() const {
  std::ostringstream os;
  os << "model_id=" << (model_id ? std::to_string(*model_id) : "none") << ";tau=" << fmt_double(tau)
     << ";phi_prior=beta(" << fmt_double(phi_a) << "," << fmt_double(phi_b) << ");changepoint=";
  if (const auto* w = dirichlet()) {
    os << "dirichlet(";
    for (std::size_t k = 0; k < w->alpha.size(); ++k)
      os << (k ? "," : "") << fmt_double(w->alpha[k]);
    os << ")";
  } else if (const auto* f = std::get_if<FixedChangepoint>(&changepoint)) {
    os << "fixed(" << f->year << ")";
  } else {
    os << "none";
  }
  return os.str();
}

ModelSpec model_spec(int model_id) {
  ModelSpec spec;
  spec.model_id = model_id;
  switch (model_id) {
    case 1: case 2: case 3: case 4: case 5: case 6: {
      static const std::vector<double>* alphas[] = {&kAlphaEnthusiastic, &kAlphaModerate,
                                                    &kAlphaSkeptical};
      spec.changepoint = DirichletChangepoint{{*alphas[(model_id - 1) % 3]}};
      if (model_id >= 4) {
        spec.phi_a = 2.0;
        spec.phi_b = 1.0;
      }
      break;
    }
    case 7:
      spec.changepoint = NoChangepoint{};
      break;
    case 8:
      spec.changepoint = FixedChangepoint{1995};
      break;
    default:
      throw std::invalid_argument("model id must be in 1..8, got " + std::to_string(model_id));
  }
  return spec;
}

double log_prior_beta_coordinate(double beta, double tau) {
  return std::log(0.5 * tau) - tau * std::abs(beta);
}

double log_prior_beta(std::span<const double> beta, double tau) {
  double acc = 0.0;
  for (double b : beta) acc += log_prior_beta_coordinate(b, tau);
  return acc;
}

double log_prior_phi(double phi, double a, double b) {
  if (!(phi > 0.0 && phi < 1.0)) return kNegInf;
  double value = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b);
  if (a != 1.0) value += (a - 1.0) * std::log(phi);
  if (b != 1.0) value += (b - 1.0) * std::log1p(-phi);
  return value;
}

double log_dirichlet(std::span<const double> gamma, const DirichletWeights& weights) {
  if (gamma.size() != weights.alpha.size()) return kNegInf;
  double total = 0.0;
  for (double g : gamma) {
    if (!(g >= 0.0) || g > 1.0) return kNegInf;
    total += g;
  }
  if (std::abs(total - 1.0) > 1e-9) return kNegInf;
  double value = std::lgamma(weights.alpha_plus());
  for (std::size_t k = 0; k < gamma.size(); ++k) {
    const double a = weights.alpha[k];
    value -= std::lgamma(a);
    if (a != 1.0) value += (a - 1.0) * std::log(gamma[k]);
  }
  return value;
}

std::vector<double> dirichlet_expectations(const DirichletWeights& weights) {
  weights.validate();
  const double total = weights.alpha_plus();
  std::vector<double> out(weights.alpha.size());
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = weights.alpha[k] / total;
  return out;
}

double draw_phi(const PhiLaw& law, Rng& rng) {
  if (const auto* p = std::get_if<PointMassLaw>(&law)) return p->value;
  const auto& beta = std::get<BetaLaw>(law);
  return rng.beta(beta.a, beta.b);
}

Interval prior_predictive_odds(double tau, std::span<const PhiLaw> phi_laws, Rng& rng,
                               std::size_t n_draws) {
  if (phi_laws.empty()) throw std::invalid_argument("no phi law given");
  if (n_draws == 0) throw std::invalid_argument("prior predictive check needs draws");
  std::vector<double> odds(n_draws);
  for (std::size_t g = 0; g < n_draws; ++g) {
    const double phi = draw_phi(phi_laws[g % phi_laws.size()], rng);
    odds[g] = std::exp(phi * rng.laplace(tau));
  }
  return central95(odds);
}

Interval prior_predictive_odds(const ModelSpec& spec, Rng& rng, std::size_t n_draws) {
  const PhiLaw law = BetaLaw{spec.phi_a, spec.phi_b};
  return prior_predictive_odds(spec.tau, std::span<const PhiLaw>(&law, 1), rng, n_draws);
}

Interval prior_predictive_pstar(double tau, const PhiLaw& phi_law, std::span<const double> design,
                                Rng& rng, std::size_t n_draws) {
  if (n_draws == 0) throw std::invalid_argument("prior predictive check needs draws");
  std::vector<double> p(n_draws);
  for (std::size_t g = 0; g < n_draws; ++g) {
    const double phi = draw_phi(phi_law, rng);
    double eta = 0.0;
    for (double x : design)
      if (x != 0.0) eta += rng.laplace(tau) * x;
    p[g] = logistic(phi * eta);
  }
  return central95(p);
}

}  // namespace bridgecp
