#pragma once

// Prior families for the regression coefficients, the attenuation parameter
// and the change-point year, plus the eight named model configurations and
// the prior-predictive calibration checks.

#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "bridgecp/numeric.hpp"

namespace bridgecp {

inline const double kDefaultTau = std::sqrt(2.0);

struct DirichletWeights {
  std::vector<double> alpha;

  double alpha_plus() const;
  void validate() const;
};

struct DirichletChangepoint {
  DirichletWeights weights;
};
struct FixedChangepoint {
  int year = 1995;
};
struct NoChangepoint {};

using ChangepointPrior = std::variant<DirichletChangepoint, FixedChangepoint, NoChangepoint>;

/// Prior configuration. `model_id` (1..8) marks one of the named
/// configurations; a spec carrying an id must match that configuration
/// exactly, anything else is reported as non-canonical.
struct ModelSpec {
  double tau = kDefaultTau;  // DE(0, tau) rate for every coefficient
  double phi_a = 1.0;        // Beta(a, b) prior on phi
  double phi_b = 1.0;
  ChangepointPrior changepoint = NoChangepoint{};
  std::optional<int> model_id;

  bool has_changepoint() const { return !std::holds_alternative<NoChangepoint>(changepoint); }
  bool has_gamma() const { return std::holds_alternative<DirichletChangepoint>(changepoint); }
  const DirichletWeights* dirichlet() const;

  // Checks parameter ranges and agreement with the candidate-year set.
  void validate(std::span<const int> candidate_years) const;
  bool canonical() const;
  std::string label() const;
  std::string canonical_text() const;
};

// Named configurations 1..8. Model 7 has no change-point terms, Model 8
// fixes the change-point at 1995.
ModelSpec model_spec(int model_id);

inline const std::vector<double> kAlphaEnthusiastic{1, 1, 1, 6, 1};
inline const std::vector<double> kAlphaModerate{1.6, 1.6, 1.6, 5, 1.6};
inline const std::vector<double> kAlphaSkeptical{1.5, 1.5, 1.5, 3, 1.5};

// Sum over coordinates of log(tau / 2) - tau |beta_k|.
double log_prior_beta(std::span<const double> beta, double tau);
double log_prior_beta_coordinate(double beta, double tau);
// Beta(a, b) log density; -inf off (0, 1).
double log_prior_phi(double phi, double a, double b);
// Dirichlet(alpha) log density of gamma; -inf off the simplex.
double log_dirichlet(std::span<const double> gamma, const DirichletWeights& weights);
std::vector<double> dirichlet_expectations(const DirichletWeights& weights);

// Laws for phi usable in the prior-predictive checks.
struct BetaLaw {
  double a = 1.0;
  double b = 1.0;
};
struct PointMassLaw {
  double value = 0.0;
};
using PhiLaw = std::variant<BetaLaw, PointMassLaw>;

double draw_phi(const PhiLaw& law, Rng& rng);

struct Interval {
  double lower = 0.0;
  double upper = 0.0;
};

// Central 95% interval of exp(phi * beta) for one unit covariate change,
// beta ~ DE(0, tau). When several phi laws are given, draws are split
// evenly between them (pooled prior).
Interval prior_predictive_odds(double tau, std::span<const PhiLaw> phi_laws, Rng& rng,
                               std::size_t n_draws);
Interval prior_predictive_odds(const ModelSpec& spec, Rng& rng, std::size_t n_draws);

// Central 95% interval of logistic(phi * beta . x*) for a fixed design
// vector x*, every coordinate of beta ~ DE(0, tau).
Interval prior_predictive_pstar(double tau, const PhiLaw& phi_law, std::span<const double> design,
                                Rng& rng, std::size_t n_draws);

}  // namespace bridgecp
