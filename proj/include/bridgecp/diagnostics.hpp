#pragma once

// Model comparison and adequacy: DIC with p_D, CPO / LPML, and the
// posterior-predictive p-value.

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "bridgecp/mcmc.hpp"

namespace bridgecp {

// Conditional: deviance given (beta, B, phi, T). Marginal: B integrated
// out through the logistic(phi eta) identity.
enum class DevianceMode { conditional, marginal };
// Conditional: replicates share the sampled B; discrepancy uses the
// conditional probabilities. Mixed: fresh B ~ bridge(phi) per replicate;
// discrepancy uses the marginal probabilities.
enum class PValueMode { conditional, mixed };

std::string to_string(DevianceMode mode);
std::string to_string(PValueMode mode);

struct DicResult {
  double d_bar = 0.0;
  double d_at_plugin = 0.0;
  double p_d = 0.0;
  double dic = 0.0;
};
// From deviance draws and the deviance at the plug-in estimate.
DicResult dic_from_deviances(std::span<const double> deviances, double d_at_plugin);

// Posterior means of beta, phi, B and gamma; T at its posterior mode
// (earliest year on ties).
ChainState plugin_state(const PosteriorDraws& draws);

DicResult compute_dic(const PosteriorDraws& draws, const Panel& panel,
                      DevianceMode mode = DevianceMode::conditional);

struct CpoResult {
  std::vector<double> log_cpo;  // one per observation
  double lpml = 0.0;
  std::size_t underflows = 0;   // observations whose CPO is not representable as a double
};
// Harmonic-mean CPO from a draws x observations matrix of log densities.
CpoResult cpo_from_log_densities(std::span<const double> log_density, std::size_t n_draws,
                                 std::size_t n_obs);
CpoResult compute_cpo_lpml(const PosteriorDraws& draws);

struct PValueResult {
  double p = 0.0;
  std::size_t n_draws = 0;
  std::size_t clamped = 0;  // probabilities clamped away from 0 / 1 in the discrepancy
};
// Pearson discrepancy sum (y - p)^2 / (p (1 - p)); p is clamped to
// [1e-12, 1 - 1e-12] and each clamp counted.
double pearson_discrepancy(std::span<const int> y, std::span<const double> p, std::size_t* clamped);
PValueResult bayesian_pvalue(const PosteriorDraws& draws, const Panel& panel, Rng& rng,
                             PValueMode mode = PValueMode::conditional);

struct FitSummary {
  DicResult dic;
  DevianceMode deviance_mode = DevianceMode::conditional;
  std::string plugin = "posterior mean of beta, phi, B; posterior mode of T";
  double lpml = 0.0;
  std::size_t cpo_underflows = 0;
  PValueResult pvalue;
  PValueMode pvalue_mode = PValueMode::conditional;
};

FitSummary summarize_fit(const PosteriorDraws& draws, const Panel& panel, Rng& rng,
                         DevianceMode deviance = DevianceMode::conditional,
                         PValueMode pvalue = PValueMode::conditional);

}  // namespace bridgecp
