#pragma once

// Systematic-scan Gibbs sampler over (B, beta, phi, T, gamma). Every
// continuous scalar is drawn with a doubling / shrinkage slice sampler;
// T is an exact discrete draw and gamma a conjugate Dirichlet draw.

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "bridgecp/model.hpp"

namespace bridgecp {

/// Raised when doubling fails to bracket the slice, or shrinkage does not
/// terminate. The message carries the offending scalar and a dump of
/// the chain state.
class SliceError : public std::runtime_error {
 public:
  explicit SliceError(const std::string& what) : std::runtime_error(what) {}
};

struct SliceTuning {
  double initial_width = 1.0;
  int max_doublings = 60;  // interval doublings allowed before SliceError
};

struct SamplerConfig {
  std::size_t n_iterations = 50000;
  std::size_t burn_in = 45000;
  std::size_t thinning = 1;
  std::size_t n_chains = 2;
  std::uint64_t seed = 0;
  SliceTuning slice;
  // Slice widths follow the observed jump sizes during burn-in, then freeze.
  bool adapt_widths = true;
  // Draw T with gamma integrated out, then gamma given T.
  bool collapse_gamma = false;
  // Add the intercept-shift and non-centred phi moves to each sweep.
  bool interweave = true;
  // Over-dispersed starting values, scale 1, for between-chain diagnostics.
  bool jitter_init = true;

  void validate() const;
  std::size_t retained_per_chain() const;
};

std::string describe(const ChainState& state);

/// One chain. Owns its state, its random stream and the cached linear
/// predictors; the panel and spec are borrowed and must outlive it.
class GibbsSampler {
 public:
  GibbsSampler(const Panel& panel, const ModelSpec& spec, const SamplerConfig& config,
               ChainState initial, Rng rng);

  double update_random_effect(std::size_t i);
  double update_beta1(std::size_t k);
  double update_beta2(std::size_t k);
  double update_phi();
  // Redraws phi with the bridge uniforms F(B_i | phi) held fixed.
  double update_phi_noncentered();
  // Moves (intercept + c, B - c) along the direction that leaves the
  // likelihood unchanged.
  double shift_intercept();
  int update_changepoint();
  // Conditional probabilities of each candidate year given the rest.
  std::vector<double> changepoint_probabilities() const;
  const std::vector<double>& update_gamma();

  // One full scan. Widths adapt only when `adapt` is set.
  void sweep(bool adapt = false);

  const ChainState& state() const { return state_; }
  void set_state(ChainState state);
  double log_likelihood() const;
  void observation_log_densities(std::span<double> out) const;
  Rng& rng() { return rng_; }

 private:
  enum Width : std::size_t { kB, kPhi, kPhiNc, kShift, kBeta1 };
  template <class F>
  double slice(double x0, F&& log_density, std::size_t width_slot, const char* what);
  void resync();
  void adapt_widths();
  double eta(std::size_t r) const;
  double width(std::size_t slot) const { return widths_[slot]; }

  const Panel& panel_;
  const ModelSpec& spec_;
  SamplerConfig config_;
  ChainState state_;
  Rng rng_;

  std::vector<double> fixed_;  // beta1 . x1 per record
  std::vector<double> cp_;     // beta2 . x2(t, T) per record
  std::vector<int> y_;
  std::size_t t_index_ = 0;
  std::vector<std::vector<std::array<double, kChangepointTerms>>> x2_;  // [candidate][record]
  std::vector<std::vector<std::pair<std::size_t, double>>> nz1_;       // nonzero x1 entries by column
  std::vector<std::array<std::vector<std::pair<std::size_t, double>>, kChangepointTerms>> nz2_;
  std::vector<std::size_t> cp_records_;  // records that can be at or after a candidate year
  std::ptrdiff_t intercept_column_ = -1;

  std::vector<double> widths_;
  std::vector<double> jump_sum_;
  std::vector<std::size_t> jump_count_;
  std::size_t adapt_calls_ = 0;
  std::vector<double> scratch_;
};

struct Draw {
  std::size_t chain = 0;
  std::size_t iteration = 0;  // 1-based sweep index
  ChainState state;
  double log_likelihood = 0.0;
};

/// Retained post-burn-in samples of every chain, chain-major.
struct PosteriorDraws {
  std::vector<std::string> beta1_names;
  std::vector<std::string> beta2_names;
  std::vector<int> candidate_years;
  bool has_changepoint = false;
  bool has_gamma = false;
  std::size_t n_chains = 0;
  std::vector<Draw> draws;
  std::size_t n_obs = 0;
  std::vector<double> obs_log_density;  // draws.size() x n_obs, row-major

  std::span<const double> obs_row(std::size_t g) const {
    return {obs_log_density.data() + g * n_obs, n_obs};
  }
  std::vector<const Draw*> chain(std::size_t c) const;
};

ChainState initial_state(const Panel& panel, const ModelSpec& spec, bool jitter, Rng& rng);

PosteriorDraws run_chains(const Panel& panel, const ModelSpec& spec, const SamplerConfig& config);

// Names of the scalar parameters summarized by the diagnostics: the beta
// coordinates, phi, and, when present, T and gamma.
std::vector<std::string> scalar_parameter_names(const PosteriorDraws& draws);
// Values of one named scalar, one vector per chain.
std::vector<std::vector<double>> parameter_by_chain(const PosteriorDraws& draws,
                                                   const std::string& name);
std::function<double(const Draw&)> parameter_selector(const PosteriorDraws& draws,
                                                      const std::string& name);

// Split-chain potential scale reduction factor. A parameter that is
// constant across all draws gets 1 by convention. Needs >= 2 chains.
double gelman_rubin(const std::vector<std::vector<double>>& chains);
double gelman_rubin(const PosteriorDraws& draws, const std::string& name);

struct AcfResult {
  std::vector<double> acf;  // lags 0..max_lag
  double ess = 0.0;
};
// ACF and effective sample size (Geyer's initial positive sequence).
AcfResult autocorrelation_and_ess(std::span<const double> series, std::size_t max_lag);
// Chains pooled: ACF averaged over chains, ESS summed over chains.
AcfResult autocorrelation_and_ess(const PosteriorDraws& draws, const std::string& name,
                                  std::size_t max_lag);

}  // namespace bridgecp
