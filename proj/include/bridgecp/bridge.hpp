#pragma once

// The bridge distribution: a symmetric random-intercept law whose
// logit-mixture keeps the logistic form, with the intercept scale
// attenuated by phi.
//
//   f(b | phi) = sin(phi pi) / (2 pi (cosh(phi b) + cos(phi pi)))
//   F(b | phi) = 1/2 + atan(tan(phi pi / 2) tanh(phi b / 2)) / (phi pi)
//   Q(u | phi) = (log sin(phi pi u) - log sin(phi pi (1 - u))) / phi
//   Var        = pi^2 (phi^-2 - 1) / 3
//   E_B[logistic(B + eta)] = logistic(phi eta)

#include <cstddef>
#include <vector>

#include "bridgecp/numeric.hpp"

namespace bridgecp {

/// Attenuation / heterogeneity parameter, strictly inside (0, 1).
/// Values outside [kMin, kMax] are rejected; the open-interval limits are
/// degenerate and not usable numerically.
class BridgeParam {
 public:
  static constexpr double kMin = 1e-6;
  static constexpr double kMax = 1.0 - 1e-6;

  explicit BridgeParam(double phi);

  double value() const { return phi_; }
  static bool valid(double phi) { return phi >= kMin && phi <= kMax; }

 private:
  double phi_;
};

double bridge_pdf(double b, BridgeParam phi);
double bridge_log_pdf(double b, BridgeParam phi);

// bridge_log_pdf with the phi-dependent constants computed once, for loops
// over many b at a fixed phi.
class BridgeLogDensity {
 public:
  explicit BridgeLogDensity(BridgeParam phi);
  double operator()(double b) const;

 private:
  double phi_;
  double log_norm_;  // log(sin(phi pi) / (2 pi))
  double cos_half_sq_;  // 2 cos^2(phi pi / 2)
  double cos_a_;
};
double bridge_cdf(double b, BridgeParam phi);
// 1 - F(b), accurate in the upper tail.
double bridge_survival(double b, BridgeParam phi);
double bridge_quantile(double u, BridgeParam phi);
double bridge_variance(BridgeParam phi);
// Quantile from both tail masses u and s = 1 - u, so that either may be tiny.
double bridge_quantile_tails(double u, double s, BridgeParam phi);

// The phi whose bridge law has the requested variance.
BridgeParam phi_for_variance(double variance);

// Inverse-CDF draws; n must be positive.
std::vector<double> bridge_sample(BridgeParam phi, Rng& rng, std::size_t n);
double bridge_draw(BridgeParam phi, Rng& rng);

// Population-averaged success probability for linear predictor eta.
double marginalize_logit(double eta, BridgeParam phi);

// Bridge, normal and t(dof) densities sharing one variance, tabulated on a
// grid over [lo, hi]. Plotting aid only.
struct DensityRow {
  double x;
  double bridge;
  double normal;
  double student_t;
};
std::vector<DensityRow> matched_density_table(double variance, double dof, double lo,
                                              double hi, std::size_t points);

}  // namespace bridgecp
