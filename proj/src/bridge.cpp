#include "bridgecp/bridge.hpp"

#include <stdexcept>
#include <string>

namespace bridgecp {

namespace {

// Above this |phi b| the density is evaluated from its exponential tail form.
constexpr double kTailSwitch = 30.0;

// Quantile given both tail masses u and s = 1 - u, so either can be tiny.
double quantile_from_tails(double u, double s, double phi) {
  const double a = phi * kPi;
  return (std::log(std::sin(a * u)) - std::log(std::sin(a * s))) / phi;
}

}  // namespace

BridgeParam::BridgeParam(double phi) : phi_(phi) {
  if (!valid(phi))
    throw std::invalid_argument("bridge parameter phi must lie in [1e-6, 1 - 1e-6], got " +
                                std::to_string(phi));
}

BridgeLogDensity::BridgeLogDensity(BridgeParam phi) : phi_(phi.value()) {
  const double a = phi_ * kPi;
  log_norm_ = std::log(std::sin(a) / (2.0 * kPi));
  const double ch = std::cos(0.5 * a);
  cos_half_sq_ = 2.0 * ch * ch;
  cos_a_ = std::cos(a);
}

// log(cosh x + cos a) is evaluated as log(2 sinh^2(x/2) + 2 cos^2(a/2)),
// which avoids cancellation as a -> pi.
double BridgeLogDensity::operator()(double b) const {
  const double x = std::abs(phi_ * b);
  if (x <= kTailSwitch) {
    const double e = std::exp(0.5 * x);
    const double sh = 0.5 * (e - 1.0 / e);
    return log_norm_ - std::log(2.0 * sh * sh + cos_half_sq_);
  }
  const double e = std::exp(-x);
  return log_norm_ - (x - std::log(2.0) + std::log1p(2.0 * cos_a_ * e + e * e));
}

double bridge_log_pdf(double b, BridgeParam phi) { return BridgeLogDensity(phi)(b); }

double bridge_pdf(double b, BridgeParam phi) { return std::exp(bridge_log_pdf(b, phi)); }

double bridge_survival(double b, BridgeParam phi) {
  if (b < 0.0) return 1.0 - bridge_survival(-b, phi);
  const double p = phi.value();
  const double a = p * kPi;
  const double k = std::tan(0.5 * a);
  const double x = p * b;
  const double e = std::exp(-x);
  const double t = (1.0 - e) / (1.0 + e);     // tanh(x / 2)
  const double one_minus_t = 2.0 * e / (1.0 + e);
  return std::atan(k * one_minus_t / (1.0 + k * k * t)) / a;
}

double bridge_cdf(double b, BridgeParam phi) {
  return b >= 0.0 ? 1.0 - bridge_survival(b, phi) : bridge_survival(-b, phi);
}

double bridge_quantile(double u, BridgeParam phi) {
  if (!(u > 0.0 && u < 1.0))
    throw std::invalid_argument("bridge quantile needs u in (0, 1)");
  return quantile_from_tails(u, 1.0 - u, phi.value());
}

double bridge_quantile_tails(double u, double s, BridgeParam phi) {
  return quantile_from_tails(u, s, phi.value());
}

double bridge_variance(BridgeParam phi) {
  const double p = phi.value();
  return kPi * kPi * (1.0 / (p * p) - 1.0) / 3.0;
}

BridgeParam phi_for_variance(double variance) {
  if (!(variance > 0.0)) throw std::invalid_argument("bridge variance must be positive");
  return BridgeParam(1.0 / std::sqrt(1.0 + 3.0 * variance / (kPi * kPi)));
}

double bridge_draw(BridgeParam phi, Rng& rng) {
  const double u = rng.uniform();
  return quantile_from_tails(u, 1.0 - u, phi.value());
}

std::vector<double> bridge_sample(BridgeParam phi, Rng& rng, std::size_t n) {
  if (n == 0) throw std::invalid_argument("bridge_sample needs n >= 1");
  std::vector<double> out(n);
  for (double& v : out) v = bridge_draw(phi, rng);
  return out;
}

double marginalize_logit(double eta, BridgeParam phi) { return logistic(phi.value() * eta); }

std::vector<DensityRow> matched_density_table(double variance, double dof, double lo,
                                              double hi, std::size_t points) {
  if (points < 2 || !(hi > lo)) throw std::invalid_argument("density table needs a grid");
  if (!(dof > 2.0)) throw std::invalid_argument("t density needs dof > 2 for a variance");
  const BridgeParam phi = phi_for_variance(variance);
  const double sd = std::sqrt(variance);
  const double t_scale = std::sqrt(variance * (dof - 2.0) / dof);
  const double t_log_norm = std::lgamma(0.5 * (dof + 1.0)) - std::lgamma(0.5 * dof) -
                            0.5 * std::log(dof * kPi) - std::log(t_scale);
  std::vector<DensityRow> rows;
  rows.reserve(points);
  for (std::size_t k = 0; k < points; ++k) {
    const double x = lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(points - 1);
    const double z = x / sd;
    const double tz = x / t_scale;
    rows.push_back({x, bridge_pdf(x, phi), std::exp(-0.5 * z * z) / (sd * std::sqrt(2.0 * kPi)),
                    std::exp(t_log_norm - 0.5 * (dof + 1.0) * std::log1p(tz * tz / dof))});
  }
  return rows;
}

}  // namespace bridgecp
