#pragma once

// Small numeric kernels and the seeded random source shared by every module.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <string_view>
#include <vector>

namespace bridgecp {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// log(1 + e^x) without overflow.
inline double log1pexp(double x) {
  return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

inline double logistic(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// log P(Y = y) for Y ~ Bernoulli(logistic(eta)). Accurate to ~1e-16 in
// absolute terms, which is what sums of log densities need; log(1 + e) is
// markedly cheaper than log1p here.
inline double bernoulli_logit_log_density(int y, double eta) {
  const double z = y ? -eta : eta;
  const double e = std::exp(-std::abs(z));
  return -(std::max(z, 0.0) + std::log(1.0 + e));
}

double log_sum_exp(std::span<const double> values);

double mean(std::span<const double> x);
// Sample variance with the n - 1 denominator; zero for fewer than two values.
double variance(std::span<const double> x);

// Linear-interpolation quantile (R type 7) of an already sorted range.
double sorted_quantile(std::span<const double> sorted, double prob);
// Copies and sorts before interpolating.
double quantile(std::span<const double> x, double prob);

std::uint64_t splitmix64(std::uint64_t& state);

// 64-bit FNV-1a, used for config/spec/panel provenance hashes.
std::uint64_t fnv1a64(std::string_view bytes);
std::string hash_hex(std::uint64_t h);

/// Seeded random source. Each chain owns one; streams for chains and
/// auxiliary tasks are derived from a master seed with `Rng::derive`.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // The stream numbered `index` for a master seed: the (index + 1)-th
  // output of SplitMix64 started at `master`.
  static Rng derive(std::uint64_t master, std::uint64_t index);

  // Uniform on the open interval (0, 1).
  double uniform() {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  }
  double exponential() { return -std::log(uniform()); }
  double normal() { return normal_(engine_); }
  double gamma(double shape);
  double beta(double a, double b);
  // Laplace(0, 1 / rate): density rate/2 exp(-rate |x|).
  double laplace(double rate);
  std::size_t categorical(std::span<const double> probs);
  std::vector<double> dirichlet(std::span<const double> alpha);
  int bernoulli(double p) { return uniform() < p ? 1 : 0; }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace bridgecp
