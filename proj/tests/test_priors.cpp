#include <cmath>
#include <numeric>

#include "bridgecp/priors.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace bridgecp;

TEST_SUITE("priors") {

TEST_CASE("double-exponential coefficient prior") {
  const double tau = std::sqrt(2.0);
  CHECK(log_prior_beta_coordinate(0.0, tau) == doctest::Approx(std::log(tau / 2)).epsilon(1e-15));
  const std::vector<double> zeros(6, 0.0);
  CHECK(log_prior_beta(zeros, tau) == doctest::Approx(6 * std::log(tau / 2)).epsilon(1e-15));
  CHECK(log_prior_beta_coordinate(-1.7, tau) == log_prior_beta_coordinate(1.7, tau));
  const double mass = oracle::integrate([&](double b) { return std::exp(log_prior_beta_coordinate(b, tau)); }, -60, 60);
  CHECK(mass == doctest::Approx(1.0).epsilon(1e-10));

  Rng rng(11);
  std::vector<double> x(200000);
  for (auto& v : x) v = rng.laplace(tau);
  CHECK(oracle::sample_variance(x) == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("beta prior on phi") {
  CHECK(log_prior_phi(0.3, 1, 1) == 0.0);
  CHECK(log_prior_phi(0.5, 2, 1) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(log_prior_phi(0.9, 2, 1) == doctest::Approx(std::log(1.8)).epsilon(1e-15));
  for (double bad : {0.0, 1.0, -0.1, 1.2})
    CHECK(log_prior_phi(bad, 2, 1) == -std::numeric_limits<double>::infinity());
  CHECK(!std::isnan(log_prior_phi(std::nan(""), 2, 1)));
  const double m = oracle::integrate([](double p) { return p * std::exp(log_prior_phi(p, 2, 1)); }, 1e-12, 1 - 1e-12);
  CHECK(m == doctest::Approx(2.0 / 3.0).epsilon(1e-9));
}

TEST_CASE("Dirichlet prior on the change-point") {
  auto e = dirichlet_expectations({kAlphaEnthusiastic});
  CHECK(e == std::vector<double>{0.1, 0.1, 0.1, 0.6, 0.1});
  e = dirichlet_expectations({kAlphaModerate});
  CHECK(e[3] == doctest::Approx(5.0 / 11.4).epsilon(1e-15));
  CHECK(e[0] == doctest::Approx(1.6 / 11.4).epsilon(1e-15));
  e = dirichlet_expectations({kAlphaSkeptical});
  CHECK(e[3] == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK(e[0] == doctest::Approx(1.0 / 6.0).epsilon(1e-15));

  const DirichletWeights flat{{1, 1, 1}};
  const std::vector<double> g{0.2, 0.3, 0.5};
  CHECK(log_dirichlet(g, flat) == doctest::Approx(std::log(2.0)).epsilon(1e-14));
  const std::vector<double> off{0.2, 0.3, 0.6};
  CHECK(log_dirichlet(off, flat) == -std::numeric_limits<double>::infinity());
  CHECK_THROWS(DirichletWeights{{1, 0, 1}}.validate());
  CHECK_THROWS(DirichletWeights{{}}.validate());
}

TEST_CASE("named model configurations") {
  const std::vector<int> years{1992, 1993, 1994, 1995, 1996};
  for (int m = 1; m <= 8; ++m) {
    const ModelSpec s = model_spec(m);
    CHECK_NOTHROW(s.validate(years));
    CHECK(s.canonical());
    CHECK(s.tau == doctest::Approx(std::sqrt(2.0)));
  }
  for (int m : {1, 2, 3, 7, 8}) CHECK(model_spec(m).phi_a == 1.0);
  for (int m : {4, 5, 6}) {
    CHECK(model_spec(m).phi_a == 2.0);
    CHECK(model_spec(m).phi_b == 1.0);
  }
  CHECK(model_spec(1).dirichlet()->alpha == kAlphaEnthusiastic);
  CHECK(model_spec(5).dirichlet()->alpha == kAlphaModerate);
  CHECK(model_spec(3).dirichlet()->alpha == kAlphaSkeptical);
  CHECK(!model_spec(7).has_changepoint());
  CHECK(std::get<FixedChangepoint>(model_spec(8).changepoint).year == 1995);
  CHECK_THROWS(model_spec(0));
  CHECK_THROWS(model_spec(9));

  ModelSpec s = model_spec(1);
  s.phi_a = 3.0;
  CHECK(!s.canonical());
  CHECK_THROWS(s.validate(years));
  s = model_spec(1);
  CHECK_THROWS(s.validate(std::vector<int>{1994, 1995}));
  s.model_id.reset();
  s.tau = 0.0;
  CHECK_THROWS(s.validate(years));
  ModelSpec f = model_spec(8);
  f.model_id.reset();
  f.changepoint = FixedChangepoint{1990};
  CHECK_THROWS(f.validate(years));
}

TEST_CASE("prior-predictive odds") {
  Rng rng(1);
  const std::vector<PhiLaw> zero{PointMassLaw{0.0}};
  const auto degenerate = prior_predictive_odds(std::sqrt(2.0), zero, rng, 1000);
  CHECK(degenerate.lower == 1.0);
  CHECK(degenerate.upper == 1.0);

  // phi = 1: exp(beta) with beta ~ DE(0, tau); the 97.5% point is exp(log(20) / tau).
  const std::vector<PhiLaw> one{PointMassLaw{1.0}};
  const auto full = prior_predictive_odds(std::sqrt(2.0), one, rng, 400000);
  const double q = std::exp(std::log(20.0) / std::sqrt(2.0));
  CHECK(full.upper == doctest::Approx(q).epsilon(0.02));
  CHECK(full.lower == doctest::Approx(1.0 / q).epsilon(0.02));

  const std::vector<PhiLaw> none;
  CHECK_THROWS(prior_predictive_odds(1.0, none, rng, 10));
}

TEST_CASE("prior-predictive success probability") {
  Rng rng(2);
  const std::vector<double> x{0, 0, 0};
  const auto flat = prior_predictive_pstar(std::sqrt(2.0), BetaLaw{1, 1}, x, rng, 1000);
  CHECK(flat.lower == 0.5);
  CHECK(flat.upper == 0.5);
  const std::vector<double> x1{1, 1, 0, 1};
  Rng a(3), b(3);
  const auto wide = prior_predictive_pstar(0.5, BetaLaw{1, 1}, x1, a, 100000);
  const auto narrow = prior_predictive_pstar(4.0, BetaLaw{1, 1}, x1, b, 100000);
  CHECK(wide.lower < narrow.lower);
  CHECK(wide.upper > narrow.upper);
  CHECK(wide.lower == doctest::Approx(1.0 - wide.upper).epsilon(0.05));
}

}
