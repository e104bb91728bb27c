#pragma once

// Longitudinal panel of binary charge decisions clustered by youth, the
// change-point design basis, and the likelihood / posterior evaluations.

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "bridgecp/bridge.hpp"
#include "bridgecp/priors.hpp"

namespace bridgecp {

/// Input validation failure; carries the 1-based source row when known.
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

struct ChargeRecord {
  std::string youth_id;
  int year = 0;
  double age = 0.0;
  int repeat_offense = 0;
  int severe = 0;
  int outcome = 0;  // 1 = moving forward
  int source_row = 0;  // 0 when not read from a file
};

enum class NotificationCoding {
  none,         // no notification covariate
  from_year,    // 1[t >= notification_year]
  single_year,  // 1[t == notification_year]
};

struct DesignConfig {
  bool intercept = true;
  std::optional<double> age_center;  // unset: median age of the panel
  int year_center = 1995;
  NotificationCoding notification = NotificationCoding::from_year;
  int notification_year = 2000;
};

struct PanelOptions {
  int first_year = 1988;
  int last_year = 2005;
  std::vector<int> candidate_years{1992, 1993, 1994, 1995, 1996};
  bool strict = true;  // strict: every cluster needs >= 2 records
  DesignConfig design;
};

inline constexpr std::size_t kChangepointTerms = 4;

struct DesignVector {
  std::vector<double> x1;
  std::array<double, kChangepointTerms> x2{};
};

struct Cluster {
  std::string youth_id;
  std::size_t begin = 0;  // record range [begin, end)
  std::size_t end = 0;
  std::size_t size() const { return end - begin; }
};

/// Immutable validated panel. Records are grouped by youth (in order of
/// first appearance) and sorted by year within each youth.
class Panel {
 public:
  explicit Panel(std::vector<ChargeRecord> records, PanelOptions options = {},
                 std::vector<std::string> extra_youths = {});

  const std::vector<ChargeRecord>& records() const { return records_; }
  const std::vector<Cluster>& clusters() const { return clusters_; }
  const PanelOptions& options() const { return options_; }
  const std::vector<int>& candidate_years() const { return options_.candidate_years; }
  const std::vector<std::string>& warnings() const { return warnings_; }

  std::size_t n_records() const { return records_.size(); }
  std::size_t n_clusters() const { return clusters_.size(); }
  std::size_t cluster_of(std::size_t record) const { return record_cluster_[record]; }
  std::optional<std::size_t> find_cluster(const std::string& youth_id) const;

  double age_center() const { return age_center_; }
  std::size_t p1() const { return x1_names_.size(); }
  std::size_t p2() const { return kChangepointTerms; }
  const std::vector<std::string>& x1_names() const { return x1_names_; }
  static const std::vector<std::string>& x2_names();
  std::span<const double> x1(std::size_t record) const {
    return {x1_.data() + record * p1(), p1()};
  }
  std::size_t candidate_index(int year) const;

  // Same structure with replaced outcomes (used for replicate data).
  Panel with_outcomes(std::span<const int> outcomes) const;

  std::string canonical_text() const;
  std::string hash() const;

 private:
  std::vector<ChargeRecord> records_;
  PanelOptions options_;
  std::vector<Cluster> clusters_;
  std::vector<std::size_t> record_cluster_;
  std::unordered_map<std::string, std::size_t> cluster_index_;
  std::vector<std::string> warnings_;
  double age_center_ = 0.0;
  std::vector<std::string> x1_names_;
  std::vector<double> x1_;
};

std::vector<std::string> x1_names(const DesignConfig& design);

DesignVector design_vectors(const ChargeRecord& record, std::optional<int> changepoint,
                            const DesignConfig& design, double age_center);
std::array<double, kChangepointTerms> changepoint_basis(const ChargeRecord& record, int changepoint);

/// One Gibbs chain's parameter values. Without a change-point, beta2 is
/// empty and T unset; without a Dirichlet prior, gamma is empty.
struct ChainState {
  std::vector<double> beta1;
  std::vector<double> beta2;
  std::vector<double> B;
  double phi = 0.5;
  std::optional<int> T;
  std::vector<double> gamma;

  // Throws std::invalid_argument if dimensions or supports are wrong.
  void check(const Panel& panel, const ModelSpec& spec) const;
};

double linear_predictor(std::span<const double> beta1, std::span<const double> beta2,
                        const Panel& panel, std::size_t record, std::optional<int> changepoint);

// logistic(B_i + beta1 . x1 + beta2 . x2(t, T)).
double conditional_prob(const ChainState& state, const Panel& panel, std::size_t record);
// Looks the youth up by id; an unknown id is a structural error.
double conditional_prob(const ChainState& state, const Panel& panel, const ChargeRecord& record);

// logistic(phi (beta1 . x1 + beta2 . x2(t, T))), no random effect needed.
double marginal_prob(std::span<const double> beta1, std::span<const double> beta2, double phi,
                     const Panel& panel, std::size_t record, std::optional<int> changepoint);

double log_likelihood(const ChainState& state, const Panel& panel);
// Bernoulli log density of each observation given the state.
std::vector<double> observation_log_densities(const ChainState& state, const Panel& panel);
// Log likelihood with the random effects integrated out (marginal link).
double marginal_log_likelihood(const ChainState& state, const Panel& panel);

struct LogPosteriorTerms {
  double log_likelihood = 0.0;
  double random_effects = 0.0;
  double changepoint = 0.0;  // log pi(T | gamma)
  double gamma = 0.0;
  double beta = 0.0;
  double phi = 0.0;
  double total() const {
    return log_likelihood + random_effects + changepoint + gamma + beta + phi;
  }
};

// Unnormalized log joint posterior, split into its terms. Any term is -inf
// when phi, gamma or T lie outside their support.
LogPosteriorTerms log_posterior_terms(const ChainState& state, const Panel& panel,
                                      const ModelSpec& spec);
double log_posterior(const ChainState& state, const Panel& panel, const ModelSpec& spec);

struct PosteriorGradient {
  std::vector<double> beta1;
  std::vector<double> beta2;
  std::vector<double> B;
};
// Gradient of log_posterior in beta and B (DE prior differentiated away
// from zero).
PosteriorGradient log_posterior_gradient(const ChainState& state, const Panel& panel,
                                         const ModelSpec& spec);

// Outcomes drawn from the conditional model at the given state.
std::vector<int> simulate_outcomes(const ChainState& state, const Panel& panel, Rng& rng);

// A joint prior draw of every parameter, sized for the panel.
ChainState sample_prior_state(const Panel& panel, const ModelSpec& spec, Rng& rng);

}  // namespace bridgecp
