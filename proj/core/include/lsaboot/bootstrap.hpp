#pragma once

#include <atomic>
#include <cstdint>
#include <optional>
#include <string_view>
#include <utility>
#include <vector>

#include "lsaboot/lsa.hpp"
#include "lsaboot/numkit.hpp"
#include "lsaboot/rng.hpp"

namespace lsaboot {

/// Multiplier laws. All but `unit` have mean 1 and variance 1; `unit` (w = 1)
/// exists for tests and makes every replica reproduce the main trajectory.
enum class WeightLaw { gaussian, two_point, exponential, unit };

double sample_weight(WeightLaw law, RngStream& rng);
std::string_view to_string(WeightLaw law);
WeightLaw parse_weight_law(std::string_view name);

/// The scalar statistic behind a confidence set: Euclidean norm, or |c^T x|.
class Statistic {
 public:
  static Statistic norm_ball() { return Statistic(); }
  static Statistic linear_functional(Vector c);

  double operator()(const Vector& x) const;
  bool is_norm_ball() const noexcept { return !functional_.has_value(); }
  const std::optional<Vector>& functional() const noexcept { return functional_; }

 private:
  std::optional<Vector> functional_;
};

struct BootstrapOptions {
  std::int64_t b_count = 200;
  WeightLaw law = WeightLaw::gaussian;
  /// Replica j draws its weights, in step order, from RngStream(weight_seed, j).
  std::uint64_t weight_seed = 0;
  BurnIn burn_in = BurnIn::tail();
  Statistic statistic = Statistic::norm_ball();
  /// Keep the main trajectory and every replica's iterates and weights.
  bool retain = false;
};

/// Iterates theta^b_k for k = n0 ... n0 + n and weights w_k for k = n0+1 ... n0+n.
struct ReplicaTrace {
  std::vector<Vector> trajectory;
  std::vector<double> weights;
};

struct BootstrapEnsemble {
  std::int64_t b_count = 0;
  LsaRun main;
  std::vector<Vector> boot_averages;
  Statistic statistic;
  std::optional<std::vector<ReplicaTrace>> traces;

  /// statistic(sqrt(n) (theta_bar^b_j - theta_bar_n)) for every replica j.
  std::vector<double> statistics() const;
};

/// One pass over 2n (or n0 + n) observations: the main LSA trajectory plus
/// b_count replicas restarted from theta_{n0} and updated with
/// theta^b_k = theta^b_{k-1} - alpha_k w_k (A_k theta^b_{k-1} - b_k).
BootstrapEnsemble run_bootstrap(const LsaProblem& p, const StepSchedule& s, std::int64_t n,
                                const Vector& theta0, RngStream& data_rng,
                                const BootstrapOptions& options);

struct ConfidenceSet {
  Vector center;
  double radius = 0.0;
  double level = 0.0;
  std::int64_t n = 0;
  Statistic statistic;

  bool contains(const Vector& theta) const;
};

/// Radius = empirical_quantile(statistics, level) / sqrt(n), no replica floor.
ConfidenceSet confidence_set_from_statistics(const Vector& center, std::int64_t n,
                                             const std::vector<double>& statistics, double level,
                                             Statistic statistic = Statistic::norm_ball());

/// Requires at least `min_replicas` bootstrap replicas.
ConfidenceSet confidence_set(const BootstrapEnsemble& e, double level, std::int64_t min_replicas = 20);

/// sqrt(n) A_bar (theta_bar^b - theta_bar) = -W^b + D1^b - D2^b - D3^b + D4^b - D5^b.
struct BootstrapDecomposition {
  Vector t_stat;
  Vector w;
  Vector d1, d2, d3, d4, d5;

  Vector reconstruction() const { return -w + d1 - d2 - d3 + d4 - d5; }
  double relative_residual() const;
};

BootstrapDecomposition decompose_bootstrap_error(const BootstrapEnsemble& e, std::size_t replica,
                                                 const LsaProblem& p, const StepSchedule& s);

/// n^{-1} sum of eps_k eps_k^T over the averaging window k = n0+1 ... n0+n.
Matrix bootstrap_noise_covariance(const LsaRun& run, const LsaProblem& p);

/// (sqrt(d)/2) |Sigma_eps^{-1/2} Sigma_eps^b Sigma_eps^{-1/2} - I|.
double gaussian_comparison(const Matrix& sigma_eps, const Matrix& sigma_eps_boot);

/// Exact (Clopper-Pearson) two-sided interval for a binomial proportion.
/// A single trial carries no interval information and yields [0, 1].
std::pair<double, double> binomial_interval(std::size_t successes, std::size_t trials,
                                            double confidence = 0.95);

struct CoverageConfig {
  StepSchedule schedule{1.0, 0.5};
  std::int64_t n = 1024;
  Vector theta0;
  BootstrapOptions bootstrap;
  std::vector<double> levels{0.9};
  std::uint64_t data_seed = 0;
  std::size_t runs = 100;
  unsigned workers = 1;
};

/// Outcome of one outer replication.
struct CoverageRun {
  std::size_t run_id = 0;
  /// statistic(sqrt(n) (theta_bar_n - theta*)).
  double true_statistic = 0.0;
  /// statistic(sqrt(n) (theta_bar^b - theta_bar_n)), sorted ascending.
  std::vector<double> boot_statistics;

  double quantile(double level) const;
  bool covered(double level) const { return true_statistic <= quantile(level); }
};

struct CoverageEstimate {
  double level = 0.0;
  std::int64_t n = 0;
  std::int64_t b_count = 0;
  std::size_t covered = 0;
  std::size_t runs = 0;
  double coverage = 0.0;
  double lo = 0.0;
  double hi = 1.0;
};

struct CoverageResult {
  std::vector<CoverageRun> runs;
  std::vector<CoverageEstimate> estimates;  // one per level
};

CoverageEstimate coverage_at(const std::vector<CoverageRun>& runs, double level, std::int64_t n,
                             std::int64_t b_count);

/// Outer run r uses RngStream(data_seed, r) for data and weight seed
/// mix_seed(bootstrap.weight_seed, r) for its replicas.
CoverageResult evaluate_coverage(const LsaProblem& p, const CoverageConfig& config,
                                 const std::atomic<bool>* stop = nullptr);

}  // namespace lsaboot
