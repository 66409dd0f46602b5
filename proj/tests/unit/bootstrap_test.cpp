#include <gtest/gtest.h>

#include <boost/math/distributions/chi_squared.hpp>
#include <cmath>

#include "lsaboot/bootstrap.hpp"
#include "lsaboot/error.hpp"
#include "lsaboot/synthetic.hpp"
#include "lsaboot/td_garnet.hpp"
#include "test_support.hpp"

namespace lsaboot {
namespace {

using testing::gaussian_vector;

TdProblem desk_td() {
  RngStream rng(16, 0);
  GarnetMdp mdp = generate_garnet(5, 2, 2, 0.8, rng);
  RngStream prng(16, 1);
  Policy policy = random_policy(mdp, prng);
  return TdProblem(std::move(mdp), std::move(policy), FeatureMap::identity(5));
}

// A = I exactly, b_k = b_bar + N(0, I): Sigma_eps = Sigma_inf = I.
GaussianLsaProblem gaussian_toy(Eigen::Index d) {
  return GaussianLsaProblem(Matrix::Identity(d, d), Vector::Ones(d), 0.0, 1.0);
}

BootstrapOptions options(std::int64_t b, WeightLaw law, std::uint64_t seed, bool retain = false) {
  BootstrapOptions o;
  o.b_count = b;
  o.law = law;
  o.weight_seed = seed;
  o.retain = retain;
  return o;
}

TEST(SampleWeight, MomentsOfEveryLaw) {
  for (WeightLaw law : {WeightLaw::gaussian, WeightLaw::two_point, WeightLaw::exponential}) {
    RngStream rng(40, static_cast<std::uint64_t>(law));
    const int n = 1000000;
    double sum = 0, sum2 = 0;
    for (int i = 0; i < n; ++i) {
      const double w = sample_weight(law, rng);
      sum += w;
      sum2 += w * w;
    }
    const double mean = sum / n;
    EXPECT_NEAR(mean, 1.0, 0.004) << to_string(law);
    EXPECT_NEAR(sum2 / n - mean * mean, 1.0, 0.01) << to_string(law);
  }
}

TEST(SampleWeight, TwoPointSupport) {
  RngStream rng(41, 0);
  for (int i = 0; i < 10000; ++i) {
    const double w = sample_weight(WeightLaw::two_point, rng);
    ASSERT_TRUE(w == 0.0 || w == 2.0);
  }
}

TEST(WeightLawNames, RoundTrip) {
  for (WeightLaw law : {WeightLaw::gaussian, WeightLaw::two_point, WeightLaw::exponential, WeightLaw::unit}) {
    EXPECT_EQ(parse_weight_law(to_string(law)), law);
  }
  EXPECT_EQ(parse_weight_law("gaussian-mean1"), WeightLaw::gaussian);
  EXPECT_THROW(parse_weight_law("rademacher"), ValidationError);
}

TEST(RunBootstrap, UnitWeightsReproduceMainTrajectory) {
  RngStream rng(42, 0);
  const GaussianLsaProblem p(random_hurwitz_matrix(3, rng), gaussian_vector(3, rng), 0.3, 1.0);
  RngStream data(42, 1);
  const BootstrapEnsemble e =
      run_bootstrap(p, StepSchedule(0.3, 0.5), 50, Vector::Zero(3), data, options(4, WeightLaw::unit, 1, true));
  ASSERT_EQ(e.boot_averages.size(), 4u);
  for (const auto& avg : e.boot_averages) EXPECT_EQ(avg, e.main.theta_bar);
  for (const auto& trace : *e.traces) {
    for (std::size_t i = 0; i < trace.trajectory.size(); ++i) {
      EXPECT_EQ(trace.trajectory[i], e.main.theta(e.main.burn_in + static_cast<std::int64_t>(i)));
    }
  }
}

TEST(RunBootstrap, ZeroNoiseFromStarStaysAtStar) {
  RngStream rng(43, 0);
  const DeterministicLsaProblem p(random_hurwitz_matrix(3, rng), gaussian_vector(3, rng));
  for (WeightLaw law : {WeightLaw::gaussian, WeightLaw::two_point, WeightLaw::exponential}) {
    RngStream data(43, 1);
    const BootstrapEnsemble e =
        run_bootstrap(p, StepSchedule(0.3, 0.5), 30, p.exact()->theta_star(), data, options(5, law, 2));
    for (const auto& avg : e.boot_averages) EXPECT_LT((avg - p.exact()->theta_star()).norm(), 1e-12);
  }
}

TEST(RunBootstrap, SharedBurnInAndReplicaKeying) {
  RngStream rng(44, 0);
  const GaussianLsaProblem p(random_hurwitz_matrix(2, rng), gaussian_vector(2, rng), 0.2, 1.0);
  const StepSchedule s(0.3, 0.5);
  RngStream d1(44, 1), d2(44, 1), d3(44, 1);
  const auto small = run_bootstrap(p, s, 40, Vector::Zero(2), d1, options(3, WeightLaw::gaussian, 9, true));
  const auto large = run_bootstrap(p, s, 40, Vector::Zero(2), d2, options(6, WeightLaw::gaussian, 9));
  const auto other = run_bootstrap(p, s, 40, Vector::Zero(2), d3, options(3, WeightLaw::gaussian, 10));
  for (std::size_t j = 0; j < 3; ++j) {
    EXPECT_EQ(small.boot_averages[j], large.boot_averages[j]);
    EXPECT_EQ((*small.traces)[j].trajectory.front(), small.main.theta_at_n);
    EXPECT_NE(small.boot_averages[j], other.boot_averages[j]);
  }
  EXPECT_EQ(small.main.theta_bar, other.main.theta_bar);
  const auto& trace = (*small.traces)[0];
  EXPECT_EQ(static_cast<std::int64_t>(trace.trajectory.size()), small.main.n + 1);
  EXPECT_EQ(static_cast<std::int64_t>(trace.weights.size()), small.main.n);
}

TEST(RunBootstrap, BootAverageIsMeanOfReplicaWindow) {
  RngStream rng(45, 0);
  const GaussianLsaProblem p(random_hurwitz_matrix(2, rng), gaussian_vector(2, rng), 0.2, 1.0);
  RngStream data(45, 1);
  const auto e = run_bootstrap(p, StepSchedule(0.3, 0.5), 25, Vector::Zero(2), data,
                               options(2, WeightLaw::exponential, 3, true));
  for (std::size_t j = 0; j < 2; ++j) {
    Vector mean = Vector::Zero(2);
    const auto& traj = (*e.traces)[j].trajectory;
    for (std::size_t i = 0; i + 1 < traj.size(); ++i) mean += traj[i];
    mean /= 25.0;
    EXPECT_LT((mean - e.boot_averages[j]).norm(), 1e-13);
  }
}

TEST(ConfidenceSet, Examples) {
  const ConfidenceSet equal = confidence_set_from_statistics(Vector::Zero(2), 16, std::vector<double>(30, 2.0), 0.9);
  EXPECT_DOUBLE_EQ(equal.radius, 0.5);
  const ConfidenceSet four = confidence_set_from_statistics(Vector::Zero(2), 4, {4.0, 1.0, 3.0, 2.0}, 0.75);
  EXPECT_DOUBLE_EQ(four.radius, 1.5);
  EXPECT_TRUE(four.contains(Vector{{1.5, 0.0}}));
  EXPECT_FALSE(four.contains(Vector{{1.5, 0.01}}));
  EXPECT_THROW(confidence_set_from_statistics(Vector::Zero(1), 4, {1.0}, 1.0), ValidationError);
}

TEST(ConfidenceSet, ReplicaFloorAndLinearFunctional) {
  const GaussianLsaProblem p = gaussian_toy(2);
  RngStream data(46, 1);
  BootstrapOptions o = options(10, WeightLaw::gaussian, 4);
  o.statistic = Statistic::linear_functional(Vector{{1.0, -1.0}});
  const auto e = run_bootstrap(p, StepSchedule(0.5, 0.5), 64, Vector::Zero(2), data, o);
  EXPECT_THROW(confidence_set(e, 0.9), ValidationError);
  const ConfidenceSet cs = confidence_set(e, 0.9, 10);
  const Vector c{{1.0, -1.0}};
  const Vector inside = e.main.theta_bar + 0.99 * cs.radius * c / c.squaredNorm();
  const Vector outside = e.main.theta_bar + 1.01 * cs.radius * c / c.squaredNorm();
  EXPECT_TRUE(cs.contains(inside));
  EXPECT_FALSE(cs.contains(outside));
  // Orthogonal moves leave the functional unchanged.
  EXPECT_TRUE(cs.contains(e.main.theta_bar + 100.0 * Vector{{1.0, 1.0}}));
}

TEST(ConfidenceSet, GaussianToyRadiusMatchesChiQuantile) {
  const Eigen::Index d = 3;
  const GaussianLsaProblem p = gaussian_toy(d);
  const std::int64_t n = 4096;
  RngStream data(47, 0);
  const auto e = run_bootstrap(p, StepSchedule(0.5, 0.5), n, Vector::Zero(d), data,
                               options(1000, WeightLaw::gaussian, 5));
  const ConfidenceSet cs = confidence_set(e, 0.9);
  boost::math::chi_squared chi2(static_cast<double>(d));
  const double expected = std::sqrt(boost::math::quantile(chi2, 0.9)) / std::sqrt(static_cast<double>(n));
  EXPECT_NEAR(cs.radius, expected, 0.1 * expected);
}

TEST(DecomposeBootstrap, UnitWeightsVanish) {
  RngStream rng(48, 0);
  const GaussianLsaProblem p(random_hurwitz_matrix(3, rng), gaussian_vector(3, rng), 0.3, 1.0);
  const StepSchedule s(0.3, 0.5);
  RngStream data(48, 1);
  const auto e = run_bootstrap(p, s, 32, Vector::Zero(3), data, options(2, WeightLaw::unit, 1, true));
  const BootstrapDecomposition dec = decompose_bootstrap_error(e, 1, p, s);
  for (const Vector* v : {&dec.t_stat, &dec.w, &dec.d1, &dec.d2, &dec.d3, &dec.d4, &dec.d5}) {
    EXPECT_LT(v->norm(), 1e-12);
  }
}

TEST(DecomposeBootstrap, IdentityOnRandomInstances) {
  RngStream rng(49, 0);
  for (WeightLaw law : {WeightLaw::gaussian, WeightLaw::two_point, WeightLaw::exponential}) {
    const GaussianLsaProblem p(random_hurwitz_matrix(3, rng), gaussian_vector(3, rng), 0.3, 1.0);
    const StepSchedule s(0.3, 0.5);
    RngStream data(49, static_cast<std::uint64_t>(law) + 1);
    const auto e = run_bootstrap(p, s, 64, gaussian_vector(3, rng), data, options(3, law, 7, true));
    for (std::size_t j = 0; j < 3; ++j) {
      const BootstrapDecomposition dec = decompose_bootstrap_error(e, j, p, s);
      EXPECT_EQ(dec.d1.norm(), 0.0);
      EXPECT_LE(dec.relative_residual(), 1e-10);
      const Vector direct = 8.0 * p.exact()->a_bar() * (e.boot_averages[j] - e.main.theta_bar);
      EXPECT_LT((dec.t_stat - direct).norm(), 1e-12 * (1.0 + direct.norm()));
    }
  }
}

TEST(DecomposeBootstrap, RequiresRetention) {
  const GaussianLsaProblem p = gaussian_toy(2);
  const StepSchedule s(0.3, 0.5);
  RngStream data(50, 0);
  const auto e = run_bootstrap(p, s, 8, Vector::Zero(2), data, options(2, WeightLaw::gaussian, 1));
  EXPECT_THROW(decompose_bootstrap_error(e, 0, p, s), ValidationError);
}

TEST(GaussianComparison, Examples) {
  RngStream rng(51, 0);
  const Matrix m = testing::gaussian_matrix(3, 3, rng);
  const Matrix sigma = m * m.transpose() + Matrix::Identity(3, 3);
  EXPECT_NEAR(gaussian_comparison(sigma, sigma), 0.0, 1e-12);
  EXPECT_NEAR(gaussian_comparison(Matrix::Constant(1, 1, 1.0), Matrix::Constant(1, 1, 2.0)), 0.5, 1e-15);
  EXPECT_THROW(gaussian_comparison(Matrix::Zero(2, 2), Matrix::Identity(2, 2)), ValidationError);
}

TEST(GaussianComparison, GarnetBoundIsUsuallySmall) {
  const TdProblem p = desk_td();
  const StepSchedule s(4.0, 0.5);
  int small = 0;
  const int reps = 100;
  for (int r = 0; r < reps; ++r) {
    RngStream rng(52, static_cast<std::uint64_t>(r));
    const LsaRun run = run_lsa(p, s, 10000, Vector::Zero(5), rng, {BurnIn::tail(), true});
    small += gaussian_comparison(p.truth().sigma_eps, bootstrap_noise_covariance(run, p)) <= 0.2;
  }
  EXPECT_GE(small, 90);
}

TEST(BinomialInterval, ClopperPearsonValues) {
  const auto [lo0, hi0] = binomial_interval(0, 10);
  EXPECT_EQ(lo0, 0.0);
  EXPECT_NEAR(hi0, 1.0 - std::pow(0.025, 0.1), 1e-12);
  const auto [lo10, hi10] = binomial_interval(10, 10);
  EXPECT_NEAR(lo10, std::pow(0.025, 0.1), 1e-12);
  EXPECT_EQ(hi10, 1.0);
  const auto [lo5, hi5] = binomial_interval(5, 10);
  EXPECT_NEAR(lo5, 0.187086, 1e-6);
  EXPECT_NEAR(hi5, 0.812914, 1e-6);
  const auto [lo1, hi1] = binomial_interval(1, 1);
  EXPECT_EQ(lo1, 0.0);
  EXPECT_EQ(hi1, 1.0);
}

CoverageConfig toy_coverage(std::size_t runs, std::int64_t b, std::vector<double> levels, WeightLaw law,
                            std::int64_t n = 128) {
  CoverageConfig c;
  c.schedule = StepSchedule(0.5, 0.5);
  c.n = n;
  c.bootstrap = options(b, law, 11);
  c.levels = std::move(levels);
  c.data_seed = 12;
  c.runs = runs;
  return c;
}

TEST(EvaluateCoverage, UnitWeightsNeverCover) {
  const GaussianLsaProblem p = gaussian_toy(2);
  const CoverageResult r = evaluate_coverage(p, toy_coverage(20, 20, {0.9}, WeightLaw::unit));
  EXPECT_EQ(r.estimates.at(0).coverage, 0.0);
  for (const auto& run : r.runs) EXPECT_EQ(run.quantile(0.9), 0.0);
}

TEST(EvaluateCoverage, SymmetricToyAtLevelHalf) {
  const GaussianLsaProblem p = gaussian_toy(2);
  // Small n under-disperses the replicas; by n = 2048 the bias is below the Monte Carlo error.
  const CoverageResult r =
      evaluate_coverage(p, toy_coverage(1000, 50, {0.5, 0.999}, WeightLaw::gaussian, 2048));
  EXPECT_NEAR(r.estimates.at(0).coverage, 0.5, 0.05);
  EXPECT_GE(r.estimates.at(1).coverage, 0.95);
  EXPECT_LE(r.estimates.at(0).lo, r.estimates.at(0).coverage);
  EXPECT_GE(r.estimates.at(0).hi, r.estimates.at(0).coverage);
}

TEST(EvaluateCoverage, MonotoneInLevel) {
  const GaussianLsaProblem p = gaussian_toy(2);
  std::vector<double> levels;
  for (int i = 1; i < 20; ++i) levels.push_back(i / 20.0);
  const CoverageResult r = evaluate_coverage(p, toy_coverage(100, 40, levels, WeightLaw::gaussian));
  for (std::size_t i = 1; i < r.estimates.size(); ++i) {
    EXPECT_GE(r.estimates[i].coverage, r.estimates[i - 1].coverage);
  }
}

TEST(EvaluateCoverage, IndependentOfWorkerCount) {
  const GaussianLsaProblem p = gaussian_toy(2);
  CoverageConfig c = toy_coverage(30, 20, {0.9}, WeightLaw::gaussian);
  c.workers = 1;
  const CoverageResult one = evaluate_coverage(p, c);
  c.workers = 4;
  const CoverageResult four = evaluate_coverage(p, c);
  ASSERT_EQ(one.runs.size(), four.runs.size());
  for (std::size_t i = 0; i < one.runs.size(); ++i) {
    EXPECT_EQ(one.runs[i].true_statistic, four.runs[i].true_statistic);
    EXPECT_EQ(one.runs[i].boot_statistics, four.runs[i].boot_statistics);
  }
}

TEST(EvaluateCoverage, SingleRunGivesDegenerateInterval) {
  const GaussianLsaProblem p = gaussian_toy(2);
  const CoverageResult r = evaluate_coverage(p, toy_coverage(1, 20, {0.9}, WeightLaw::gaussian));
  ASSERT_EQ(r.estimates.size(), 1u);
  EXPECT_TRUE(r.estimates[0].coverage == 0.0 || r.estimates[0].coverage == 1.0);
  EXPECT_EQ(r.estimates[0].lo, 0.0);
  EXPECT_EQ(r.estimates[0].hi, 1.0);
}

TEST(EvaluateCoverage, StopFlagKeepsPrefix) {
  const GaussianLsaProblem p = gaussian_toy(2);
  const std::atomic<bool> stop{true};
  const CoverageResult r = evaluate_coverage(p, toy_coverage(10, 20, {0.9}, WeightLaw::gaussian), &stop);
  EXPECT_TRUE(r.runs.empty());
  EXPECT_TRUE(r.estimates.empty());
}

}  // namespace
}  // namespace lsaboot
