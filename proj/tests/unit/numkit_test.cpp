#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "lsaboot/error.hpp"
#include "lsaboot/numkit.hpp"
#include "lsaboot/synthetic.hpp"
#include "test_support.hpp"

namespace lsaboot {
namespace {

using testing::gaussian_matrix;

// Independent oracle: assemble the vectorized operator column by column from
// basis matrices and solve with Householder QR.
Matrix lyapunov_oracle(const Matrix& a, const Matrix& p) {
  const Eigen::Index d = a.rows();
  Matrix op(d * d, d * d);
  for (Eigen::Index j = 0; j < d; ++j) {
    for (Eigen::Index i = 0; i < d; ++i) {
      Matrix e = Matrix::Zero(d, d);
      e(i, j) = 1.0;
      const Matrix image = a.transpose() * e + e * a;
      op.col(j * d + i) = Eigen::Map<const Vector>(image.data(), d * d);
    }
  }
  const Vector rhs = Eigen::Map<const Vector>(p.data(), d * d);
  const Vector q = op.householderQr().solve(rhs);
  return Eigen::Map<const Matrix>(q.data(), d, d);
}

TEST(SolveLyapunov, Scalar) {
  const Matrix q = solve_lyapunov(Matrix::Constant(1, 1, 1.0), Matrix::Constant(1, 1, 2.0));
  EXPECT_NEAR(q(0, 0), 1.0, 1e-14);
}

TEST(SolveLyapunov, DiagonalDecouples) {
  Matrix a = Vector{{1.0, 2.0}}.asDiagonal();
  Matrix p = Vector{{2.0, 4.0}}.asDiagonal();
  EXPECT_LT((solve_lyapunov(a, p) - Matrix::Identity(2, 2)).norm(), 1e-14);
}

TEST(SolveLyapunov, RandomMatchesOracleAndResidual) {
  RngStream rng(10, 0);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::Index d = 1 + trial % 6;
    const Matrix a = random_hurwitz_matrix(d, rng);
    const Matrix p = 2.0 * Matrix::Identity(d, d);
    const Matrix q = solve_lyapunov(a, p);
    EXPECT_LE((a.transpose() * q + q * a - p).norm() / p.norm(), 1e-10);
    EXPECT_LE((q - lyapunov_oracle(a, p)).norm() / q.norm(), 1e-10);
    EXPECT_TRUE(is_symmetric(q, 1e-12));
    EXPECT_GT(lambda_min(q), 0.0);
  }
}

TEST(SolveLyapunov, RejectsNonHurwitz) {
  Matrix a = Vector{{1.0, -0.5}}.asDiagonal();
  try {
    solve_lyapunov(a, Matrix::Identity(2, 2));
    FAIL() << "expected StabilityError";
  } catch (const StabilityError& e) {
    EXPECT_NE(std::string(e.what()).find("-0.5"), std::string::npos) << e.what();
  }
}

TEST(SolveLyapunov, RejectsAsymmetricP) {
  Matrix p{{1.0, 0.5}, {0.0, 1.0}};
  EXPECT_THROW(solve_lyapunov(Matrix::Identity(2, 2), p), ValidationError);
}

TEST(SqrtmPsd, TrivialCases) {
  EXPECT_LT((sqrtm_psd(Matrix::Identity(3, 3)) - Matrix::Identity(3, 3)).norm(), 1e-14);
  const Matrix s = sqrtm_psd(Vector{{4.0, 9.0}}.asDiagonal());
  EXPECT_LT((s - Matrix(Vector{{2.0, 3.0}}.asDiagonal())).norm(), 1e-14);
}

TEST(SqrtmPsd, RandomMultipliesBack) {
  RngStream rng(11, 0);
  for (int trial = 0; trial < 10; ++trial) {
    const Matrix m = gaussian_matrix(6, 6, rng);
    const Matrix sigma = m * m.transpose();
    const Matrix s = sqrtm_psd(sigma);
    EXPECT_LE((s * s - sigma).norm(), 1e-8 * (1.0 + sigma.norm()));
    EXPECT_LE((s - s.transpose()).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_GE(lambda_min(s), -1e-10);
  }
}

TEST(SqrtmPsd, ClipsTinyNegativesAndRejectsLargeOnes) {
  const Matrix tiny = Vector{{1.0, -5e-11}}.asDiagonal();
  EXPECT_NEAR(sqrtm_psd(tiny)(1, 1), 0.0, 1e-15);
  try {
    sqrtm_psd(Vector{{1.0, -1e-6}}.asDiagonal());
    FAIL() << "expected NotPsdError";
  } catch (const NotPsdError& e) {
    EXPECT_NEAR(e.eigenvalue(), -1e-6, 1e-12);
  }
}

// Brute-force sup |F_a - F_b| evaluated at every point of the merged sample.
double ks_oracle(const std::vector<double>& a, const std::vector<double>& b) {
  double best = 0.0;
  auto cdf = [](const std::vector<double>& s, double x) {
    return static_cast<double>(std::count_if(s.begin(), s.end(), [x](double v) { return v <= x; })) /
           static_cast<double>(s.size());
  };
  for (const auto* s : {&a, &b})
    for (double x : *s) best = std::max(best, std::abs(cdf(a, x) - cdf(b, x)));
  return best;
}

TEST(KsTwoSample, Examples) {
  EXPECT_EQ(ks_two_sample(EmpiricalSample({1, 2, 3}), EmpiricalSample({1, 2, 3})), 0.0);
  EXPECT_EQ(ks_two_sample(EmpiricalSample({0, 0}), EmpiricalSample({1, 1})), 1.0);
  EXPECT_DOUBLE_EQ(ks_two_sample(EmpiricalSample({1, 2, 3, 4}), EmpiricalSample({1.5, 2.5})), 0.5);
}

TEST(KsTwoSample, EmptySampleRejected) {
  EXPECT_THROW(EmpiricalSample(std::vector<double>{}), ValidationError);
}

TEST(KsTwoSample, MatchesBruteForceWithTies) {
  RngStream rng(12, 0);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> a(1 + rng.below(40)), b(1 + rng.below(40));
    for (auto& v : a) v = static_cast<double>(rng.below(10));
    for (auto& v : b) v = static_cast<double>(rng.below(12)) - 1.0;
    const double ks = ks_two_sample(EmpiricalSample(a), EmpiricalSample(b));
    EXPECT_NEAR(ks, ks_oracle(a, b), 1e-15);
    EXPECT_EQ(ks, ks_two_sample(EmpiricalSample(b), EmpiricalSample(a)));
  }
}

TEST(KsTwoSample, InvariantUnderMonotoneTransform) {
  RngStream rng(13, 0);
  std::vector<double> a(300), b(200);
  for (auto& v : a) v = rng.normal();
  for (auto& v : b) v = 0.3 + rng.normal();
  std::vector<double> ta(a.size()), tb(b.size());
  std::transform(a.begin(), a.end(), ta.begin(), [](double x) { return std::exp(x); });
  std::transform(b.begin(), b.end(), tb.begin(), [](double x) { return std::exp(x); });
  EXPECT_EQ(ks_two_sample(EmpiricalSample(a), EmpiricalSample(b)),
            ks_two_sample(EmpiricalSample(ta), EmpiricalSample(tb)));
}

TEST(KsTwoSample, SortedFlagGivesSameAnswer) {
  RngStream rng(14, 0);
  std::vector<double> a(100), b(150);
  for (auto& v : a) v = rng.normal();
  for (auto& v : b) v = rng.normal();
  const EmpiricalSample sa(a), sb(b);
  EXPECT_EQ(ks_two_sample(sa, sb), ks_two_sample(sa.sorted(), sb.sorted()));
}

TEST(EmpiricalQuantile, Examples) {
  EXPECT_EQ(empirical_quantile(EmpiricalSample({1, 2, 3, 4}), 0.75), 3.0);
  for (double level : {0.01, 0.5, 0.99}) EXPECT_EQ(empirical_quantile(EmpiricalSample({5}), level), 5.0);
  EXPECT_THROW(empirical_quantile(EmpiricalSample({1, 2}), 0.0), ValidationError);
  EXPECT_THROW(empirical_quantile(EmpiricalSample({1, 2}), 1.0), ValidationError);
}

TEST(EmpiricalQuantile, UniformMonteCarlo) {
  RngStream rng(15, 0);
  std::vector<double> u(10000);
  for (auto& v : u) v = rng.uniform();
  EXPECT_NEAR(empirical_quantile(EmpiricalSample(u), 0.9), 0.9, 0.02);
}

TEST(EmpiricalQuantile, MonotoneAndInSample) {
  RngStream rng(16, 0);
  std::vector<double> v(37);
  for (auto& x : v) x = rng.normal();
  const EmpiricalSample s(v);
  double prev = -INFINITY;
  for (int i = 1; i < 100; ++i) {
    const double q = empirical_quantile(s, i / 100.0);
    EXPECT_GE(q, prev);
    EXPECT_NE(std::find(v.begin(), v.end(), q), v.end());
    prev = q;
  }
}

TEST(MvnSample, ZeroRootGivesZeros) {
  RngStream rng(17, 0);
  for (const auto& v : mvn_sample(Matrix::Zero(3, 3), rng, 10)) EXPECT_EQ(v.norm(), 0.0);
}

TEST(MvnSample, StandardNormalMoments) {
  RngStream rng(18, 0);
  const auto draws = mvn_sample(Matrix::Identity(1, 1), rng, 1000000);
  double sum = 0, sum2 = 0;
  for (const auto& v : draws) {
    sum += v(0);
    sum2 += v(0) * v(0);
  }
  const double mean = sum / 1e6;
  EXPECT_NEAR(mean, 0.0, 0.005);
  EXPECT_NEAR(sum2 / 1e6 - mean * mean, 1.0, 0.01);
}

TEST(MvnSample, DegenerateCoordinateStaysZero) {
  RngStream rng(19, 0);
  const Matrix s = Vector{{2.0, 0.0}}.asDiagonal();
  for (const auto& v : mvn_sample(s, rng, 100000)) ASSERT_EQ(v(1), 0.0);
}

TEST(MvnSample, DeterministicAndRejectsZeroCount) {
  RngStream a(20, 3), b(20, 3);
  const auto x = mvn_sample(Matrix::Identity(2, 2), a, 5);
  const auto y = mvn_sample(Matrix::Identity(2, 2), b, 5);
  for (std::size_t i = 0; i < x.size(); ++i) EXPECT_EQ(x[i], y[i]);
  EXPECT_THROW(mvn_sample(Matrix::Identity(2, 2), a, 0), ValidationError);
}

TEST(KahanVectorSum, BeatsNaiveSummation) {
  KahanVectorSum k(1);
  Vector one(1);
  one(0) = 1.0;
  Vector tiny(1);
  tiny(0) = 1e-16;
  k.add(one);
  for (int i = 0; i < 10000; ++i) k.add(tiny);
  EXPECT_NEAR(k.sum()(0), 1.0 + 1e-12, 1e-15);
}

TEST(Hurwitz, NamesOffendingEigenvalue) {
  Matrix a{{0.0, 1.0}, {-1.0, 0.0}};  // eigenvalues +-i, real part 0
  EXPECT_THROW(require_hurwitz(a), StabilityError);
  EXPECT_NO_THROW(require_hurwitz(Matrix::Identity(2, 2)));
}

}  // namespace
}  // namespace lsaboot
