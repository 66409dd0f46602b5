#include "lsaboot/numkit.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <sstream>
#include <string>

#include "lsaboot/error.hpp"

namespace lsaboot {

void require_square(const Matrix& m, std::string_view what) {
  if (m.rows() == 0 || m.rows() != m.cols()) {
    std::ostringstream os;
    os << what << ": expected a non-empty square matrix, got " << m.rows() << "x" << m.cols();
    throw ValidationError(os.str());
  }
}

void require_finite(const Matrix& m, std::string_view what) {
  if (!m.allFinite()) throw ValidationError(std::string(what) + ": non-finite entry");
}

bool is_symmetric(const Matrix& m, double tol) {
  if (m.rows() != m.cols()) return false;
  return (m - m.transpose()).cwiseAbs().maxCoeff() <= tol * (1.0 + m.cwiseAbs().maxCoeff());
}

Vector symmetric_eigenvalues(const Matrix& m) {
  const Matrix sym = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> es(sym, Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

double lambda_min(const Matrix& symmetric) { return symmetric_eigenvalues(symmetric).minCoeff(); }

double lambda_max(const Matrix& symmetric) { return symmetric_eigenvalues(symmetric).maxCoeff(); }

double operator_norm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues()(0);
}

void require_hurwitz(const Matrix& a_bar) {
  require_square(a_bar, "require_hurwitz");
  Eigen::EigenSolver<Matrix> es(a_bar, false);
  const auto& ev = es.eigenvalues();
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (!(ev(i).real() > 0.0)) {
      std::ostringstream os;
      os << "-A is not Hurwitz: eigenvalue " << ev(i).real() << (ev(i).imag() < 0 ? " - " : " + ")
         << std::abs(ev(i).imag()) << "i has non-positive real part";
      throw StabilityError(os.str());
    }
  }
}

Matrix solve_lyapunov(const Matrix& a_bar, const Matrix& p) {
  require_square(a_bar, "solve_lyapunov(a_bar)");
  require_square(p, "solve_lyapunov(p)");
  require_finite(a_bar, "solve_lyapunov(a_bar)");
  require_finite(p, "solve_lyapunov(p)");
  if (a_bar.rows() != p.rows()) throw ValidationError("solve_lyapunov: dimension mismatch");
  if (!is_symmetric(p, 1e-12)) throw ValidationError("solve_lyapunov: P is not symmetric");
  require_hurwitz(a_bar);

  const Eigen::Index d = a_bar.rows();
  // Column-major vec: vec(A^T Q) = (I (x) A^T) vec Q, vec(Q A) = (A^T (x) I) vec Q.
  Matrix k = Matrix::Zero(d * d, d * d);
  for (Eigen::Index j = 0; j < d; ++j) {
    k.block(j * d, j * d, d, d) += a_bar.transpose();
    for (Eigen::Index i = 0; i < d; ++i) {
      k.block(i * d, j * d, d, d).diagonal().array() += a_bar(j, i);
    }
  }
  const Vector rhs = Eigen::Map<const Vector>(p.data(), d * d);
  Eigen::PartialPivLU<Matrix> lu(k);
  const Vector q_vec = lu.solve(rhs);
  if (!q_vec.allFinite()) throw StabilityError("solve_lyapunov: singular Kronecker system");

  Matrix q = Eigen::Map<const Matrix>(q_vec.data(), d, d);
  q = 0.5 * (q + q.transpose()).eval();
  const double qmin = lambda_min(q);
  if (!(qmin > 0.0)) {
    std::ostringstream os;
    os << "solve_lyapunov: solution is not positive definite (lambda_min(Q) = " << qmin << ")";
    throw StabilityError(os.str());
  }
  return q;
}

Matrix sqrtm_psd(const Matrix& sigma) {
  require_square(sigma, "sqrtm_psd");
  require_finite(sigma, "sqrtm_psd");
  if (!is_symmetric(sigma, 1e-10)) throw ValidationError("sqrtm_psd: matrix is not symmetric");
  const Matrix sym = 0.5 * (sigma + sigma.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> es(sym);
  Vector ev = es.eigenvalues();
  if (ev.minCoeff() < -kPsdTolerance) {
    std::ostringstream os;
    os << "sqrtm_psd: matrix is not PSD (eigenvalue " << ev.minCoeff() << ")";
    throw NotPsdError(os.str(), ev.minCoeff());
  }
  ev = ev.cwiseMax(0.0).cwiseSqrt();
  Matrix s = es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
  return 0.5 * (s + s.transpose());
}

EmpiricalSample::EmpiricalSample(std::vector<double> values, bool sorted)
    : values_(std::move(values)), sorted_(sorted) {
  if (values_.empty()) throw ValidationError("EmpiricalSample: empty sample");
  for (double v : values_) {
    if (!std::isfinite(v)) throw ValidationError("EmpiricalSample: non-finite value");
  }
  if (sorted_ && !std::is_sorted(values_.begin(), values_.end())) {
    throw ValidationError("EmpiricalSample: values flagged sorted are not non-decreasing");
  }
}

EmpiricalSample EmpiricalSample::sorted() const {
  if (sorted_) return *this;
  std::vector<double> v = values_;
  std::sort(v.begin(), v.end());
  return EmpiricalSample(std::move(v), true);
}

double ks_two_sample(const EmpiricalSample& a, const EmpiricalSample& b) {
  const EmpiricalSample sa = a.sorted();
  const EmpiricalSample sb = b.sorted();
  const auto x = sa.values();
  const auto y = sb.values();
  const double na = static_cast<double>(x.size());
  const double nb = static_cast<double>(y.size());
  std::size_t i = 0, j = 0;
  double best = 0.0;
  while (i < x.size() || j < y.size()) {
    double t;
    if (j == y.size() || (i < x.size() && x[i] <= y[j])) {
      t = x[i];
    } else {
      t = y[j];
    }
    while (i < x.size() && x[i] == t) ++i;
    while (j < y.size() && y[j] == t) ++j;
    best = std::max(best, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return best;
}

double empirical_quantile(const EmpiricalSample& s, double level) {
  if (!(level > 0.0 && level < 1.0)) throw ValidationError("empirical_quantile: level must lie in (0,1)");
  const auto count = s.size();
  const double target = level * static_cast<double>(count);
  auto k = static_cast<std::size_t>(std::ceil(target));
  // level * B that lands a rounding error above an integer m still means m.
  if (k >= 1 && static_cast<double>(k) - target > 1.0 - 1e-9) --k;
  k = std::clamp<std::size_t>(k, 1, count);
  if (s.is_sorted()) return s.values()[k - 1];
  std::vector<double> v(s.values().begin(), s.values().end());
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(k - 1), v.end());
  return v[k - 1];
}

std::vector<Vector> mvn_sample(const Matrix& sigma_sqrt, RngStream& rng, std::size_t count) {
  require_square(sigma_sqrt, "mvn_sample");
  if (count == 0) throw ValidationError("mvn_sample: count must be positive");
  const Eigen::Index d = sigma_sqrt.rows();
  std::vector<Vector> out;
  out.reserve(count);
  Vector eta(d);
  for (std::size_t c = 0; c < count; ++c) {
    for (Eigen::Index i = 0; i < d; ++i) eta(i) = rng.normal();
    out.emplace_back(sigma_sqrt * eta);
  }
  return out;
}

KahanVectorSum::KahanVectorSum(Eigen::Index dim)
    : sum_(Vector::Zero(dim)), comp_(Vector::Zero(dim)), y_(dim), t_(dim) {}

void KahanVectorSum::add(const Vector& v) {
  y_ = v - comp_;
  t_ = sum_ + y_;
  comp_ = (t_ - sum_) - y_;
  sum_ = t_;
}

}  // namespace lsaboot
