#pragma once

#include <atomic>
#include <memory>
#include <string>
#include <vector>

#include "lsaboot/config.hpp"
#include "lsaboot/lsa.hpp"
#include "lsaboot/stability.hpp"
#include "lsaboot/td_garnet.hpp"

namespace lsaboot {

/// A problem built from a config, with its certificate.
struct ProblemInstance {
  std::unique_ptr<LsaProblem> problem;
  /// Set for TD problems.
  const TdProblem* td = nullptr;
  StabilityCertificate certificate;
  std::string description;
};

ProblemInstance build_problem(const ProblemConfig& config);

/// c0 = min(alpha_inf, a, 1 - gamma) when the config leaves it on auto.
double resolve_c0(const ExperimentConfig& config, const StabilityCertificate& cert, double gamma);

Vector initial_point(const ExperimentConfig& config, const LsaProblem& p);

struct NormalApproxRow {
  double gamma = 0.0;
  std::int64_t n = 0;
  double c0 = 0.0;
  double delta_n = 0.0;
  double delta_n_scaled = 0.0;  // delta_n * n^{1/4}
  double mean_scaled_error = 0.0;  // mean of sqrt(n) |theta_bar_n - theta*|
  double runtime_seconds = 0.0;
};

/// For every (gamma, n): `replicas` trajectories, sqrt(n)|theta_bar_n - theta*|
/// compared by two-sample KS with `reference_sample` draws of |Sigma_inf^{1/2} eta|.
/// Trajectory r of cell (g, i) uses RngStream(mix_seed(mix_seed(data_seed, g + 1), i + 1), r).
/// An interrupt returns the completed cells.
std::vector<NormalApproxRow> run_normal_approx(const ExperimentConfig& config, const LsaProblem& p,
                                               const StabilityCertificate& cert,
                                               const std::atomic<bool>* stop = nullptr);

struct CoverageRow {
  double level = 0.0;
  std::int64_t n = 0;
  std::int64_t b_count = 0;
  double coverage = 0.0;
  double binomial_lo = 0.0;
  double binomial_hi = 1.0;
};

struct CoverageRunRow {
  std::size_t run_id = 0;
  std::int64_t n = 0;
  std::int64_t b_count = 0;
  double level = 0.0;
  double radius = 0.0;
  bool covered = false;
};

struct CoverageTables {
  std::vector<CoverageRow> summary;
  std::vector<CoverageRunRow> runs;
  /// Per n: the raw run outcomes behind the summary.
  std::vector<CoverageResult> results;
  double gamma = 0.0;
  double c0 = 0.0;
};

/// Uses the first gamma of the config. Runs for grid entry i draw data from
/// mix_seed(data_seed, i + 1).
CoverageTables run_coverage(const ExperimentConfig& config, const LsaProblem& p,
                            const StabilityCertificate& cert, const std::atomic<bool>* stop = nullptr);

struct CertifyRow {
  double gamma = 0.0;
  double c0 = 0.0;
  std::int64_t n = 0;
  bool schedule_ok = false;
  bool sample_size_ok = false;
  double lhs = 0.0;
  double threshold = 0.0;
  std::int64_t minimal_n = -1;  // -1 when no finite n passes
};

struct CertifyReport {
  StabilityCertificate certificate;
  NoiseStats noise;
  std::vector<CertifyRow> rows;
  std::vector<std::string> violations;
};

CertifyReport run_certify(const ExperimentConfig& config, const LsaProblem& p, const StabilityCertificate& cert);

}  // namespace lsaboot
