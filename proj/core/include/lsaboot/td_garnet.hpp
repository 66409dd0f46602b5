#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "lsaboot/lsa.hpp"
#include "lsaboot/numkit.hpp"
#include "lsaboot/rng.hpp"
#include "lsaboot/stability.hpp"

namespace lsaboot {

enum class RewardMode { uniform, constant };

/// Finite MDP with `branching` successors per (state, action) and
/// deterministic rewards r(s, a) in [0, 1].
class GarnetMdp {
 public:
  /// `transitions` is dense, indexed [(s * n_actions + a) * n_states + s'].
  GarnetMdp(int n_states, int n_actions, int branching, double discount,
            std::vector<double> transitions, Matrix rewards, std::uint64_t seed = 0);

  int n_states() const noexcept { return n_states_; }
  int n_actions() const noexcept { return n_actions_; }
  int branching() const noexcept { return branching_; }
  double discount() const noexcept { return discount_; }
  std::uint64_t seed() const noexcept { return seed_; }

  double transition(int s, int a, int next) const {
    return transitions_[index(s, a) * static_cast<std::size_t>(n_states_) + static_cast<std::size_t>(next)];
  }
  double reward(int s, int a) const { return rewards_(s, a); }
  const Matrix& rewards() const noexcept { return rewards_; }
  const std::vector<double>& transitions() const noexcept { return transitions_; }
  /// Successor states of (s, a) with positive probability, ascending.
  const std::vector<int>& successors(int s, int a) const { return successors_[index(s, a)]; }

 private:
  std::size_t index(int s, int a) const {
    return static_cast<std::size_t>(s) * static_cast<std::size_t>(n_actions_) + static_cast<std::size_t>(a);
  }

  int n_states_;
  int n_actions_;
  int branching_;
  double discount_;
  std::vector<double> transitions_;
  Matrix rewards_;
  std::uint64_t seed_;
  std::vector<std::vector<int>> successors_;
};

/// Draws a Garnet instance; instances whose support graph is reducible or
/// periodic are redrawn from the same stream, up to 100 attempts.
GarnetMdp generate_garnet(int n_states, int n_actions, int branching, double discount, RngStream& rng,
                          RewardMode rewards = RewardMode::uniform, double constant_reward = 0.5);

/// True when the union-of-actions support graph is strongly connected and aperiodic.
bool support_is_primitive(const GarnetMdp& mdp);

/// pi(a|s), one row per state.
class Policy {
 public:
  explicit Policy(Matrix probs);
  const Matrix& probs() const noexcept { return probs_; }
  double operator()(int s, int a) const { return probs_(s, a); }

 private:
  Matrix probs_;
};

/// pi(a|s) = U_a / sum_i U_i with i.i.d. U ~ Uniform[0, 1].
Policy random_policy(const GarnetMdp& mdp, RngStream& rng);

/// Feature matrix with phi(s) stored as column s (d x n_states), |phi(s)| <= 1.
class FeatureMap {
 public:
  explicit FeatureMap(Matrix phi_columns);
  static FeatureMap identity(int n_states);
  /// Gaussian projections normalized to unit norm per state.
  static FeatureMap random_projection(int n_states, int dim, RngStream& rng);

  Eigen::Index dim() const noexcept { return phi_.rows(); }
  Eigen::Index n_states() const noexcept { return phi_.cols(); }
  auto operator()(int s) const { return phi_.col(s); }
  const Matrix& matrix() const noexcept { return phi_; }

 private:
  Matrix phi_;
};

struct TdGroundTruth {
  Vector mu;
  Matrix p_pi;
  Vector mean_reward;  // r_pi(s) = sum_a pi(a|s) r(s, a)
  Matrix sigma_phi;
  Matrix a_bar;
  Vector b_bar;
  Vector theta_star;
  Matrix sigma_eps;
  Matrix sigma_inf;
};

/// Exact enumeration over (s, a, s') weighted by mu(s) pi(a|s) P(s'|s,a).
TdGroundTruth ground_truth(const GarnetMdp& mdp, const Policy& policy, const FeatureMap& features);

/// TD(0) with linear features under the i.i.d. generative model:
/// s ~ mu, a ~ pi(.|s), s' ~ P(.|s,a), A = phi(s)(phi(s) - gamma phi(s'))^T, b = phi(s) r(s,a).
class TdProblem final : public LsaProblem {
 public:
  TdProblem(GarnetMdp mdp, Policy policy, FeatureMap features);

  Eigen::Index dim() const override { return features_.dim(); }
  void sample(RngStream& rng, Observation& out) const override;
  const ExactModel* exact() const noexcept override { return &exact_; }
  std::optional<std::vector<WeightedObservation>> enumerate() const override;

  const GarnetMdp& mdp() const noexcept { return mdp_; }
  const Policy& policy() const noexcept { return policy_; }
  const FeatureMap& features() const noexcept { return features_; }
  const TdGroundTruth& truth() const noexcept { return truth_; }

  /// Writes the observation for a fixed transition (s, a, s').
  void observation_for(int s, int a, int next, Observation& out) const;

 private:
  GarnetMdp mdp_;
  Policy policy_;
  FeatureMap features_;
  TdGroundTruth truth_;
  ExactModel exact_;
  std::vector<double> state_cdf_;
  std::vector<std::vector<double>> action_cdf_;
  std::vector<std::vector<double>> next_cdf_;  // per (s, a), over successors(s, a)
};

struct TdConstants {
  double b_a = 0.0;
  double eps_inf = 0.0;
  double a = 0.0;
  double alpha_inf = 0.0;
};

/// b_A = 2(1+g), |eps|_inf = 2(1+g)(|theta*|+1), a = (1-g) lambda_min(Sigma_phi),
/// alpha_inf = (1-g)/(1+g)^2 for discount g.
TdConstants td_constants(const TdGroundTruth& gt, double discount);

/// The Q = I certificate: P = A_bar + A_bar^T with the TD constants above.
StabilityCertificate td_certificate(const TdGroundTruth& gt, double discount);

}  // namespace lsaboot
