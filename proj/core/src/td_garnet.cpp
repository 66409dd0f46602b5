#include "lsaboot/td_garnet.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>
#include <sstream>

#include "lsaboot/error.hpp"

namespace lsaboot {

namespace {

constexpr double kRowTolerance = 1e-12;
constexpr int kGarnetAttempts = 100;

std::size_t draw_from_cdf(const std::vector<double>& cdf, double u) {
  const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
  return std::min<std::size_t>(static_cast<std::size_t>(it - cdf.begin()), cdf.size() - 1);
}

std::vector<double> make_cdf(const std::vector<double>& probs) {
  std::vector<double> cdf(probs.size());
  std::partial_sum(probs.begin(), probs.end(), cdf.begin());
  return cdf;
}

// Breadth-first levels from state 0; returns false if some state is unreachable.
bool bfs_levels(const std::vector<std::vector<int>>& adj, std::vector<int>& level) {
  const auto n = adj.size();
  level.assign(n, -1);
  std::queue<int> queue;
  level[0] = 0;
  queue.push(0);
  while (!queue.empty()) {
    const int u = queue.front();
    queue.pop();
    for (int v : adj[static_cast<std::size_t>(u)]) {
      if (level[static_cast<std::size_t>(v)] < 0) {
        level[static_cast<std::size_t>(v)] = level[static_cast<std::size_t>(u)] + 1;
        queue.push(v);
      }
    }
  }
  return std::all_of(level.begin(), level.end(), [](int l) { return l >= 0; });
}

bool graph_is_primitive(const std::vector<std::vector<int>>& adj) {
  const auto n = adj.size();
  std::vector<int> level;
  if (!bfs_levels(adj, level)) return false;
  std::vector<std::vector<int>> reverse(n);
  for (std::size_t u = 0; u < n; ++u) {
    for (int v : adj[u]) reverse[static_cast<std::size_t>(v)].push_back(static_cast<int>(u));
  }
  std::vector<int> back_level;
  if (!bfs_levels(reverse, back_level)) return false;
  // Period of a strongly connected graph = gcd of level(u) + 1 - level(v) over all edges.
  int period = 0;
  for (std::size_t u = 0; u < n; ++u) {
    for (int v : adj[u]) {
      period = std::gcd(period, std::abs(level[u] + 1 - level[static_cast<std::size_t>(v)]));
    }
  }
  return period == 1;
}

std::vector<std::vector<int>> support_graph(const Matrix& transition) {
  const auto n = static_cast<std::size_t>(transition.rows());
  std::vector<std::vector<int>> adj(n);
  for (std::size_t s = 0; s < n; ++s) {
    for (std::size_t t = 0; t < n; ++t) {
      if (transition(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(t)) > 0.0) {
        adj[s].push_back(static_cast<int>(t));
      }
    }
  }
  return adj;
}

}  // namespace

GarnetMdp::GarnetMdp(int n_states, int n_actions, int branching, double discount,
                     std::vector<double> transitions, Matrix rewards, std::uint64_t seed)
    : n_states_(n_states),
      n_actions_(n_actions),
      branching_(branching),
      discount_(discount),
      transitions_(std::move(transitions)),
      rewards_(std::move(rewards)),
      seed_(seed) {
  if (n_states < 1 || n_actions < 1) throw ValidationError("GarnetMdp: need at least one state and action");
  if (branching < 1 || branching > n_states) {
    throw ValidationError("GarnetMdp: branching must lie in [1, n_states]");
  }
  if (!(discount >= 0.0 && discount < 1.0)) throw ValidationError("GarnetMdp: discount must lie in [0, 1)");
  const auto ns = static_cast<std::size_t>(n_states);
  const auto na = static_cast<std::size_t>(n_actions);
  if (transitions_.size() != ns * na * ns) throw ValidationError("GarnetMdp: transition table has wrong size");
  if (rewards_.rows() != n_states || rewards_.cols() != n_actions) {
    throw ValidationError("GarnetMdp: reward table has wrong shape");
  }
  if (!rewards_.allFinite() || rewards_.minCoeff() < 0.0 || rewards_.maxCoeff() > 1.0) {
    throw ValidationError("GarnetMdp: rewards must lie in [0, 1]");
  }
  successors_.resize(ns * na);
  for (int s = 0; s < n_states; ++s) {
    for (int a = 0; a < n_actions; ++a) {
      double sum = 0.0;
      auto& succ = successors_[index(s, a)];
      for (int t = 0; t < n_states; ++t) {
        const double p = transition(s, a, t);
        if (!(p >= 0.0 && p <= 1.0)) {
          std::ostringstream os;
          os << "GarnetMdp: P(" << t << "|" << s << "," << a << ") = " << p << " outside [0, 1]";
          throw ValidationError(os.str());
        }
        if (p > 0.0) succ.push_back(t);
        sum += p;
      }
      if (std::abs(sum - 1.0) > kRowTolerance) {
        std::ostringstream os;
        os << "GarnetMdp: row (" << s << "," << a << ") sums to " << sum;
        throw ValidationError(os.str());
      }
      if (static_cast<int>(succ.size()) != branching) {
        std::ostringstream os;
        os << "GarnetMdp: row (" << s << "," << a << ") has " << succ.size() << " successors, expected "
           << branching;
        throw ValidationError(os.str());
      }
    }
  }
}

bool support_is_primitive(const GarnetMdp& mdp) {
  const int n = mdp.n_states();
  std::vector<std::vector<int>> adj(static_cast<std::size_t>(n));
  for (int s = 0; s < n; ++s) {
    std::vector<int>& out = adj[static_cast<std::size_t>(s)];
    for (int a = 0; a < mdp.n_actions(); ++a) {
      for (int t : mdp.successors(s, a)) out.push_back(t);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
  }
  return graph_is_primitive(adj);
}

GarnetMdp generate_garnet(int n_states, int n_actions, int branching, double discount, RngStream& rng,
                          RewardMode rewards, double constant_reward) {
  if (n_states < 1 || n_actions < 1) throw ValidationError("generate_garnet: need at least one state and action");
  if (branching < 1 || branching > n_states) {
    throw ValidationError("generate_garnet: branching must lie in [1, n_states]");
  }
  const auto ns = static_cast<std::size_t>(n_states);
  const auto na = static_cast<std::size_t>(n_actions);
  const auto nb = static_cast<std::size_t>(branching);

  for (int attempt = 0; attempt < kGarnetAttempts; ++attempt) {
    std::vector<double> table(ns * na * ns, 0.0);
    std::vector<int> states(ns);
    std::vector<double> cuts;
    for (std::size_t s = 0; s < ns; ++s) {
      for (std::size_t a = 0; a < na; ++a) {
        // Partial Fisher-Yates: the first `branching` entries are a uniform subset.
        std::iota(states.begin(), states.end(), 0);
        for (std::size_t i = 0; i < nb; ++i) {
          const auto j = i + static_cast<std::size_t>(rng.below(ns - i));
          std::swap(states[i], states[j]);
        }
        // Uniform point on the simplex from sorted-uniform spacings.
        cuts.assign(1, 0.0);
        for (std::size_t i = 1; i < nb; ++i) cuts.push_back(rng.uniform_open());
        cuts.push_back(1.0);
        std::sort(cuts.begin(), cuts.end());
        double* row = &table[(s * na + a) * ns];
        for (std::size_t i = 0; i < nb; ++i) row[states[i]] = cuts[i + 1] - cuts[i];
        // Spacings can underflow only when two uniforms coincide; treat as a bad draw.
      }
    }
    Matrix reward(n_states, n_actions);
    for (std::size_t s = 0; s < ns; ++s) {
      for (std::size_t a = 0; a < na; ++a) {
        reward(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(a)) =
            rewards == RewardMode::uniform ? rng.uniform() : constant_reward;
      }
    }
    bool degenerate = false;
    for (std::size_t row = 0; row < ns * na && !degenerate; ++row) {
      const auto count = std::count_if(table.begin() + static_cast<std::ptrdiff_t>(row * ns),
                                       table.begin() + static_cast<std::ptrdiff_t>((row + 1) * ns),
                                       [](double p) { return p > 0.0; });
      degenerate = static_cast<std::size_t>(count) != nb;
    }
    if (degenerate) continue;
    GarnetMdp mdp(n_states, n_actions, branching, discount, std::move(table), std::move(reward), rng.seed());
    if (support_is_primitive(mdp)) return mdp;
  }
  throw ModelError("generate_garnet: no irreducible aperiodic instance within 100 attempts");
}

Policy::Policy(Matrix probs) : probs_(std::move(probs)) {
  if (probs_.rows() < 1 || probs_.cols() < 1) throw ValidationError("Policy: empty table");
  if (!probs_.allFinite() || probs_.minCoeff() < 0.0) throw ValidationError("Policy: negative or non-finite entry");
  for (Eigen::Index s = 0; s < probs_.rows(); ++s) {
    if (std::abs(probs_.row(s).sum() - 1.0) > kRowTolerance) {
      std::ostringstream os;
      os << "Policy: row " << s << " does not sum to 1";
      throw ValidationError(os.str());
    }
  }
}

Policy random_policy(const GarnetMdp& mdp, RngStream& rng) {
  Matrix probs(mdp.n_states(), mdp.n_actions());
  for (int s = 0; s < mdp.n_states(); ++s) {
    for (int a = 0; a < mdp.n_actions(); ++a) probs(s, a) = rng.uniform_open();
    probs.row(s) /= probs.row(s).sum();
  }
  return Policy(std::move(probs));
}

FeatureMap::FeatureMap(Matrix phi_columns) : phi_(std::move(phi_columns)) {
  if (phi_.rows() < 1 || phi_.cols() < 1) throw ValidationError("FeatureMap: empty feature matrix");
  if (!phi_.allFinite()) throw ValidationError("FeatureMap: non-finite feature");
  for (Eigen::Index s = 0; s < phi_.cols(); ++s) {
    if (phi_.col(s).norm() > 1.0 + 1e-12) {
      std::ostringstream os;
      os << "FeatureMap: |phi(" << s << ")| = " << phi_.col(s).norm() << " exceeds 1";
      throw ValidationError(os.str());
    }
  }
}

FeatureMap FeatureMap::identity(int n_states) { return FeatureMap(Matrix::Identity(n_states, n_states)); }

FeatureMap FeatureMap::random_projection(int n_states, int dim, RngStream& rng) {
  if (dim < 1 || n_states < 1) throw ValidationError("FeatureMap::random_projection: invalid shape");
  Matrix phi(dim, n_states);
  for (int s = 0; s < n_states; ++s) {
    for (int i = 0; i < dim; ++i) phi(i, s) = rng.normal();
    phi.col(s) /= phi.col(s).norm();
  }
  return FeatureMap(std::move(phi));
}

TdGroundTruth ground_truth(const GarnetMdp& mdp, const Policy& policy, const FeatureMap& features) {
  const int ns = mdp.n_states();
  const int na = mdp.n_actions();
  if (policy.probs().rows() != ns || policy.probs().cols() != na) {
    throw ValidationError("ground_truth: policy shape does not match the MDP");
  }
  if (features.n_states() != ns) throw ValidationError("ground_truth: feature map does not match the MDP");
  const Eigen::Index d = features.dim();
  const double g = mdp.discount();

  TdGroundTruth gt;
  gt.p_pi = Matrix::Zero(ns, ns);
  gt.mean_reward = Vector::Zero(ns);
  for (int s = 0; s < ns; ++s) {
    for (int a = 0; a < na; ++a) {
      gt.mean_reward(s) += policy(s, a) * mdp.reward(s, a);
      for (int t : mdp.successors(s, a)) gt.p_pi(s, t) += policy(s, a) * mdp.transition(s, a, t);
    }
  }
  if (!graph_is_primitive(support_graph(gt.p_pi))) {
    throw ModelError("ground_truth: P_pi is reducible or periodic; no unique positive stationary law");
  }

  // mu^T (P_pi - I) = 0 with sum(mu) = 1: replace one redundant equation by the normalization.
  Matrix system = gt.p_pi.transpose() - Matrix::Identity(ns, ns);
  Eigen::FullPivLU<Matrix> rank_check(system);
  if (rank_check.rank() != ns - 1) throw ModelError("ground_truth: stationary law is not unique");
  system.row(ns - 1).setOnes();
  Vector rhs = Vector::Zero(ns);
  rhs(ns - 1) = 1.0;
  gt.mu = system.fullPivLu().solve(rhs);
  if (!(gt.mu.minCoeff() > 0.0)) throw ModelError("ground_truth: stationary law has a non-positive entry");

  gt.sigma_phi = Matrix::Zero(d, d);
  gt.a_bar = Matrix::Zero(d, d);
  gt.b_bar = Vector::Zero(d);
  for (int s = 0; s < ns; ++s) {
    const Vector phi_s = features(s);
    gt.sigma_phi.noalias() += gt.mu(s) * phi_s * phi_s.transpose();
    for (int a = 0; a < na; ++a) {
      const double w_sa = gt.mu(s) * policy(s, a);
      gt.b_bar.noalias() += w_sa * mdp.reward(s, a) * phi_s;
      for (int t : mdp.successors(s, a)) {
        const double w = w_sa * mdp.transition(s, a, t);
        gt.a_bar.noalias() += w * phi_s * (phi_s - g * features(t)).transpose();
      }
    }
  }

  Eigen::FullPivLU<Matrix> lu(gt.a_bar);
  if (!lu.isInvertible()) throw ModelError("ground_truth: A_bar is singular");
  gt.theta_star = lu.solve(gt.b_bar);

  gt.sigma_eps = Matrix::Zero(d, d);
  for (int s = 0; s < ns; ++s) {
    const Vector phi_s = features(s);
    for (int a = 0; a < na; ++a) {
      const double w_sa = gt.mu(s) * policy(s, a);
      for (int t : mdp.successors(s, a)) {
        const double w = w_sa * mdp.transition(s, a, t);
        const Matrix a_k = phi_s * (phi_s - g * features(t)).transpose();
        const Vector eps = (a_k - gt.a_bar) * gt.theta_star - (mdp.reward(s, a) * phi_s - gt.b_bar);
        gt.sigma_eps.noalias() += w * eps * eps.transpose();
      }
    }
  }
  gt.sigma_eps = 0.5 * (gt.sigma_eps + gt.sigma_eps.transpose()).eval();
  const Matrix a_inv = lu.inverse();
  gt.sigma_inf = a_inv * gt.sigma_eps * a_inv.transpose();
  gt.sigma_inf = 0.5 * (gt.sigma_inf + gt.sigma_inf.transpose()).eval();
  return gt;
}

TdProblem::TdProblem(GarnetMdp mdp, Policy policy, FeatureMap features)
    : mdp_(std::move(mdp)),
      policy_(std::move(policy)),
      features_(std::move(features)),
      truth_(ground_truth(mdp_, policy_, features_)),
      exact_(truth_.a_bar, truth_.b_bar, truth_.sigma_eps) {
  const int ns = mdp_.n_states();
  const int na = mdp_.n_actions();
  state_cdf_ = make_cdf(std::vector<double>(truth_.mu.data(), truth_.mu.data() + ns));
  action_cdf_.resize(static_cast<std::size_t>(ns));
  next_cdf_.resize(static_cast<std::size_t>(ns * na));
  for (int s = 0; s < ns; ++s) {
    std::vector<double> probs(static_cast<std::size_t>(na));
    for (int a = 0; a < na; ++a) probs[static_cast<std::size_t>(a)] = policy_(s, a);
    action_cdf_[static_cast<std::size_t>(s)] = make_cdf(probs);
    for (int a = 0; a < na; ++a) {
      std::vector<double> next;
      for (int t : mdp_.successors(s, a)) next.push_back(mdp_.transition(s, a, t));
      next_cdf_[static_cast<std::size_t>(s * na + a)] = make_cdf(next);
    }
  }
}

void TdProblem::observation_for(int s, int a, int next, Observation& out) const {
  const auto phi_s = features_(s);
  out.a.noalias() = phi_s * phi_s.transpose();
  out.a.noalias() -= mdp_.discount() * phi_s * features_(next).transpose();
  out.b = mdp_.reward(s, a) * phi_s;
}

void TdProblem::sample(RngStream& rng, Observation& out) const {
  const int na = mdp_.n_actions();
  const auto s = static_cast<int>(draw_from_cdf(state_cdf_, rng.uniform()));
  const auto a = static_cast<int>(draw_from_cdf(action_cdf_[static_cast<std::size_t>(s)], rng.uniform()));
  const auto& succ = mdp_.successors(s, a);
  const auto i = draw_from_cdf(next_cdf_[static_cast<std::size_t>(s * na + a)], rng.uniform());
  observation_for(s, a, succ[i], out);
}

std::optional<std::vector<WeightedObservation>> TdProblem::enumerate() const {
  std::vector<WeightedObservation> out;
  const Eigen::Index d = dim();
  for (int s = 0; s < mdp_.n_states(); ++s) {
    for (int a = 0; a < mdp_.n_actions(); ++a) {
      for (int t : mdp_.successors(s, a)) {
        WeightedObservation item{truth_.mu(s) * policy_(s, a) * mdp_.transition(s, a, t), Observation::zeros(d)};
        observation_for(s, a, t, item.observation);
        out.push_back(std::move(item));
      }
    }
  }
  return out;
}

TdConstants td_constants(const TdGroundTruth& gt, double discount) {
  TdConstants c;
  c.b_a = 2.0 * (1.0 + discount);
  c.eps_inf = 2.0 * (1.0 + discount) * (gt.theta_star.norm() + 1.0);
  c.a = (1.0 - discount) * lambda_min(gt.sigma_phi);
  c.alpha_inf = (1.0 - discount) / ((1.0 + discount) * (1.0 + discount));
  return c;
}

StabilityCertificate td_certificate(const TdGroundTruth& gt, double discount) {
  const TdConstants c = td_constants(gt, discount);
  const Eigen::Index d = gt.a_bar.rows();
  StabilityCertificate cert;
  cert.p = gt.a_bar + gt.a_bar.transpose();
  cert.q = Matrix::Identity(d, d);
  cert.kappa_q = 1.0;
  cert.a = c.a;
  cert.alpha_inf = c.alpha_inf;
  cert.a_bar_q_norm = operator_norm(gt.a_bar);
  const ContractionCheck check = check_contraction(gt.a_bar, cert.q, cert.a, cert.alpha_inf);
  cert.worst_contraction_slack = check.worst_slack;
  if (!check.passed) throw StabilityError("td_certificate: contraction check with Q = I failed");
  return cert;
}

}  // namespace lsaboot
