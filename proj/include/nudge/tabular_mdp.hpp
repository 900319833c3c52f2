#pragma once

// Dense finite MDP with synchronous value iteration and absorbing-chain
// analysis. Serves as the brute-force reference for the closed-form user
// model and as the solver for the app agent's planning problem.

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "nudge/errors.hpp"
#include "nudge/user_model.hpp"

namespace nudge {

class TabularMDP {
 public:
  TabularMDP(int n_states, int n_actions, double discount)
      : n_states_(n_states),
        n_actions_(n_actions),
        discount_(discount),
        transition_(static_cast<std::size_t>(n_states) * n_actions * n_states, 0.0),
        reward_(static_cast<std::size_t>(n_states) * n_actions, 0.0),
        absorbing_(static_cast<std::size_t>(n_states), false) {
    if (n_states < 1 || n_actions < 1) throw std::invalid_argument("MDP needs at least one state and action");
    if (!(discount >= 0.0 && discount < 1.0)) throw std::invalid_argument("discount must lie in [0, 1)");
  }

  int n_states() const noexcept { return n_states_; }
  int n_actions() const noexcept { return n_actions_; }
  double discount() const noexcept { return discount_; }

  double& p(int s, int a, int next) { return transition_[index(s, a, next)]; }
  double p(int s, int a, int next) const { return transition_[index(s, a, next)]; }
  double& r(int s, int a) { return reward_[static_cast<std::size_t>(s) * n_actions_ + a]; }
  double r(int s, int a) const { return reward_[static_cast<std::size_t>(s) * n_actions_ + a]; }

  bool absorbing(int s) const { return absorbing_[static_cast<std::size_t>(s)]; }

  // Self-loop with zero reward under every action.
  void make_absorbing(int s) {
    absorbing_[static_cast<std::size_t>(s)] = true;
    for (int a = 0; a < n_actions_; ++a) {
      for (int t = 0; t < n_states_; ++t) p(s, a, t) = (t == s) ? 1.0 : 0.0;
      r(s, a) = 0.0;
    }
  }

  // Throws unless every row P[s][a][.] is a distribution to within 1e-12.
  void check_stochastic() const {
    for (int s = 0; s < n_states_; ++s) {
      for (int a = 0; a < n_actions_; ++a) {
        double sum = 0.0;
        for (int t = 0; t < n_states_; ++t) {
          const double q = p(s, a, t);
          if (q < 0.0) throw std::invalid_argument("negative transition probability");
          sum += q;
        }
        if (std::abs(sum - 1.0) > 1e-12) {
          std::ostringstream os;
          os << "transition row (" << s << ", " << a << ") sums to " << sum;
          throw std::invalid_argument(os.str());
        }
      }
    }
  }

  double q_value(int s, int a, const std::vector<double>& v) const {
    double q = r(s, a);
    double future = 0.0;
    for (int t = 0; t < n_states_; ++t) future += p(s, a, t) * v[static_cast<std::size_t>(t)];
    return q + discount_ * future;
  }

 private:
  std::size_t index(int s, int a, int next) const {
    return (static_cast<std::size_t>(s) * n_actions_ + a) * n_states_ + next;
  }

  int n_states_;
  int n_actions_;
  double discount_;
  std::vector<double> transition_;
  std::vector<double> reward_;
  std::vector<bool> absorbing_;
};

struct ValueIterationResult {
  std::vector<double> values;
  std::vector<int> policy;
  double residual = 0.0;
  int iterations = 0;
  // Sup-norm Bellman residual after each sweep.
  std::vector<double> residual_history;
};

/// Greedy action: the first action whose Q-value is strictly larger than all
/// lower-indexed ones, so ties resolve toward the lowest action index.
inline int greedy_action(const TabularMDP& mdp, int s, const std::vector<double>& v) {
  int best = 0;
  double best_q = mdp.q_value(s, 0, v);
  for (int a = 1; a < mdp.n_actions(); ++a) {
    const double q = mdp.q_value(s, a, v);
    if (q > best_q) {
      best_q = q;
      best = a;
    }
  }
  return best;
}

inline ValueIterationResult value_iteration(const TabularMDP& mdp, double tol, int max_iter) {
  if (!(tol > 0.0)) throw std::invalid_argument("value iteration tolerance must be positive");
  const auto n = static_cast<std::size_t>(mdp.n_states());
  ValueIterationResult out;
  std::vector<double> v(n, 0.0);
  std::vector<double> next(n, 0.0);
  double residual = std::numeric_limits<double>::infinity();
  int it = 0;
  while (it < max_iter) {
    residual = 0.0;
    for (int s = 0; s < mdp.n_states(); ++s) {
      double best = mdp.q_value(s, 0, v);
      for (int a = 1; a < mdp.n_actions(); ++a) best = std::max(best, mdp.q_value(s, a, v));
      next[static_cast<std::size_t>(s)] = best;
      residual = std::max(residual, std::abs(best - v[static_cast<std::size_t>(s)]));
    }
    v.swap(next);
    ++it;
    out.residual_history.push_back(residual);
    if (residual <= tol) break;
  }
  if (residual > tol) {
    std::ostringstream os;
    os << "value iteration did not converge in " << max_iter << " iterations (residual " << residual << ")";
    throw ConvergenceError(os.str(), residual);
  }
  out.policy.resize(n);
  for (int s = 0; s < mdp.n_states(); ++s) out.policy[static_cast<std::size_t>(s)] = greedy_action(mdp, s, v);
  out.values = std::move(v);
  out.residual = residual;
  out.iterations = it;
  return out;
}

/// Absorption probabilities of the chain induced by `policy`.
///
/// Returns an n_states x n_absorbing matrix (row-major, one row per state);
/// column j is the j-th absorbing state in index order. Absorbing rows are
/// unit vectors. Throws when some transient state cannot reach absorption.
struct AbsorptionResult {
  std::vector<int> absorbing_states;
  std::vector<std::vector<double>> probability;  // [state][absorbing column]

  double to(int state, int absorbing_state) const {
    for (std::size_t j = 0; j < absorbing_states.size(); ++j) {
      if (absorbing_states[j] == absorbing_state) return probability[static_cast<std::size_t>(state)][j];
    }
    throw std::out_of_range("not an absorbing state");
  }
};

inline AbsorptionResult absorption_probabilities(const TabularMDP& mdp, const std::vector<int>& policy) {
  if (policy.size() != static_cast<std::size_t>(mdp.n_states())) {
    throw std::invalid_argument("policy size does not match state count");
  }
  AbsorptionResult out;
  std::vector<int> transient;
  std::vector<int> column(static_cast<std::size_t>(mdp.n_states()), -1);
  for (int s = 0; s < mdp.n_states(); ++s) {
    if (mdp.absorbing(s)) {
      column[static_cast<std::size_t>(s)] = static_cast<int>(out.absorbing_states.size());
      out.absorbing_states.push_back(s);
    } else {
      column[static_cast<std::size_t>(s)] = static_cast<int>(transient.size());
      transient.push_back(s);
    }
  }
  if (out.absorbing_states.empty()) throw std::invalid_argument("MDP has no absorbing states");

  const auto nt = static_cast<Eigen::Index>(transient.size());
  const auto na = static_cast<Eigen::Index>(out.absorbing_states.size());
  // (I - Q) X = R over transient states.
  Eigen::MatrixXd lhs = Eigen::MatrixXd::Identity(nt, nt);
  Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(nt, na);
  for (Eigen::Index i = 0; i < nt; ++i) {
    const int s = transient[static_cast<std::size_t>(i)];
    const int a = policy[static_cast<std::size_t>(s)];
    for (int t = 0; t < mdp.n_states(); ++t) {
      const double q = mdp.p(s, a, t);
      if (q == 0.0) continue;
      const int col = column[static_cast<std::size_t>(t)];
      if (mdp.absorbing(t)) {
        rhs(i, col) += q;
      } else {
        lhs(i, col) -= q;
      }
    }
  }

  out.probability.assign(static_cast<std::size_t>(mdp.n_states()), std::vector<double>(static_cast<std::size_t>(na), 0.0));
  for (int s : out.absorbing_states) {
    out.probability[static_cast<std::size_t>(s)][static_cast<std::size_t>(column[static_cast<std::size_t>(s)])] = 1.0;
  }
  if (nt == 0) return out;

  Eigen::FullPivLU<Eigen::MatrixXd> lu(lhs);
  lu.setThreshold(1e-13);
  if (!lu.isInvertible()) throw SingularityError("absorbing-chain system is singular: some state never absorbs");
  const Eigen::MatrixXd x = lu.solve(rhs);
  for (Eigen::Index i = 0; i < nt; ++i) {
    auto& row = out.probability[static_cast<std::size_t>(transient[static_cast<std::size_t>(i)])];
    for (Eigen::Index j = 0; j < na; ++j) row[static_cast<std::size_t>(j)] = x(i, j);
  }
  return out;
}

// State layout shared by the user and app MDPs: progress w -> w - 1, then
// Goal, then Disengaged.
struct ChainLayout {
  int n_states_world;  // N

  int progress(int w) const noexcept { return w - 1; }
  int goal() const noexcept { return n_states_world - 1; }
  int disengaged() const noexcept { return n_states_world; }
  int size() const noexcept { return n_states_world + 1; }
  int index(const UserState& s) const noexcept {
    switch (s.kind()) {
      case UserState::Kind::Goal:
        return goal();
      case UserState::Kind::Disengaged:
        return disengaged();
      case UserState::Kind::Progress:
        break;
    }
    return progress(s.w());
  }
};

/// The user's own MDP: actions {0 stay, 1 act}. Acting pays B and moves right
/// with the user's believed p_user, adding G on goal entry; staying
/// disengages with d_world and pays D on entry. Discount is gamma_user.
inline TabularMDP build_user_mdp(const UserParams& u, const WorldParams& world) {
  validate(u);
  validate(world);
  const ChainLayout L{world.n_states};
  TabularMDP mdp(L.size(), 2, u.gamma_user);
  for (int w = 1; w < world.n_states; ++w) {
    const int s = L.progress(w);
    const int right = (w + 1 == world.n_states) ? L.goal() : L.progress(w + 1);

    mdp.p(s, 1, right) += u.p_user;
    mdp.p(s, 1, s) += 1.0 - u.p_user;
    mdp.r(s, 1) = u.burden + (right == L.goal() ? u.p_user * u.goal_reward : 0.0);

    mdp.p(s, 0, L.disengaged()) += world.d_world;
    mdp.p(s, 0, s) += 1.0 - world.d_world;
    mdp.r(s, 0) = world.d_world * u.disengage_reward;
  }
  mdp.make_absorbing(L.goal());
  mdp.make_absorbing(L.disengaged());
  return mdp;
}

}  // namespace nudge
