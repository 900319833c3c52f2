#pragma once

// The user's decision model: an agent that solves its own (possibly impaired)
// MDP on a one-dimensional progress chain and acts optimally for it.
//
// Progress states are w = 1 .. N-1, the goal sits at w = N, and a separate
// absorbing Disengaged state is reachable only by abstaining. Everything in
// this header is a pure function of its value arguments.

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <string>

#include "nudge/errors.hpp"

namespace nudge {

/// The user's decision parameters: perceived burden per action, goal reward,
/// disengagement reward, believed progress probability and discount.
struct UserParams {
  double burden = -1.0;
  double goal_reward = 10.0;
  double disengage_reward = 0.0;
  double p_user = 0.6;
  double gamma_user = 0.6;

  friend bool operator==(const UserParams&, const UserParams&) = default;
};

/// Environment truth. `n_states` is N, the index of the goal.
struct WorldParams {
  int n_states = 8;
  double p_world = 0.6;
  double d_world = 0.1;
  double sigma2 = 0.0;

  int progress_count() const noexcept { return n_states - 1; }

  friend bool operator==(const WorldParams&, const WorldParams&) = default;
};

class UserState {
 public:
  enum class Kind { Progress, Goal, Disengaged };

  static UserState progress(int w) { return UserState(Kind::Progress, w); }
  static UserState goal() { return UserState(Kind::Goal, 0); }
  static UserState disengaged() { return UserState(Kind::Disengaged, 0); }

  Kind kind() const noexcept { return kind_; }
  bool is_progress() const noexcept { return kind_ == Kind::Progress; }
  bool is_absorbing() const noexcept { return kind_ != Kind::Progress; }
  // Only meaningful for progress states.
  int w() const noexcept { return w_; }
  int distance(int n_states) const noexcept { return n_states - w_; }

  friend bool operator==(const UserState&, const UserState&) = default;

 private:
  UserState(Kind k, int w) : kind_(k), w_(w) {}
  Kind kind_;
  int w_;
};

/// The three terms of the act/stay inequality: the burden accumulated on the
/// way to the goal, the discounted goal value, and the value of staying put.
struct DecisionComponents {
  double burden_term = 0.0;
  double goal_term = 0.0;
  double disengage_term = 0.0;
  double z = 1.0;

  double act_value() const noexcept { return burden_term + goal_term; }
};

inline bool is_probability(double x) noexcept { return x >= 0.0 && x <= 1.0; }

inline void validate(const UserParams& u) {
  if (!std::isfinite(u.burden) || !std::isfinite(u.goal_reward) ||
      !std::isfinite(u.disengage_reward)) {
    throw std::invalid_argument("user rewards must be finite");
  }
  if (!is_probability(u.p_user)) throw std::invalid_argument("p_user must lie in [0, 1]");
  if (!is_probability(u.gamma_user)) throw std::invalid_argument("gamma_user must lie in [0, 1]");
  if (u.gamma_user == 1.0 && u.p_user == 0.0) {
    throw SingularityError("gamma_user = 1 with p_user = 0 makes z = 0");
  }
}

inline void validate(const WorldParams& w) {
  if (w.n_states < 2) throw std::invalid_argument("n_states must be at least 2");
  if (!(w.p_world > 0.0 && w.p_world <= 1.0)) throw std::invalid_argument("p_world must lie in (0, 1]");
  if (!(w.d_world > 0.0 && w.d_world <= 1.0)) throw std::invalid_argument("d_world must lie in (0, 1]");
  if (!is_probability(w.sigma2)) throw std::invalid_argument("sigma2 must lie in [0, 1]");
}

/// Perceived one-step reward. Goal and Disengaged pay their reward regardless
/// of the action; a progress state pays B for acting and nothing otherwise.
inline double user_reward(const UserParams& u, const UserState& s, int action) {
  switch (s.kind()) {
    case UserState::Kind::Goal:
      return u.goal_reward;
    case UserState::Kind::Disengaged:
      return u.disengage_reward;
    case UserState::Kind::Progress:
      break;
  }
  return action == 1 ? u.burden : 0.0;
}

/// z = 1 - gamma (1 - p), the recurring denominator of the act value.
inline double z_factor(const UserParams& u) {
  double z = 1.0 - u.gamma_user * (1.0 - u.p_user);
  if (!(z > 0.0)) throw SingularityError("z = 1 - gamma(1 - p) is zero");
  return z;
}

/// Value of abstaining forever: dD / (1 - gamma (1 - d)).
inline double v_stay(const UserParams& u, double d_world) {
  double denom = 1.0 - u.gamma_user * (1.0 - d_world);
  if (!(denom > 0.0)) throw SingularityError("gamma_user = 1 with d_world = 0 makes v_stay diverge");
  return d_world * u.disengage_reward / denom;
}

inline void check_distance(int delta) {
  if (delta < 1) throw std::invalid_argument("distance to goal must be >= 1");
}

namespace detail {

struct ActTerms {
  double burden_term;
  double goal_term;
  double z;
};

// Both sums are accumulated with the running ratio r = gamma p / z. Since
// 0 <= r <= 1 and p / z <= 1, no term can overflow for any delta.
inline ActTerms act_terms(const UserParams& u, int delta) {
  check_distance(delta);
  const double z = z_factor(u);
  const double r = u.gamma_user * u.p_user / z;
  double term = 1.0 / z;  // r^k / z
  double series = 0.0;
  double r_pow = 1.0;     // r^(delta-1) once the loop finishes
  for (int k = 0; k < delta; ++k) {
    series += term;
    if (k + 1 < delta) {
      term *= r;
      r_pow *= r;
    }
  }
  return {series * u.burden, r_pow * (u.p_user / z) * u.goal_reward, z};
}

}  // namespace detail

inline DecisionComponents decision_components(const UserParams& u, double d_world, int delta) {
  const detail::ActTerms t = detail::act_terms(u, delta);
  return {t.burden_term, t.goal_term, v_stay(u, d_world), t.z};
}

/// Value of always acting from distance `delta` under the user's beliefs.
inline double v_right(const UserParams& u, int delta) {
  const detail::ActTerms t = detail::act_terms(u, delta);
  return t.burden_term + t.goal_term;
}

/// 1 iff acting is strictly better than abstaining. Ties stay.
inline int user_policy(const UserParams& u, double d_world, int delta) {
  DecisionComponents c = decision_components(u, d_world, delta);
  return c.act_value() > c.disengage_term ? 1 : 0;
}

inline double user_value(const UserParams& u, double d_world, int delta) {
  DecisionComponents c = decision_components(u, d_world, delta);
  return std::max(c.act_value(), c.disengage_term);
}

inline std::string to_string(const UserParams& u) {
  std::ostringstream os;
  os << "B=" << u.burden << " G=" << u.goal_reward << " D=" << u.disengage_reward
     << " p=" << u.p_user << " gamma=" << u.gamma_user;
  return os.str();
}

}  // namespace nudge
