#pragma once

// Monte Carlo rollouts of the coupled user / app / world system.
//
// Each step consumes exactly one uniform u from the episode's stream, with
// q = (1 - sigma2) * a_intended:
//   u < q * p_world          -> executed, moves right
//   u < q                    -> executed, stays
//   u >= 1 - (1 - q) d_world -> not executed, disengages
//   otherwise                -> not executed, stays
// This reproduces the model's marginals and couples runs that share a seed:
// with a fixed intervention plan whose acting set is upward-closed in w,
// raising sigma2 can only turn a goal into a failure, never the reverse.

#include <cmath>
#include <cstdint>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "nudge/app_planner.hpp"
#include "nudge/interventions.hpp"
#include "nudge/rng.hpp"
#include "nudge/user_model.hpp"

namespace nudge {

struct Step {
  UserState state;
  InterventionKind intervention;
  int a_intended;
  int a_observed;
  double r_app;
};

enum class Outcome { Goal, Disengaged, HorizonExceeded };

inline std::string_view outcome_name(Outcome o) noexcept {
  switch (o) {
    case Outcome::Goal: return "goal";
    case Outcome::Disengaged: return "disengaged";
    case Outcome::HorizonExceeded: return "horizon_exceeded";
  }
  return "?";
}

struct Trajectory {
  std::vector<Step> steps;
  Outcome outcome = Outcome::HorizonExceeded;
  std::uint64_t seed = 0;

  double app_return() const noexcept {
    double r = 0.0;
    for (const auto& s : steps) r += s.r_app;
    return r;
  }
};

inline std::string state_label(const UserState& s) {
  switch (s.kind()) {
    case UserState::Kind::Goal: return "goal";
    case UserState::Kind::Disengaged: return "disengaged";
    case UserState::Kind::Progress: break;
  }
  return std::to_string(s.w());
}

/// One line per step: step,w,intervention,a_intended,a_observed,r_app
inline void write_trajectory(std::ostream& os, const Trajectory& t) {
  for (std::size_t i = 0; i < t.steps.size(); ++i) {
    const Step& s = t.steps[i];
    os << i << ',' << state_label(s.state) << ',' << kind_name(s.intervention) << ',' << s.a_intended << ','
       << s.a_observed << ',' << s.r_app << '\n';
  }
}

struct RolloutOptions {
  int horizon = 10'000;
  int start_w = 1;
};

inline Trajectory rollout(const UserParams& u, const WorldParams& world, const AppPolicy& policy,
                          const InterventionProfile& profile, std::uint64_t seed, const RolloutOptions& opt = {}) {
  if (opt.horizon < 1) throw std::invalid_argument("horizon must be at least 1");
  if (opt.start_w < 1 || opt.start_w >= world.n_states) throw std::invalid_argument("start state out of range");
  if (policy.n_states() != world.n_states) throw std::invalid_argument("policy built for a different world");

  CounterRng rng(seed);
  Trajectory t;
  t.seed = seed;
  int w = opt.start_w;
  for (int step = 0; step < opt.horizon; ++step) {
    const UserState here = UserState::progress(w);
    const InterventionKind k = policy.chosen(here);
    const int intended = induced_action(u, world, world.n_states - w, k, profile);
    const double q = (1.0 - world.sigma2) * intended;
    const double x = rng.uniform();
    const int observed = x < q ? 1 : 0;
    t.steps.push_back({here, k, intended, observed, 2.0 * observed - 1.0});
    if (observed == 1) {
      if (x < q * world.p_world) {
        if (++w == world.n_states) {
          t.outcome = Outcome::Goal;
          return t;
        }
      }
    } else if (x >= 1.0 - (1.0 - q) * world.d_world) {
      t.outcome = Outcome::Disengaged;
      return t;
    }
  }
  t.outcome = Outcome::HorizonExceeded;
  return t;
}

struct Estimate {
  double mean = 0.0;
  double std_error = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
};

struct BatchStats {
  std::size_t episodes = 0;
  Estimate goal_rate;
  Estimate disengage_rate;
  Estimate horizon_rate;
  Estimate app_return;
  Estimate steps;
  // Mean steps over episodes that reached the goal.
  Estimate steps_to_goal;
};

namespace detail {
// Welford accumulator; confidence intervals use the normal approximation.
class Moments {
 public:
  void add(double x) noexcept {
    ++n_;
    const double d = x - mean_;
    mean_ += d / static_cast<double>(n_);
    m2_ += d * (x - mean_);
  }
  Estimate estimate(double z = 1.959963984540054) const noexcept {
    Estimate e;
    if (n_ == 0) return e;
    e.mean = mean_;
    const double var = n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0;
    e.std_error = std::sqrt(var / static_cast<double>(n_));
    e.ci_low = mean_ - z * e.std_error;
    e.ci_high = mean_ + z * e.std_error;
    return e;
  }

 private:
  std::size_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};
}  // namespace detail

/// Episode seeds i = 0 .. n-1 derived from one base seed.
inline std::vector<std::uint64_t> episode_seeds(std::uint64_t base, std::size_t n) {
  std::vector<std::uint64_t> seeds(n);
  for (std::size_t i = 0; i < n; ++i) seeds[i] = split_seed(base, i);
  return seeds;
}

inline BatchStats batch_stats(const UserParams& u, const WorldParams& world, const AppPolicy& policy,
                              const InterventionProfile& profile, const std::vector<std::uint64_t>& seeds,
                              const RolloutOptions& opt = {}) {
  if (seeds.empty()) throw std::invalid_argument("batch needs at least one seed");
  detail::Moments goal, dis, hor, ret, steps, to_goal;
  for (std::uint64_t seed : seeds) {
    const Trajectory t = rollout(u, world, policy, profile, seed, opt);
    goal.add(t.outcome == Outcome::Goal ? 1.0 : 0.0);
    dis.add(t.outcome == Outcome::Disengaged ? 1.0 : 0.0);
    hor.add(t.outcome == Outcome::HorizonExceeded ? 1.0 : 0.0);
    ret.add(t.app_return());
    steps.add(static_cast<double>(t.steps.size()));
    if (t.outcome == Outcome::Goal) to_goal.add(static_cast<double>(t.steps.size()));
  }
  BatchStats s;
  s.episodes = seeds.size();
  s.goal_rate = goal.estimate();
  s.disengage_rate = dis.estimate();
  s.horizon_rate = hor.estimate();
  s.app_return = ret.estimate();
  s.steps = steps.estimate();
  s.steps_to_goal = to_goal.estimate();
  return s;
}

}  // namespace nudge
