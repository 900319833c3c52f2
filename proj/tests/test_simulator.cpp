#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "nudge/simulator.hpp"

using namespace nudge;
using K = InterventionKind;

namespace {

// B > 0: the user acts everywhere without help.
const UserParams kEager{1.0, 10.0, 0.0, 0.6, 0.6};

double goal_probability(const UserParams& u, const WorldParams& w, const AppPolicy& pol,
                        const InterventionProfile& prof, int start_w) {
  const TabularMDP mdp = build_app_mdp(u, w, prof, 0.99);
  const AbsorptionResult a = absorption_probabilities(mdp, pol.as_mdp_policy());
  const ChainLayout L{w.n_states};
  return a.to(L.progress(start_w), L.goal());
}

}  // namespace

TEST(Rollout, CertainProgressTakesExactlyDistanceSteps) {
  const WorldParams w{5, 1.0, 0.1, 0.0};
  const InterventionProfile prof = InterventionProfile::maximal(kEager);
  const AppPolicy pol = plan(kEager, w, prof);
  const Trajectory t = rollout(kEager, w, pol, prof, 3);
  EXPECT_EQ(t.outcome, Outcome::Goal);
  ASSERT_EQ(t.steps.size(), 4u);
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_EQ(t.steps[i].state, UserState::progress(static_cast<int>(i) + 1));
    EXPECT_EQ(t.steps[i].a_observed, 1);
  }
  EXPECT_EQ(t.app_return(), 4.0);
}

TEST(Rollout, CertainDisengagementEndsAtFirstStep) {
  const WorldParams w{5, 0.6, 1.0, 1.0};
  const InterventionProfile prof = InterventionProfile::maximal(kEager);
  const AppPolicy pol = plan(kEager, w, prof);
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const Trajectory t = rollout(kEager, w, pol, prof, seed);
    EXPECT_EQ(t.outcome, Outcome::Disengaged);
    ASSERT_EQ(t.steps.size(), 1u);
    EXPECT_EQ(t.steps[0].a_intended, 1);
    EXPECT_EQ(t.steps[0].a_observed, 0);
    EXPECT_EQ(t.steps[0].r_app, -1.0);
  }
}

TEST(Rollout, HorizonIsReported) {
  const WorldParams w{5, 0.6, 0.1, 0.0};
  const InterventionProfile prof = InterventionProfile::maximal(kEager);
  const AppPolicy pol = plan(kEager, w, prof);
  const Trajectory t = rollout(kEager, w, pol, prof, 1, {2, 1});
  EXPECT_EQ(t.outcome, Outcome::HorizonExceeded);
  EXPECT_EQ(t.steps.size(), 2u);
}

TEST(Rollout, RejectsBadOptions) {
  const WorldParams w{5, 0.6, 0.1, 0.0};
  const InterventionProfile prof = InterventionProfile::maximal(kEager);
  const AppPolicy pol = plan(kEager, w, prof);
  EXPECT_THROW(rollout(kEager, w, pol, prof, 1, {0, 1}), std::invalid_argument);
  EXPECT_THROW(rollout(kEager, w, pol, prof, 1, {10, 5}), std::invalid_argument);
  EXPECT_THROW(rollout(kEager, WorldParams{6, 0.6, 0.1, 0.0}, pol, prof, 1), std::invalid_argument);
}

TEST(Rollout, SameSeedSameTrajectory) {
  const UserParams u;
  const WorldParams w{8, 0.6, 0.1, 0.2};
  const InterventionProfile prof = InterventionProfile::maximal(u);
  const AppPolicy pol = plan(u, w, prof);
  std::ostringstream a, b, c;
  write_trajectory(a, rollout(u, w, pol, prof, 99));
  write_trajectory(b, rollout(u, w, pol, prof, 99));
  EXPECT_EQ(a.str(), b.str());
  int differing = 0;
  for (std::uint64_t s = 100; s < 110; ++s) {
    std::ostringstream o;
    write_trajectory(o, rollout(u, w, pol, prof, s));
    differing += o.str() != a.str() ? 1 : 0;
  }
  EXPECT_GT(differing, 0);
}

TEST(Rollout, TrajectoryLineFormat) {
  const WorldParams w{3, 1.0, 0.1, 0.0};
  const InterventionProfile prof = InterventionProfile::maximal(kEager);
  std::ostringstream os;
  write_trajectory(os, rollout(kEager, w, plan(kEager, w, prof), prof, 1));
  EXPECT_EQ(os.str(), "0,1,noop,1,1,1\n1,2,noop,1,1,1\n");
}

TEST(BatchStats, MeanStepsMatchNegativeBinomial) {
  const WorldParams w{5, 0.6, 0.1, 0.0};
  const InterventionProfile prof = InterventionProfile::maximal(kEager);
  const BatchStats s = batch_stats(kEager, w, plan(kEager, w, prof), prof, episode_seeds(7, 100'000));
  EXPECT_EQ(s.goal_rate.mean, 1.0);
  const double mean = 4.0 / 0.6;
  const double sd = std::sqrt(4.0 * 0.4 / 0.36);
  EXPECT_LE(std::abs(s.steps.mean - mean), 3 * sd / std::sqrt(1e5));
  EXPECT_NEAR(s.steps.std_error, sd / std::sqrt(1e5), 1e-3);
}

TEST(BatchStats, RatesSumToOne) {
  const UserParams u = UserParams{-2.0, 10.0, 1.0, 0.5, 0.5};
  const WorldParams w{6, 0.6, 0.3, 0.3};
  const InterventionProfile prof = InterventionProfile::maximal(u);
  const BatchStats s = batch_stats(u, w, plan(u, w, prof), prof, episode_seeds(1, 5000), {8, 1});
  EXPECT_NEAR(s.goal_rate.mean + s.disengage_rate.mean + s.horizon_rate.mean, 1.0, 1e-12);
  EXPECT_GT(s.horizon_rate.mean, 0.0);
  EXPECT_LE(s.goal_rate.ci_low, s.goal_rate.mean);
  EXPECT_GE(s.goal_rate.ci_high, s.goal_rate.mean);
  EXPECT_THROW(batch_stats(u, w, plan(u, w, prof), prof, {}), std::invalid_argument);
}

TEST(BatchStats, GoalRateMatchesAbsorptionWithNoise) {
  const UserParams u;
  const WorldParams w{6, 0.6, 0.15, 0.3};
  const InterventionProfile prof = InterventionProfile::maximal(u);
  const AppPolicy pol = plan(u, w, prof);
  const double p = goal_probability(u, w, pol, prof, 1);
  const std::size_t n = 100'000;
  const BatchStats s = batch_stats(u, w, pol, prof, episode_seeds(11, n), {1'000'000, 1});
  EXPECT_EQ(s.horizon_rate.mean, 0.0);
  EXPECT_LE(std::abs(s.goal_rate.mean - p), 3 * std::sqrt(p * (1 - p) / n)) << s.goal_rate.mean << " vs " << p;
}

TEST(BatchStats, GoalRateMatchesAbsorptionForFixedIntervention) {
  const UserParams u{-1.0, 10.0, 0.0, 0.6, 0.1};
  const WorldParams w{5, 0.6, 0.2, 0.1};
  const InterventionProfile prof = InterventionProfile::maximal(u);
  const AppPolicy pol = AppPolicy::constant(u, w, prof, K::OnD);
  const double p = goal_probability(u, w, pol, prof, 2);
  const std::size_t n = 100'000;
  const BatchStats s = batch_stats(u, w, pol, prof, episode_seeds(12, n), {1'000'000, 2});
  EXPECT_LE(std::abs(s.goal_rate.mean - p), 3 * std::sqrt(p * (1 - p) / n)) << s.goal_rate.mean << " vs " << p;
}

TEST(Rollout, MoreNoiseNeverCreatesGoalsOnSharedSeeds) {
  const UserParams u;
  const WorldParams base{8, 0.6, 0.1, 0.0};
  const InterventionProfile prof = InterventionProfile::maximal(u);
  // Under B every state from some w onward acts: an upward-closed set.
  const AppPolicy pol = AppPolicy::constant(u, base, prof, K::OnB);
  for (std::uint64_t seed = 0; seed < 3000; ++seed) {
    bool prev_goal = true;
    for (double s2 : {0.0, 0.1, 0.3, 0.6, 0.9}) {
      WorldParams w = base;
      w.sigma2 = s2;
      const bool goal = rollout(u, w, pol, prof, seed, {1'000'000, 1}).outcome == Outcome::Goal;
      EXPECT_TRUE(prev_goal || !goal) << "seed " << seed << " sigma2 " << s2;
      prev_goal = goal;
    }
  }
}

TEST(EpisodeSeeds, DistinctAndReproducible) {
  const auto a = episode_seeds(5, 1000);
  const auto b = episode_seeds(5, 1000);
  EXPECT_EQ(a, b);
  std::vector<std::uint64_t> sorted = a;
  std::sort(sorted.begin(), sorted.end());
  EXPECT_EQ(std::adjacent_find(sorted.begin(), sorted.end()), sorted.end());
  EXPECT_NE(episode_seeds(6, 1)[0], a[0]);
}

TEST(CounterRng, UniformRangeAndMean) {
  CounterRng rng(42);
  double sum = 0;
  const int n = 200'000;
  for (int i = 0; i < n; ++i) {
    const double x = rng.uniform();
    ASSERT_GE(x, 0.0);
    ASSERT_LT(x, 1.0);
    sum += x;
  }
  EXPECT_NEAR(sum / n, 0.5, 4 * std::sqrt(1.0 / 12 / n));
  EXPECT_EQ(rng.counter(), static_cast<std::uint64_t>(n));
}
