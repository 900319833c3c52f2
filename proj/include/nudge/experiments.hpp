#pragma once

// User presets and the three experiment pipelines: app policy maps per user
// type, minimum-effectiveness curves, and the randomized sensitivity study.

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "nudge/app_planner.hpp"
#include "nudge/interventions.hpp"
#include "nudge/rng.hpp"
#include "nudge/user_model.hpp"

namespace nudge {

enum class UserPreset { Default, Myopic, Farsighted, Underconfident, Overconfident };

inline constexpr std::array<UserPreset, 4> kImpairedPresets = {UserPreset::Myopic, UserPreset::Farsighted,
                                                                UserPreset::Underconfident, UserPreset::Overconfident};

inline std::string_view preset_name(UserPreset p) noexcept {
  switch (p) {
    case UserPreset::Default: return "default";
    case UserPreset::Myopic: return "myopic";
    case UserPreset::Farsighted: return "farsighted";
    case UserPreset::Underconfident: return "underconfident";
    case UserPreset::Overconfident: return "overconfident";
  }
  return "?";
}

inline UserPreset parse_preset(std::string_view name) {
  for (UserPreset p : {UserPreset::Default, UserPreset::Myopic, UserPreset::Farsighted, UserPreset::Underconfident,
                       UserPreset::Overconfident}) {
    if (preset_name(p) == name) return p;
  }
  throw std::invalid_argument("unknown preset: " + std::string(name));
}

/// Apply a preset's single override to `base`.
inline UserParams with_preset(UserParams base, UserPreset p) {
  switch (p) {
    case UserPreset::Default: break;
    case UserPreset::Myopic: base.gamma_user = 0.1; break;
    case UserPreset::Farsighted: base.gamma_user = 0.9; break;
    case UserPreset::Underconfident: base.p_user = 0.1; break;
    case UserPreset::Overconfident: base.p_user = 0.9; break;
  }
  return base;
}

inline UserParams preset(UserPreset p) { return with_preset(UserParams{}, p); }

/// Bounded kind expected in the second window for each impaired preset.
inline InterventionKind expected_window2_kind(UserPreset p) {
  switch (p) {
    case UserPreset::Myopic:
    case UserPreset::Overconfident:
      return InterventionKind::OnGamma;
    case UserPreset::Farsighted:
    case UserPreset::Underconfident:
      return InterventionKind::OnP;
    case UserPreset::Default:
      break;
  }
  throw std::invalid_argument("the default preset has no expected window pattern");
}

struct ExperimentConfig {
  // Goal at w = 12. With fewer states the overconfident and farsighted users
  // never reach the region where gamma or p alone stops working, so their
  // first window does not show up.
  WorldParams world{12, 0.6, 0.1, 0.0};
  UserParams base{};
  // nullopt: maximal profile for each user, with these caps.
  std::optional<InterventionProfile> profile;
  std::optional<double> d_floor;
  std::optional<double> epsilon_b;
  PlannerOptions planner{};
  EffectivenessOptions effectiveness{};

  InterventionProfile profile_for(const UserParams& u) const {
    if (profile) return *profile;
    return InterventionProfile::maximal(u, d_floor.value_or(InterventionProfile::default_d_floor(u)),
                                        epsilon_b.value_or(InterventionProfile::default_epsilon_b(u)));
  }
};

// ---------------------------------------------------------------------------
// Window pattern checks

enum class Verdict { Pass, Fail, Vacuous };

inline std::string_view verdict_name(Verdict v) noexcept {
  switch (v) {
    case Verdict::Pass: return "pass";
    case Verdict::Fail: return "fail";
    case Verdict::Vacuous: return "vacuous";
  }
  return "?";
}

struct PatternRules {
  InterventionKind window2_kind = InterventionKind::OnGamma;
  bool require_window1 = false;
  bool require_window2 = false;
};

struct PatternVerdict {
  Verdict verdict = Verdict::Pass;
  std::string reason;
};

/// Scanning far to near, labels must appear in the order
///   hopeless, window1, window2(expected kind), window3, default_act
/// with any of them possibly absent. A window2 run on the other bounded kind
/// fails. A policy where every state acts by default is vacuous.
///
/// Hopeless runs can only come first: they are far states where even the
/// floored D intervention is too weak, which an unbounded D would turn into
/// window1.
inline PatternVerdict check_window_pattern(const WindowDecomposition& d, const PatternRules& rules) {
  bool all_default = true;
  bool saw_w1 = false;
  bool saw_w2 = false;
  int last_rank = -1;
  for (const Window& w : d.windows) {
    int rank = 0;
    switch (w.label) {
      case WindowLabel::Hopeless: rank = 0; break;
      case WindowLabel::Window1: rank = 1; saw_w1 = true; break;
      case WindowLabel::Window2:
        if (w.bounded != rules.window2_kind) {
          return {Verdict::Fail, "window2 on " + std::string(kind_name(*w.bounded)) + " in " + d.describe()};
        }
        rank = 2;
        saw_w2 = true;
        break;
      case WindowLabel::Window3: rank = 3; break;
      case WindowLabel::DefaultAct: rank = 4; break;
    }
    if (w.label != WindowLabel::DefaultAct) all_default = false;
    if (rank < last_rank) return {Verdict::Fail, "windows out of order: " + d.describe()};
    last_rank = rank;
  }
  if (all_default) return {Verdict::Vacuous, "user acts by default everywhere"};
  if (rules.require_window1 && !saw_w1) return {Verdict::Fail, "no window1: " + d.describe()};
  if (rules.require_window2 && !saw_w2) return {Verdict::Fail, "no window2: " + d.describe()};
  return {Verdict::Pass, d.describe()};
}

// ---------------------------------------------------------------------------
// Policy maps

struct PresetPolicy {
  UserPreset preset;
  UserParams user;
  InterventionProfile profile;
  AppPolicy policy;
  WindowDecomposition windows;
  PatternVerdict verdict;  // Pass for the default preset
};

struct PolicyMaps {
  ExperimentConfig config;
  std::vector<PresetPolicy> presets;

  bool all_patterns_hold() const {
    for (const auto& p : presets) {
      if (p.verdict.verdict == Verdict::Fail) return false;
    }
    return true;
  }
};

/// Plan for an already-resolved user and grade it against the pattern of
/// preset `p`. Impaired presets use the strict rules (both windows present)
/// unless `rules_override` is given; its window2 kind is replaced by the
/// preset's.
inline PresetPolicy plan_user(const ExperimentConfig& cfg, const UserParams& u, UserPreset p,
                              const PatternRules* rules_override = nullptr) {
  PresetPolicy out{p, u, {}, {}, {}, {}};
  out.profile = cfg.profile_for(out.user);
  out.policy = plan(out.user, cfg.world, out.profile, cfg.planner);
  out.windows = extract_windows(out.policy);
  if (p != UserPreset::Default) {
    PatternRules rules{expected_window2_kind(p), true, true};
    if (rules_override) {
      rules = *rules_override;
      rules.window2_kind = expected_window2_kind(p);
    }
    out.verdict = check_window_pattern(out.windows, rules);
  }
  return out;
}

inline PresetPolicy plan_preset(const ExperimentConfig& cfg, const UserParams& base, UserPreset p,
                                const PatternRules* rules_override = nullptr) {
  return plan_user(cfg, with_preset(base, p), p, rules_override);
}

/// Default user plus the four impaired presets. Each impaired preset is
/// expected to show a B/D window far from the goal followed by a window on
/// its bounded kind (gamma for myopic and overconfident, p for the others).
inline PolicyMaps reproduce_policy_maps(const ExperimentConfig& cfg) {
  validate(cfg.world);
  PolicyMaps out{cfg, {}};
  out.presets.push_back(plan_preset(cfg, cfg.base, UserPreset::Default));
  for (UserPreset p : kImpairedPresets) out.presets.push_back(plan_preset(cfg, cfg.base, p));
  return out;
}

// ---------------------------------------------------------------------------
// Effectiveness curves

struct EffectivenessPoint {
  UserPreset preset;
  int w;
  int delta;
  InterventionKind kind;
  std::optional<double> percent;  // nullopt: infeasible even at the cap
  bool default_act;
};

struct EffectivenessCurves {
  ExperimentConfig config;
  std::vector<EffectivenessPoint> points;

  std::optional<double> at(UserPreset p, int w, InterventionKind k) const {
    for (const auto& pt : points) {
      if (pt.preset == p && pt.w == w && pt.kind == k) return pt.percent;
    }
    throw std::out_of_range("no such effectiveness point");
  }
};

inline std::vector<EffectivenessPoint> effectiveness_curve(const ExperimentConfig& cfg, UserPreset p,
                                                           const UserParams& u) {
  const InterventionProfile profile = cfg.profile_for(u);
  std::vector<EffectivenessPoint> out;
  for (int w = 1; w < cfg.world.n_states; ++w) {
    const int delta = cfg.world.n_states - w;
    const bool def = user_policy(u, cfg.world.d_world, delta) == 1;
    for (InterventionKind k : kEffectKinds) {
      out.push_back({p, w, delta, k, min_effectiveness(u, cfg.world, delta, k, profile, cfg.effectiveness), def});
    }
  }
  return out;
}

inline EffectivenessCurves reproduce_effectiveness_curves(const ExperimentConfig& cfg) {
  validate(cfg.world);
  EffectivenessCurves out{cfg, {}};
  for (UserPreset p : kImpairedPresets) {
    auto curve = effectiveness_curve(cfg, p, with_preset(cfg.base, p));
    out.points.insert(out.points.end(), curve.begin(), curve.end());
  }
  return out;
}

/// Farthest progress state at which a maximal `k` intervention makes the
/// user act while the user would not act unaided. Used as the comparison
/// state of the effectiveness curves.
inline std::optional<int> far_edge_of_window(const ExperimentConfig& cfg, const UserParams& u, InterventionKind k) {
  const InterventionProfile profile = cfg.profile_for(u);
  for (int w = 1; w < cfg.world.n_states; ++w) {
    const int delta = cfg.world.n_states - w;
    if (user_policy(u, cfg.world.d_world, delta) == 1) continue;
    if (induced_action(u, cfg.world, delta, k, profile) == 1) return w;
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Sensitivity analysis

struct Range {
  double lo;
  double hi;
};

struct SensitivityRanges {
  Range gamma{0.4, 0.7};
  Range p{0.5, 0.7};
  Range burden{-5.0, -0.1};
  Range disengage{-5.0, 5.0};
  Range d_world{0.1, 0.5};
  double goal_reward = 10.0;
  double p_world = 0.6;
};

struct SensitivitySample {
  UserParams user;
  double d_world;
};

/// Uniform draw for one trial; draws consume the stream in the order
/// gamma, p, B, D, d_world.
inline SensitivitySample sample_parameters(const SensitivityRanges& r, std::uint64_t seed, std::uint64_t trial) {
  CounterRng rng(seed, trial);
  SensitivitySample s{};
  s.user.gamma_user = rng.uniform(r.gamma.lo, r.gamma.hi);
  s.user.p_user = rng.uniform(r.p.lo, r.p.hi);
  s.user.burden = rng.uniform(r.burden.lo, r.burden.hi);
  s.user.disengage_reward = rng.uniform(r.disengage.lo, r.disengage.hi);
  s.user.goal_reward = r.goal_reward;
  s.d_world = rng.uniform(r.d_world.lo, r.d_world.hi);
  return s;
}

struct TrialResult {
  int trial = 0;
  SensitivitySample sample{};
  std::vector<PresetPolicy> presets;  // impaired presets, kImpairedPresets order
  Verdict verdict = Verdict::Pass;
  bool window3_seen = false;

  const PresetPolicy& preset(UserPreset p) const {
    for (const auto& pp : presets) {
      if (pp.preset == p) return pp;
    }
    throw std::out_of_range("preset not planned");
  }
};

struct SensitivityReport {
  std::uint64_t seed = 0;
  std::vector<TrialResult> trials;

  int count(Verdict v) const {
    int n = 0;
    for (const auto& t : trials) n += t.verdict == v ? 1 : 0;
    return n;
  }
};

/// Plan all four impaired presets for one sampled parameter set and grade
/// the window patterns. Window sizes vary with the sample, so neither window
/// is required to be present; ordering and the bounded kind are.
inline TrialResult evaluate_trial(const ExperimentConfig& base_cfg, int index, const SensitivitySample& s,
                                  double p_world) {
  ExperimentConfig cfg = base_cfg;
  cfg.world.d_world = s.d_world;
  cfg.world.p_world = p_world;
  TrialResult t;
  t.trial = index;
  t.sample = s;
  const PatternRules lenient{InterventionKind::OnGamma, false, false};
  bool all_vacuous = true;
  bool any_fail = false;
  for (UserPreset p : kImpairedPresets) {
    PresetPolicy pp = plan_preset(cfg, s.user, p, &lenient);
    if (pp.verdict.verdict != Verdict::Vacuous) all_vacuous = false;
    if (pp.verdict.verdict == Verdict::Fail) any_fail = true;
    for (const auto& w : pp.windows.windows) t.window3_seen |= w.label == WindowLabel::Window3;
    t.presets.push_back(std::move(pp));
  }
  t.verdict = all_vacuous ? Verdict::Vacuous : (any_fail ? Verdict::Fail : Verdict::Pass);
  return t;
}

inline SensitivityReport run_sensitivity(const ExperimentConfig& cfg, int n_trials, std::uint64_t seed,
                                         const SensitivityRanges& ranges = {}) {
  if (n_trials < 1) throw std::invalid_argument("sensitivity analysis needs at least one trial");
  SensitivityReport out;
  out.seed = seed;
  for (int i = 0; i < n_trials; ++i) {
    const SensitivitySample s = sample_parameters(ranges, seed, static_cast<std::uint64_t>(i));
    out.trials.push_back(evaluate_trial(cfg, i + 1, s, ranges.p_world));
  }
  return out;
}

}  // namespace nudge
