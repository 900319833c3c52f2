#pragma once

// App interventions act on one user parameter for a single decision. B and D
// shifts are unbounded in principle; gamma and p saturate at 1.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "nudge/user_model.hpp"

namespace nudge {

enum class InterventionKind : std::uint8_t { NoOp = 0, OnB = 1, OnD = 2, OnGamma = 3, OnP = 4 };

inline constexpr std::array<InterventionKind, 5> kAllKinds = {
    InterventionKind::NoOp, InterventionKind::OnB, InterventionKind::OnD, InterventionKind::OnGamma,
    InterventionKind::OnP};

inline constexpr std::array<InterventionKind, 4> kEffectKinds = {
    InterventionKind::OnB, InterventionKind::OnD, InterventionKind::OnGamma, InterventionKind::OnP};

inline constexpr int kind_index(InterventionKind k) noexcept { return static_cast<int>(k); }

inline std::string_view kind_name(InterventionKind k) noexcept {
  switch (k) {
    case InterventionKind::NoOp: return "noop";
    case InterventionKind::OnB: return "B";
    case InterventionKind::OnD: return "D";
    case InterventionKind::OnGamma: return "gamma";
    case InterventionKind::OnP: return "p";
  }
  return "?";
}

inline InterventionKind parse_kind(std::string_view name) {
  for (InterventionKind k : kAllKinds) {
    if (kind_name(k) == name) return k;
  }
  throw std::invalid_argument("unknown intervention kind: " + std::string(name));
}

/// Small value set of intervention kinds, one bit per kind.
class KindSet {
 public:
  constexpr KindSet() = default;
  constexpr KindSet(std::initializer_list<InterventionKind> kinds) {
    for (auto k : kinds) insert(k);
  }

  constexpr void insert(InterventionKind k) noexcept { bits_ |= bit(k); }
  constexpr bool contains(InterventionKind k) const noexcept { return (bits_ & bit(k)) != 0; }
  constexpr bool empty() const noexcept { return bits_ == 0; }
  constexpr int size() const noexcept {
    int n = 0;
    for (auto k : kAllKinds) n += contains(k) ? 1 : 0;
    return n;
  }
  constexpr bool subset_of(KindSet other) const noexcept { return (bits_ & ~other.bits_) == 0; }
  constexpr KindSet operator|(KindSet o) const noexcept { return KindSet(static_cast<std::uint8_t>(bits_ | o.bits_)); }
  constexpr std::uint8_t bits() const noexcept { return bits_; }

  // "B|D|gamma"; empty set prints as "-".
  std::string to_string() const {
    std::string s;
    for (auto k : kAllKinds) {
      if (!contains(k)) continue;
      if (!s.empty()) s += '|';
      s += kind_name(k);
    }
    return s.empty() ? "-" : s;
  }

  friend constexpr bool operator==(KindSet, KindSet) = default;

 private:
  constexpr explicit KindSet(std::uint8_t b) : bits_(b) {}
  static constexpr std::uint8_t bit(InterventionKind k) noexcept {
    return static_cast<std::uint8_t>(1u << static_cast<unsigned>(k));
  }
  std::uint8_t bits_ = 0;
};

/// Effect magnitudes of each intervention plus the two knobs that define the
/// feasibility caps: the floor D may be pushed down to, and the margin by
/// which a maximal B intervention overshoots zero.
///
/// The D floor is not pinned down by the underlying model; the default -G
/// mirrors the scale of the goal reward. It bounds how strong a D
/// intervention can be, so results far from the goal depend on it.
struct InterventionProfile {
  double delta_b = 0.0;
  double delta_d = 0.0;
  double delta_gamma = 0.0;
  double delta_p = 0.0;
  double d_floor = -10.0;
  double epsilon_b = 1e-5;

  static double default_epsilon_b(const UserParams& u) { return 1e-6 * std::max(1.0, std::abs(u.goal_reward)); }
  static double default_d_floor(const UserParams& u) { return -u.goal_reward; }

  /// Every magnitude set to its feasibility cap for `u`.
  static InterventionProfile maximal(const UserParams& u) {
    return maximal(u, default_d_floor(u), default_epsilon_b(u));
  }
  static InterventionProfile maximal(const UserParams& u, double d_floor, double epsilon_b);

  double delta(InterventionKind k) const noexcept {
    switch (k) {
      case InterventionKind::OnB: return delta_b;
      case InterventionKind::OnD: return delta_d;
      case InterventionKind::OnGamma: return delta_gamma;
      case InterventionKind::OnP: return delta_p;
      case InterventionKind::NoOp: break;
    }
    return 0.0;
  }

  friend bool operator==(const InterventionProfile&, const InterventionProfile&) = default;
};

/// Largest feasible shift of the parameter `k` acts on.
inline double max_delta(const UserParams& u, InterventionKind k, const InterventionProfile& profile) {
  switch (k) {
    case InterventionKind::OnB: return u.burden < 0.0 ? -u.burden + profile.epsilon_b : 0.0;
    case InterventionKind::OnD: return std::max(0.0, u.disengage_reward - profile.d_floor);
    case InterventionKind::OnGamma: return 1.0 - u.gamma_user;
    case InterventionKind::OnP: return 1.0 - u.p_user;
    case InterventionKind::NoOp: break;
  }
  return 0.0;
}

inline InterventionProfile InterventionProfile::maximal(const UserParams& u, double d_floor, double epsilon_b) {
  InterventionProfile p;
  p.d_floor = d_floor;
  p.epsilon_b = epsilon_b;
  p.delta_b = max_delta(u, InterventionKind::OnB, p);
  p.delta_d = max_delta(u, InterventionKind::OnD, p);
  p.delta_gamma = max_delta(u, InterventionKind::OnGamma, p);
  p.delta_p = max_delta(u, InterventionKind::OnP, p);
  return p;
}

inline void validate(const InterventionProfile& p) {
  if (!(p.delta_b >= 0.0 && p.delta_d >= 0.0 && p.delta_gamma >= 0.0 && p.delta_p >= 0.0)) {
    throw std::invalid_argument("intervention magnitudes must be non-negative");
  }
  if (!(p.epsilon_b > 0.0)) throw std::invalid_argument("epsilon_b must be positive");
  if (!std::isfinite(p.d_floor)) throw std::invalid_argument("d_floor must be finite");
}

/// Shift exactly one parameter of `u` by `magnitude`.
inline UserParams apply_magnitude(UserParams u, InterventionKind k, double magnitude, double d_floor) {
  switch (k) {
    case InterventionKind::NoOp:
      break;
    case InterventionKind::OnB:
      u.burden += magnitude;
      break;
    case InterventionKind::OnD:
      // Never pushes below the floor, and never raises D.
      u.disengage_reward = std::max(u.disengage_reward - magnitude, std::min(u.disengage_reward, d_floor));
      break;
    case InterventionKind::OnGamma:
      u.gamma_user = std::min(1.0, u.gamma_user + magnitude);
      break;
    case InterventionKind::OnP:
      u.p_user = std::min(1.0, u.p_user + magnitude);
      break;
  }
  return u;
}

inline UserParams apply(const UserParams& u, InterventionKind k, const InterventionProfile& profile) {
  return apply_magnitude(u, k, profile.delta(k), profile.d_floor);
}

/// The user's action after one transient intervention at distance `delta`.
inline int induced_action(const UserParams& u, const WorldParams& world, int delta, InterventionKind k,
                          const InterventionProfile& profile) {
  return user_policy(apply(u, k, profile), world.d_world, delta);
}

struct EffectivenessOptions {
  int resolution = 1000;
  double tolerance = 1e-9;  // absolute, on the magnitude
};

namespace detail {
inline bool flips(const UserParams& u, double d_world, int delta, InterventionKind k, double magnitude,
                  double d_floor) {
  return user_policy(apply_magnitude(u, k, magnitude, d_floor), d_world, delta) == 1;
}
}  // namespace detail

/// Smallest magnitude (within tolerance) in [0, max] that makes the user act,
/// or nullopt when even the cap does not. Returns exactly 0 when the user
/// already acts unaided.
///
/// The response in gamma is not known to be monotone, so the first flipping
/// cell of a uniform grid is located before bisecting inside it.
inline std::optional<double> min_flip_magnitude(const UserParams& u, const WorldParams& world, int delta,
                                                InterventionKind k, const InterventionProfile& profile,
                                                const EffectivenessOptions& opt = {}) {
  if (k == InterventionKind::NoOp) throw std::invalid_argument("min effectiveness is undefined for NoOp");
  if (opt.resolution < 1000) throw std::invalid_argument("resolution must be at least 1000");
  const double cap = max_delta(u, k, profile);
  const double d = world.d_world;
  if (detail::flips(u, d, delta, k, 0.0, profile.d_floor)) return 0.0;
  if (cap <= 0.0) return std::nullopt;

  double lo = 0.0;
  double hi = -1.0;
  for (int i = 1; i <= opt.resolution; ++i) {
    const double m = (i == opt.resolution) ? cap : cap * static_cast<double>(i) / opt.resolution;
    if (detail::flips(u, d, delta, k, m, profile.d_floor)) {
      hi = m;
      break;
    }
    lo = m;
  }
  if (hi < 0.0) return std::nullopt;
  while (hi - lo > opt.tolerance) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (detail::flips(u, d, delta, k, mid, profile.d_floor)) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

/// Minimum effectiveness as a percentage of the feasible cap.
inline std::optional<double> min_effectiveness(const UserParams& u, const WorldParams& world, int delta,
                                               InterventionKind k, const InterventionProfile& profile,
                                               const EffectivenessOptions& opt = {}) {
  const auto m = min_flip_magnitude(u, world, delta, k, profile, opt);
  if (!m) return std::nullopt;
  if (*m == 0.0) return 0.0;
  return 100.0 * *m / max_delta(u, k, profile);
}

}  // namespace nudge
