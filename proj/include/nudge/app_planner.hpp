#pragma once

// The app agent's planning problem. The app observes progress w, picks one of
// the five interventions, and is rewarded 2*a_observed - 1. It experiences the
// world's true dynamics (p_world, d_world, execution noise sigma2), while the
// user's intended action comes from the user's own beliefs.

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "nudge/interventions.hpp"
#include "nudge/tabular_mdp.hpp"
#include "nudge/user_model.hpp"

namespace nudge {

struct PlannerOptions {
  double gamma_app = 0.99;
  double tolerance = 1e-12;
  int max_iter = 1'000'000;
};

/// Admissible kinds (those that make the user act) at every progress state.
inline std::vector<KindSet> admissible_sets(const UserParams& u, const WorldParams& world,
                                            const InterventionProfile& profile) {
  std::vector<KindSet> out;
  out.reserve(static_cast<std::size_t>(world.progress_count()));
  for (int w = 1; w < world.n_states; ++w) {
    KindSet set;
    for (InterventionKind k : kAllKinds) {
      if (induced_action(u, world, world.n_states - w, k, profile) == 1) set.insert(k);
    }
    out.push_back(set);
  }
  return out;
}

/// App MDP over {progress states, Goal, Disengaged} with one action per
/// intervention kind, in kAllKinds order.
inline TabularMDP build_app_mdp(const UserParams& u, const WorldParams& world, const InterventionProfile& profile,
                                double gamma_app) {
  validate(u);
  validate(world);
  validate(profile);
  const ChainLayout L{world.n_states};
  TabularMDP mdp(L.size(), static_cast<int>(kAllKinds.size()), gamma_app);
  const std::vector<KindSet> admissible = admissible_sets(u, world, profile);
  for (int w = 1; w < world.n_states; ++w) {
    const int s = L.progress(w);
    const int right = (w + 1 == world.n_states) ? L.goal() : L.progress(w + 1);
    for (InterventionKind k : kAllKinds) {
      const int a = kind_index(k);
      const double intended = admissible[static_cast<std::size_t>(w - 1)].contains(k) ? 1.0 : 0.0;
      const double executed = (1.0 - world.sigma2) * intended;
      mdp.r(s, a) = 2.0 * executed - 1.0;
      mdp.p(s, a, right) += executed * world.p_world;
      mdp.p(s, a, L.disengaged()) += (1.0 - executed) * world.d_world;
      mdp.p(s, a, s) += executed * (1.0 - world.p_world) + (1.0 - executed) * (1.0 - world.d_world);
    }
  }
  mdp.make_absorbing(L.goal());
  mdp.make_absorbing(L.disengaged());
  return mdp;
}

struct PolicyEntry {
  KindSet admissible;
  InterventionKind chosen = InterventionKind::NoOp;
  bool default_act = false;
  double value = 0.0;
};

/// Per-progress-state admissible sets and the value-maximising choice.
/// Goal and Disengaged admit nothing.
class AppPolicy {
 public:
  AppPolicy() = default;
  AppPolicy(int n_states, std::vector<PolicyEntry> entries) : n_states_(n_states), entries_(std::move(entries)) {
    if (entries_.size() != static_cast<std::size_t>(n_states - 1)) {
      throw std::invalid_argument("policy needs one entry per progress state");
    }
  }

  int n_states() const noexcept { return n_states_; }
  const std::vector<PolicyEntry>& entries() const noexcept { return entries_; }
  const PolicyEntry& at(int w) const { return entries_.at(static_cast<std::size_t>(w - 1)); }

  InterventionKind chosen(const UserState& s) const {
    return s.is_progress() ? at(s.w()).chosen : InterventionKind::NoOp;
  }
  KindSet admissible(const UserState& s) const { return s.is_progress() ? at(s.w()).admissible : KindSet{}; }

  /// Action index per state of the app MDP (absorbing states use NoOp).
  std::vector<int> as_mdp_policy() const {
    std::vector<int> out(static_cast<std::size_t>(n_states_ + 1), kind_index(InterventionKind::NoOp));
    for (std::size_t i = 0; i < entries_.size(); ++i) out[i] = kind_index(entries_[i].chosen);
    return out;
  }

  /// A fixed intervention at every progress state; admissible sets are
  /// recomputed so the policy stays self-consistent.
  static AppPolicy constant(const UserParams& u, const WorldParams& world, const InterventionProfile& profile,
                            InterventionKind k) {
    std::vector<PolicyEntry> entries;
    for (KindSet set : admissible_sets(u, world, profile)) {
      entries.push_back({set, k, set.contains(InterventionKind::NoOp), 0.0});
    }
    return AppPolicy(world.n_states, std::move(entries));
  }

 private:
  int n_states_ = 0;
  std::vector<PolicyEntry> entries_;
};

inline AppPolicy plan(const UserParams& u, const WorldParams& world, const InterventionProfile& profile,
                      const PlannerOptions& opt = {}) {
  const TabularMDP mdp = build_app_mdp(u, world, profile, opt.gamma_app);
  // greedy_action keeps the lowest index among exact ties: NoOp, B, D, gamma, p.
  const ValueIterationResult vi = value_iteration(mdp, opt.tolerance, opt.max_iter);
  const std::vector<KindSet> admissible = admissible_sets(u, world, profile);
  std::vector<PolicyEntry> entries;
  for (int w = 1; w < world.n_states; ++w) {
    const auto i = static_cast<std::size_t>(w - 1);
    PolicyEntry e;
    e.admissible = admissible[i];
    e.chosen = static_cast<InterventionKind>(vi.policy[i]);
    e.default_act = admissible[i].contains(InterventionKind::NoOp);
    e.value = vi.values[i];
    entries.push_back(e);
  }
  return AppPolicy(world.n_states, std::move(entries));
}

// ---------------------------------------------------------------------------
// Window decomposition

enum class WindowLabel { Window1, Window2, Window3, DefaultAct, Hopeless };

inline std::string_view label_name(WindowLabel l) noexcept {
  switch (l) {
    case WindowLabel::Window1: return "window1";
    case WindowLabel::Window2: return "window2";
    case WindowLabel::Window3: return "window3";
    case WindowLabel::DefaultAct: return "default_act";
    case WindowLabel::Hopeless: return "hopeless";
  }
  return "?";
}

struct StateClass {
  WindowLabel label;
  // For Window2, the single bounded kind (gamma or p) that works.
  std::optional<InterventionKind> bounded;

  friend bool operator==(const StateClass&, const StateClass&) = default;
};

/// Label of a single admissible set.
///  - NoOp admissible: DefaultAct
///  - nothing admissible: Hopeless
///  - only B/D: Window1
///  - exactly one of gamma/p: Window2 tagged with that kind
///  - both gamma and p: Window3
inline StateClass classify(KindSet admissible) {
  using K = InterventionKind;
  if (admissible.contains(K::NoOp)) return {WindowLabel::DefaultAct, std::nullopt};
  if (admissible.empty()) return {WindowLabel::Hopeless, std::nullopt};
  const bool g = admissible.contains(K::OnGamma);
  const bool p = admissible.contains(K::OnP);
  if (g && p) return {WindowLabel::Window3, std::nullopt};
  if (g) return {WindowLabel::Window2, K::OnGamma};
  if (p) return {WindowLabel::Window2, K::OnP};
  return {WindowLabel::Window1, std::nullopt};
}

struct Window {
  int w_first = 0;  // farthest state of the run
  int w_last = 0;   // nearest state of the run
  WindowLabel label = WindowLabel::Hopeless;
  std::optional<InterventionKind> bounded;
  KindSet signature;  // union of admissible sets over the run
};

struct WindowDecomposition {
  // Ordered far to near (increasing w).
  std::vector<Window> windows;

  std::string describe() const {
    std::string s;
    for (const auto& win : windows) {
      if (!s.empty()) s += " > ";
      s += std::string(label_name(win.label));
      if (win.bounded) s += "(" + std::string(kind_name(*win.bounded)) + ")";
      s += "[" + std::to_string(win.w_first) + ".." + std::to_string(win.w_last) + "]";
    }
    return s;
  }
};

inline WindowDecomposition extract_windows(const AppPolicy& policy) {
  if (policy.entries().size() < 2) throw std::invalid_argument("window extraction needs at least two progress states");
  WindowDecomposition out;
  for (int w = 1; w < policy.n_states(); ++w) {
    const KindSet set = policy.at(w).admissible;
    const StateClass c = classify(set);
    if (!out.windows.empty()) {
      Window& last = out.windows.back();
      if (last.label == c.label && last.bounded == c.bounded) {
        last.w_last = w;
        last.signature = last.signature | set;
        continue;
      }
    }
    out.windows.push_back({w, w, c.label, c.bounded, set});
  }
  return out;
}

}  // namespace nudge
