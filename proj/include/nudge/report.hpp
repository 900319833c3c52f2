#pragma once

// Tabular output for the experiment pipelines: CSV tables, a JSON manifest
// and optional SVG sketches. All writers are deterministic for a given input.

#include <algorithm>
#include <array>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>

#include <json.hpp>

#include "nudge/experiments.hpp"
#include "nudge/simulator.hpp"

namespace nudge {

inline constexpr std::string_view kToolkitVersion = "0.3.0";
inline constexpr int kManifestVersion = 1;

// 12 significant digits for derived tables.
inline std::string fmt_num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", x == 0.0 ? 0.0 : x);
  return buf;
}

inline std::string fmt_opt(const std::optional<double>& x) { return x ? fmt_num(*x) : "NA"; }

/// FNV-1a, used to fingerprint the resolved configuration.
inline std::uint64_t fnv1a64(std::string_view s) noexcept {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

inline void write_policy_map_csv(std::ostream& os, const PolicyMaps& maps) {
  os << "preset,state,delta,admissible,chosen,default_act,window,bounded_kind,app_value\n";
  for (const auto& pp : maps.presets) {
    const int n = pp.policy.n_states();
    for (int w = 1; w < n; ++w) {
      const PolicyEntry& e = pp.policy.at(w);
      const StateClass c = classify(e.admissible);
      os << preset_name(pp.preset) << ',' << w << ',' << n - w << ',' << e.admissible.to_string() << ','
         << kind_name(e.chosen) << ',' << (e.default_act ? 1 : 0) << ',' << label_name(c.label) << ','
         << (c.bounded ? kind_name(*c.bounded) : "-") << ',' << fmt_num(e.value) << '\n';
    }
    os << preset_name(pp.preset) << ",goal,0,-,noop,0,absorbing,-,0\n";
    os << preset_name(pp.preset) << ",disengaged,NA,-,noop,0,absorbing,-,0\n";
  }
}

inline void write_windows_csv(std::ostream& os, const PolicyMaps& maps) {
  os << "preset,w_first,w_last,window,bounded_kind,signature,verdict\n";
  for (const auto& pp : maps.presets) {
    for (const auto& win : pp.windows.windows) {
      os << preset_name(pp.preset) << ',' << win.w_first << ',' << win.w_last << ',' << label_name(win.label) << ','
         << (win.bounded ? kind_name(*win.bounded) : "-") << ',' << win.signature.to_string() << ','
         << (pp.preset == UserPreset::Default ? "-" : verdict_name(pp.verdict.verdict)) << '\n';
    }
  }
}

inline void write_effectiveness_csv(std::ostream& os, const EffectivenessCurves& curves) {
  os << "preset,w,delta,kind,min_effectiveness_pct,default_act\n";
  for (const auto& p : curves.points) {
    os << preset_name(p.preset) << ',' << p.w << ',' << p.delta << ',' << kind_name(p.kind) << ','
       << fmt_opt(p.percent) << ',' << (p.default_act ? 1 : 0) << '\n';
  }
}

inline void write_sensitivity_csv(std::ostream& os, const SensitivityReport& rep) {
  os << "trial,gamma,p,B,D,d_world,preset,windows,preset_verdict,trial_verdict\n";
  for (const auto& t : rep.trials) {
    for (const auto& pp : t.presets) {
      os << t.trial << ',' << fmt_num(t.sample.user.gamma_user) << ',' << fmt_num(t.sample.user.p_user) << ','
         << fmt_num(t.sample.user.burden) << ',' << fmt_num(t.sample.user.disengage_reward) << ','
         << fmt_num(t.sample.d_world) << ',' << preset_name(pp.preset) << ',' << pp.windows.describe() << ','
         << verdict_name(pp.verdict.verdict) << ',' << verdict_name(t.verdict) << '\n';
    }
  }
}

inline void write_user_table_csv(std::ostream& os, const UserParams& u, const WorldParams& world) {
  os << "delta,w,v_stay,v_right,v_star,policy\n";
  for (int delta = 1; delta < world.n_states; ++delta) {
    const DecisionComponents c = decision_components(u, world.d_world, delta);
    char buf[160];
    // %.17g: full double precision so the table reproduces the closed form exactly.
    std::snprintf(buf, sizeof buf, "%d,%d,%.17g,%.17g,%.17g,%d\n", delta, world.n_states - delta, c.disengage_term,
                  c.act_value(), std::max(c.act_value(), c.disengage_term),
                  c.act_value() > c.disengage_term ? 1 : 0);
    os << buf;
  }
}

inline void write_batch_stats_csv(std::ostream& os, const BatchStats& s) {
  os << "metric,mean,std_error,ci_low,ci_high\n";
  auto row = [&](std::string_view name, const Estimate& e) {
    os << name << ',' << fmt_num(e.mean) << ',' << fmt_num(e.std_error) << ',' << fmt_num(e.ci_low) << ','
       << fmt_num(e.ci_high) << '\n';
  };
  row("goal_rate", s.goal_rate);
  row("disengage_rate", s.disengage_rate);
  row("horizon_rate", s.horizon_rate);
  row("app_return", s.app_return);
  row("steps", s.steps);
  row("steps_to_goal", s.steps_to_goal);
}

// ---------------------------------------------------------------------------
// JSON

inline nlohmann::ordered_json to_json(const UserParams& u) {
  return {{"burden", u.burden},
          {"goal_reward", u.goal_reward},
          {"disengage_reward", u.disengage_reward},
          {"p_user", u.p_user},
          {"gamma_user", u.gamma_user}};
}

inline nlohmann::ordered_json to_json(const WorldParams& w) {
  return {{"n_states", w.n_states}, {"p_world", w.p_world}, {"d_world", w.d_world}, {"sigma2", w.sigma2}};
}

inline nlohmann::ordered_json to_json(const WindowDecomposition& d) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& w : d.windows) {
    arr.push_back({{"w_first", w.w_first},
                   {"w_last", w.w_last},
                   {"label", label_name(w.label)},
                   {"bounded_kind", w.bounded ? std::string(kind_name(*w.bounded)) : std::string("-")},
                   {"signature", w.signature.to_string()}});
  }
  return arr;
}

inline nlohmann::ordered_json verdicts_json(const PolicyMaps& maps) {
  nlohmann::ordered_json out = nlohmann::ordered_json::object();
  for (const auto& pp : maps.presets) {
    out[std::string(preset_name(pp.preset))] = {
        {"windows", to_json(pp.windows)},
        {"verdict", pp.preset == UserPreset::Default ? "-" : verdict_name(pp.verdict.verdict)},
        {"detail", pp.verdict.reason}};
  }
  return out;
}

inline nlohmann::ordered_json verdicts_json(const SensitivityReport& rep) {
  nlohmann::ordered_json trials = nlohmann::ordered_json::array();
  for (const auto& t : rep.trials) {
    nlohmann::ordered_json presets = nlohmann::ordered_json::object();
    for (const auto& pp : t.presets) {
      presets[std::string(preset_name(pp.preset))] = {{"windows", pp.windows.describe()},
                                                      {"verdict", verdict_name(pp.verdict.verdict)}};
    }
    nlohmann::ordered_json sample = to_json(t.sample.user);
    sample["d_world"] = t.sample.d_world;
    trials.push_back({{"trial", t.trial},
                      {"sample", sample},
                      {"verdict", verdict_name(t.verdict)},
                      {"window3_seen", t.window3_seen},
                      {"presets", presets}});
  }
  return {{"seed", rep.seed},
          {"passed", rep.count(Verdict::Pass)},
          {"failed", rep.count(Verdict::Fail)},
          {"vacuous", rep.count(Verdict::Vacuous)},
          {"trials", trials}};
}

// ---------------------------------------------------------------------------
// SVG sketches (not needed by any pipeline; handy for eyeballing results)

inline std::string_view label_colour(WindowLabel l) {
  switch (l) {
    case WindowLabel::Window1: return "#4c72b0";
    case WindowLabel::Window2: return "#dd8452";
    case WindowLabel::Window3: return "#55a868";
    case WindowLabel::DefaultAct: return "#cccccc";
    case WindowLabel::Hopeless: return "#222222";
  }
  return "#ffffff";
}

inline void write_policy_map_svg(std::ostream& os, const PolicyMaps& maps) {
  const int cell = 56;
  const int left = 130;
  const int n = maps.config.world.n_states;
  const int width = left + cell * (n + 1) + 20;
  const int height = 40 + 50 * static_cast<int>(maps.presets.size());
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
     << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  for (int w = 1; w <= n; ++w) {
    os << "<text x=\"" << left + cell * (w - 1) + cell / 2 << "\" y=\"20\" text-anchor=\"middle\">w=" << w
       << "</text>\n";
  }
  os << "<text x=\"" << left + cell * n + cell / 2 << "\" y=\"20\" text-anchor=\"middle\">dis.</text>\n";
  int y = 30;
  for (const auto& pp : maps.presets) {
    os << "<text x=\"8\" y=\"" << y + 26 << "\">" << preset_name(pp.preset) << "</text>\n";
    for (int w = 1; w < n; ++w) {
      const PolicyEntry& e = pp.policy.at(w);
      const StateClass c = classify(e.admissible);
      const int x = left + cell * (w - 1);
      os << "<rect x=\"" << x << "\" y=\"" << y << "\" width=\"" << cell - 2 << "\" height=\"40\" fill=\""
         << label_colour(c.label) << "\"/>\n";
      os << "<text x=\"" << x + cell / 2 << "\" y=\"" << y + 24 << "\" text-anchor=\"middle\" fill=\"#fff\">"
         << (e.default_act ? std::string("none") : std::string(kind_name(e.chosen))) << "</text>\n";
    }
    os << "<rect x=\"" << left + cell * (n - 1) << "\" y=\"" << y << "\" width=\"" << cell - 2
       << "\" height=\"40\" fill=\"#ffd700\"/>\n";
    os << "<rect x=\"" << left + cell * n << "\" y=\"" << y << "\" width=\"" << cell - 2
       << "\" height=\"40\" fill=\"#222\"/>\n";
    y += 50;
  }
  os << "</svg>\n";
}

inline void write_effectiveness_svg(std::ostream& os, const EffectivenessCurves& curves, UserPreset preset) {
  const int n = curves.config.world.n_states;
  const double w0 = 50, h0 = 20, pw = 420, ph = 240;
  auto sx = [&](int w) { return w0 + pw * (w - 1) / std::max(1, n - 2); };
  auto sy = [&](double pct) { return h0 + ph * (1.0 - pct / 100.0); };
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"560\" height=\"300\" font-family=\"sans-serif\" "
        "font-size=\"11\">\n";
  os << "<rect x=\"" << w0 << "\" y=\"" << h0 << "\" width=\"" << pw << "\" height=\"" << ph
     << "\" fill=\"none\" stroke=\"#888\"/>\n";
  os << "<text x=\"" << w0 << "\" y=\"14\">" << preset_name(preset) << ": minimum effectiveness (%)</text>\n";
  const std::array<std::string_view, 4> colours = {"#4c72b0", "#dd8452", "#55a868", "#c44e52"};
  int ci = 0;
  for (InterventionKind k : kEffectKinds) {
    std::string path;
    for (const auto& p : curves.points) {
      if (p.preset != preset || p.kind != k || !p.percent) continue;
      path += (path.empty() ? "M" : " L") + fmt_num(sx(p.w)) + "," + fmt_num(sy(*p.percent));
    }
    if (!path.empty()) {
      os << "<path d=\"" << path << "\" fill=\"none\" stroke=\"" << colours[static_cast<std::size_t>(ci)]
         << "\" stroke-width=\"2\"/>\n";
    }
    os << "<text x=\"" << w0 + pw + 10 << "\" y=\"" << h0 + 15 * (ci + 1) << "\" fill=\""
       << colours[static_cast<std::size_t>(ci)] << "\">" << kind_name(k) << "</text>\n";
    ++ci;
  }
  os << "</svg>\n";
}

}  // namespace nudge
