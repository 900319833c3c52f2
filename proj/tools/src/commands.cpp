#include "nudge_cli/commands.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "nudge/errors.hpp"
#include "nudge/report.hpp"

namespace nudge::cli {

namespace {

using nlohmann::ordered_json;

template <class Writer>
std::string render(Writer&& w) {
  std::ostringstream os;
  w(os);
  return os.str();
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

// CSV table -> array of records. Fields that parse completely as numbers
// become JSON numbers.
ordered_json csv_to_json(const std::string& csv) {
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  const std::vector<std::string> header = split(line, ',');
  ordered_json rows = ordered_json::array();
  while (std::getline(in, line)) {
    const std::vector<std::string> fields = split(line, ',');
    ordered_json row = ordered_json::object();
    for (std::size_t i = 0; i < header.size() && i < fields.size(); ++i) {
      const std::string& f = fields[i];
      char* end = nullptr;
      const long long n = std::strtoll(f.c_str(), &end, 10);
      if (!f.empty() && end == f.c_str() + f.size()) {
        row[header[i]] = n;
        continue;
      }
      const double v = std::strtod(f.c_str(), &end);
      if (!f.empty() && end == f.c_str() + f.size()) {
        row[header[i]] = v;
      } else {
        row[header[i]] = f;
      }
    }
    rows.push_back(row);
  }
  return rows;
}

/// Add `name`.csv and, when requested, the JSON rendering of the same table.
void add_table(CommandResult& r, const RunConfig& cfg, const std::string& name, const std::string& csv) {
  if (cfg.wants("csv")) r.files.push_back({name + ".csv", csv});
  if (cfg.wants("json")) r.files.push_back({name + ".json", csv_to_json(csv).dump(2) + "\n"});
}

void add_svg(CommandResult& r, const RunConfig& cfg, const std::string& name, const std::string& svg) {
  if (cfg.wants("svg")) r.files.push_back({name + ".svg", svg});
}

CommandResult solve_user(const RunConfig& cfg) {
  CommandResult r;
  const std::string table = render([&](std::ostream& os) { write_user_table_csv(os, cfg.user, cfg.world); });
  add_table(r, cfg, "user_table", table);
  ordered_json acting = ordered_json::array();
  for (int delta = 1; delta < cfg.world.n_states; ++delta) {
    if (user_policy(cfg.user, cfg.world.d_world, delta) == 1) acting.push_back(delta);
  }
  r.verdicts = {{"acting_distances", acting}};
  r.summary = table;
  return r;
}

CommandResult plan_command(const RunConfig& cfg) {
  CommandResult r;
  const ExperimentConfig exp = cfg.experiment();
  PolicyMaps maps{exp, {plan_user(exp, cfg.user, cfg.user_preset())}};
  add_table(r, cfg, "policy_map", render([&](std::ostream& os) { write_policy_map_csv(os, maps); }));
  add_table(r, cfg, "windows", render([&](std::ostream& os) { write_windows_csv(os, maps); }));
  add_svg(r, cfg, "policy_map", render([&](std::ostream& os) { write_policy_map_svg(os, maps); }));
  r.verdicts = verdicts_json(maps);
  r.pattern_failed = !maps.all_patterns_hold();
  const PresetPolicy& pp = maps.presets.front();
  r.summary = std::string(preset_name(pp.preset)) + ": " + pp.windows.describe();
  if (pp.preset != UserPreset::Default) r.summary += " [" + std::string(verdict_name(pp.verdict.verdict)) + "]";
  r.summary += "\n";
  return r;
}

CommandResult min_effect(const RunConfig& cfg) {
  CommandResult r;
  const ExperimentConfig exp = cfg.experiment();
  const UserPreset p = cfg.user_preset();
  EffectivenessCurves curves{exp, effectiveness_curve(exp, p, cfg.user)};
  add_table(r, cfg, "effectiveness", render([&](std::ostream& os) { write_effectiveness_csv(os, curves); }));
  add_svg(r, cfg, "effectiveness", render([&](std::ostream& os) { write_effectiveness_svg(os, curves, p); }));
  ordered_json edges = ordered_json::object();
  for (InterventionKind k : kEffectKinds) {
    const auto w = far_edge_of_window(exp, cfg.user, k);
    edges[std::string(kind_name(k))] = w ? ordered_json(*w) : ordered_json(nullptr);
  }
  r.verdicts = {{"far_edge", edges}};
  r.summary = "effectiveness for " + std::to_string(curves.points.size()) + " (state, kind) pairs\n";
  return r;
}

CommandResult simulate(const RunConfig& cfg) {
  CommandResult r;
  const ExperimentConfig exp = cfg.experiment();
  const InterventionProfile profile = exp.profile_for(cfg.user);
  const AppPolicy policy = cfg.simulate.policy == "planned"
                               ? plan(cfg.user, cfg.world, profile, exp.planner)
                               : AppPolicy::constant(cfg.user, cfg.world, profile, parse_kind(cfg.simulate.policy));
  const RolloutOptions opt{cfg.simulate.horizon, cfg.simulate.start_w};
  const auto seeds = episode_seeds(cfg.seed, static_cast<std::size_t>(cfg.simulate.episodes));
  const BatchStats stats = batch_stats(cfg.user, cfg.world, policy, profile, seeds, opt);
  add_table(r, cfg, "batch_stats", render([&](std::ostream& os) { write_batch_stats_csv(os, stats); }));
  add_table(r, cfg, "trajectory", render([&](std::ostream& os) {
              os << "step,w,intervention,a_intended,a_observed,r_app\n";
              write_trajectory(os, rollout(cfg.user, cfg.world, policy, profile, seeds.front(), opt));
            }));
  r.verdicts = {{"episodes", cfg.simulate.episodes},
                {"goal_rate", stats.goal_rate.mean},
                {"disengage_rate", stats.disengage_rate.mean},
                {"horizon_rate", stats.horizon_rate.mean}};
  r.summary = "goal rate " + fmt_num(stats.goal_rate.mean) + " +/- " + fmt_num(stats.goal_rate.std_error) +
              " over " + std::to_string(cfg.simulate.episodes) + " episodes\n";
  return r;
}

SensitivityReport sensitivity_report(const RunConfig& cfg) {
  SensitivityRanges ranges;
  ranges.p_world = cfg.world.p_world;
  ranges.goal_reward = cfg.user.goal_reward;
  return run_sensitivity(cfg.experiment(), cfg.trials, cfg.seed, ranges);
}

std::string sensitivity_summary(const SensitivityReport& rep) {
  return "sensitivity: " + std::to_string(rep.count(Verdict::Pass)) + " pass, " +
         std::to_string(rep.count(Verdict::Fail)) + " fail, " + std::to_string(rep.count(Verdict::Vacuous)) +
         " vacuous\n";
}

CommandResult sensitivity(const RunConfig& cfg) {
  CommandResult r;
  const SensitivityReport rep = sensitivity_report(cfg);
  add_table(r, cfg, "sensitivity", render([&](std::ostream& os) { write_sensitivity_csv(os, rep); }));
  r.verdicts = verdicts_json(rep);
  r.pattern_failed = rep.count(Verdict::Fail) > 0;
  r.summary = sensitivity_summary(rep);
  return r;
}

CommandResult reproduce_figures(const RunConfig& cfg) {
  CommandResult r;
  const ExperimentConfig exp = cfg.experiment();
  const PolicyMaps maps = reproduce_policy_maps(exp);
  const EffectivenessCurves curves = reproduce_effectiveness_curves(exp);
  const SensitivityReport rep = sensitivity_report(cfg);
  add_table(r, cfg, "policy_map", render([&](std::ostream& os) { write_policy_map_csv(os, maps); }));
  add_table(r, cfg, "windows", render([&](std::ostream& os) { write_windows_csv(os, maps); }));
  add_table(r, cfg, "effectiveness", render([&](std::ostream& os) { write_effectiveness_csv(os, curves); }));
  add_table(r, cfg, "sensitivity", render([&](std::ostream& os) { write_sensitivity_csv(os, rep); }));
  add_svg(r, cfg, "policy_map", render([&](std::ostream& os) { write_policy_map_svg(os, maps); }));
  for (UserPreset p : kImpairedPresets) {
    add_svg(r, cfg, "effectiveness_" + std::string(preset_name(p)),
            render([&](std::ostream& os) { write_effectiveness_svg(os, curves, p); }));
  }
  r.verdicts = {{"policy_maps", verdicts_json(maps)}, {"sensitivity", verdicts_json(rep)}};
  r.pattern_failed = !maps.all_patterns_hold() || rep.count(Verdict::Fail) > 0;
  for (const auto& pp : maps.presets) {
    r.summary += std::string(preset_name(pp.preset)) + ": " + pp.windows.describe();
    if (pp.preset != UserPreset::Default) r.summary += " [" + std::string(verdict_name(pp.verdict.verdict)) + "]";
    r.summary += "\n";
  }
  r.summary += sensitivity_summary(rep);
  return r;
}

}  // namespace

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names{"solve-user", "plan", "min-effect",
                                              "simulate", "sensitivity", "reproduce-figures"};
  return names;
}

CommandResult run_command(const std::string& command, const RunConfig& cfg) {
  if (command == "solve-user") return solve_user(cfg);
  if (command == "plan") return plan_command(cfg);
  if (command == "min-effect") return min_effect(cfg);
  if (command == "simulate") return simulate(cfg);
  if (command == "sensitivity") return sensitivity(cfg);
  if (command == "reproduce-figures") return reproduce_figures(cfg);
  throw std::invalid_argument("unknown command: " + command);
}

ordered_json make_manifest(const std::string& command, const RunConfig& cfg, const CommandResult& result) {
  const ordered_json config = config_to_json(cfg);
  ordered_json outputs = ordered_json::array();
  for (const auto& f : result.files) outputs.push_back(f.name);
  ordered_json m;
  m["manifest_version"] = kManifestVersion;
  m["toolkit_version"] = kToolkitVersion;
  m["command"] = command;
  m["config_hash"] = hex64(fnv1a64(config.dump()));
  m["seed"] = cfg.seed;
  m["config"] = config;
  m["outputs"] = outputs;
  m["verdicts"] = result.verdicts;
  return m;
}

int execute(const std::string& command, const ParsedConfig& parsed, std::ostream& out, std::ostream& err) {
  const RunConfig& cfg = parsed.config;
  CommandResult result;
  try {
    validate_config(cfg, parsed.locations);
    result = run_command(command, cfg);
  } catch (const ConvergenceError& e) {
    err << "error: " << e.what() << " (residual " << e.residual() << ")\n";
    return kExitNumerical;
  } catch (const SingularityError& e) {
    err << "error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  }

  namespace fs = std::filesystem;
  const fs::path dir(cfg.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) {
    err << "error: cannot create output directory " << dir << ": " << ec.message() << "\n";
    return kExitValidation;
  }
  auto write = [&](const std::string& name, const std::string& content) {
    std::ofstream f(dir / name, std::ios::binary);
    f << content;
    if (!f) throw std::runtime_error("cannot write " + (dir / name).string());
  };
  try {
    for (const auto& f : result.files) write(f.name, f.content);
    write("manifest.json", make_manifest(command, cfg, result).dump(2) + "\n");
  } catch (const std::runtime_error& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  }
  out << result.summary;
  if (result.pattern_failed) {
    err << "window pattern check failed; see " << (dir / "manifest.json").string() << "\n";
    return kExitPattern;
  }
  return kExitOk;
}

}  // namespace nudge::cli
