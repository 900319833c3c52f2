#include "nudge_cli/run_config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "nudge/report.hpp"

namespace nudge::cli {

namespace {

std::string position(const std::string& source, const YAML::Mark& m) {
  if (m.is_null()) return source;
  return source + ":" + std::to_string(m.line + 1) + ":" + std::to_string(m.column + 1);
}

class Reader {
 public:
  Reader(std::string source, Locations& locs) : source_(std::move(source)), locs_(locs) {}

  [[noreturn]] void fail(const YAML::Node& n, const std::string& field, const std::string& msg) const {
    throw ConfigError(position(source_, n.Mark()), field, msg);
  }

  void expect_map(const YAML::Node& n, const std::string& field) const {
    if (!n.IsMap()) fail(n, field, "expected a mapping");
  }

  /// Reject keys outside `allowed`.
  void check_keys(const YAML::Node& n, const std::string& prefix, std::initializer_list<const char*> allowed) const {
    for (const auto& kv : n) {
      const std::string key = kv.first.as<std::string>();
      const bool ok = std::any_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; });
      if (!ok) fail(kv.first, join(prefix, key), "unknown field");
    }
  }

  template <class T>
  T scalar(const YAML::Node& n, const std::string& field, const char* what) {
    if (!n.IsScalar()) fail(n, field, std::string("expected ") + what);
    try {
      T v = n.as<T>();
      locs_[field] = position(source_, n.Mark());
      return v;
    } catch (const YAML::BadConversion&) {
      fail(n, field, std::string("expected ") + what + ", got '" + n.Scalar() + "'");
    }
  }

  double number(const YAML::Node& n, const std::string& field) {
    const double v = scalar<double>(n, field, "a number");
    if (!std::isfinite(v)) fail(n, field, "must be finite");
    return v;
  }
  int integer(const YAML::Node& n, const std::string& field) { return scalar<int>(n, field, "an integer"); }
  std::string string(const YAML::Node& n, const std::string& field) {
    return scalar<std::string>(n, field, "a string");
  }

  static std::string join(const std::string& prefix, const std::string& key) {
    return prefix.empty() ? key : prefix + "." + key;
  }

 private:
  std::string source_;
  Locations& locs_;
};

void read_world(Reader& r, const YAML::Node& n, WorldParams& w) {
  r.expect_map(n, "world");
  r.check_keys(n, "world", {"n_states", "p_world", "d_world", "sigma2"});
  if (n["n_states"]) w.n_states = r.integer(n["n_states"], "world.n_states");
  if (n["p_world"]) w.p_world = r.number(n["p_world"], "world.p_world");
  if (n["d_world"]) w.d_world = r.number(n["d_world"], "world.d_world");
  if (n["sigma2"]) w.sigma2 = r.number(n["sigma2"], "world.sigma2");
}

void read_user(Reader& r, const YAML::Node& n, RunConfig& cfg) {
  if (n.IsScalar()) {
    cfg.preset = r.string(n, "user");
  } else {
    r.expect_map(n, "user");
    r.check_keys(n, "user", {"preset", "burden", "goal_reward", "disengage_reward", "p_user", "gamma_user"});
    if (n["preset"]) cfg.preset = r.string(n["preset"], "user.preset");
  }
  try {
    cfg.user = preset(parse_preset(cfg.preset));
  } catch (const std::invalid_argument&) {
    r.fail(n.IsMap() ? n["preset"] : n, "user.preset", "unknown preset '" + cfg.preset + "'");
  }
  if (!n.IsMap()) return;
  if (n["burden"]) cfg.user.burden = r.number(n["burden"], "user.burden");
  if (n["goal_reward"]) cfg.user.goal_reward = r.number(n["goal_reward"], "user.goal_reward");
  if (n["disengage_reward"]) cfg.user.disengage_reward = r.number(n["disengage_reward"], "user.disengage_reward");
  if (n["p_user"]) cfg.user.p_user = r.number(n["p_user"], "user.p_user");
  if (n["gamma_user"]) cfg.user.gamma_user = r.number(n["gamma_user"], "user.gamma_user");
}

void read_profile(Reader& r, const YAML::Node& n, ProfileConfig& p) {
  if (n.IsScalar()) {
    const std::string mode = r.string(n, "profile");
    if (mode != "maximal") r.fail(n, "profile", "expected 'maximal' or a mapping, got '" + mode + "'");
    p = ProfileConfig{};
    return;
  }
  r.expect_map(n, "profile");
  r.check_keys(n, "profile", {"mode", "delta_b", "delta_d", "delta_gamma", "delta_p", "d_floor", "epsilon_b"});
  const bool has_delta = n["delta_b"] || n["delta_d"] || n["delta_gamma"] || n["delta_p"];
  p.maximal = !has_delta;
  if (n["mode"]) {
    const std::string mode = r.string(n["mode"], "profile.mode");
    if (mode != "maximal" && mode != "explicit") r.fail(n["mode"], "profile.mode", "expected maximal or explicit");
    if (mode == "maximal" && has_delta) r.fail(n["mode"], "profile.mode", "a maximal profile takes no deltas");
    p.maximal = mode == "maximal";
  }
  if (n["delta_b"]) p.delta_b = r.number(n["delta_b"], "profile.delta_b");
  if (n["delta_d"]) p.delta_d = r.number(n["delta_d"], "profile.delta_d");
  if (n["delta_gamma"]) p.delta_gamma = r.number(n["delta_gamma"], "profile.delta_gamma");
  if (n["delta_p"]) p.delta_p = r.number(n["delta_p"], "profile.delta_p");
  if (n["d_floor"]) p.d_floor = r.number(n["d_floor"], "profile.d_floor");
  if (n["epsilon_b"]) p.epsilon_b = r.number(n["epsilon_b"], "profile.epsilon_b");
}

void read_output(Reader& r, const YAML::Node& n, RunConfig& cfg) {
  r.expect_map(n, "output");
  r.check_keys(n, "output", {"dir", "formats"});
  if (n["dir"]) cfg.out_dir = r.string(n["dir"], "output.dir");
  if (const YAML::Node f = n["formats"]) {
    cfg.formats.clear();
    if (f.IsSequence()) {
      for (std::size_t i = 0; i < f.size(); ++i) {
        cfg.formats.push_back(r.string(f[i], "output.formats[" + std::to_string(i) + "]"));
      }
    } else {
      cfg.formats.push_back(r.string(f, "output.formats"));
    }
  }
}

void read_simulate(Reader& r, const YAML::Node& n, SimulateConfig& s) {
  r.expect_map(n, "simulate");
  r.check_keys(n, "simulate", {"episodes", "horizon", "start_w", "policy"});
  if (n["episodes"]) s.episodes = r.integer(n["episodes"], "simulate.episodes");
  if (n["horizon"]) s.horizon = r.integer(n["horizon"], "simulate.horizon");
  if (n["start_w"]) s.start_w = r.integer(n["start_w"], "simulate.start_w");
  if (n["policy"]) s.policy = r.string(n["policy"], "simulate.policy");
}

void read_sensitivity(Reader& r, const YAML::Node& n, RunConfig& cfg) {
  r.expect_map(n, "sensitivity");
  r.check_keys(n, "sensitivity", {"trials"});
  if (n["trials"]) cfg.trials = r.integer(n["trials"], "sensitivity.trials");
}

std::string where(const Locations& locs, const std::string& field) {
  const auto it = locs.find(field);
  return it == locs.end() ? std::string() : it->second;
}

}  // namespace

ExperimentConfig RunConfig::experiment() const {
  ExperimentConfig e;
  e.world = world;
  e.base = user;
  e.planner.gamma_app = gamma_app;
  if (profile.maximal) {
    e.d_floor = profile.d_floor;
    e.epsilon_b = profile.epsilon_b;
  } else {
    InterventionProfile p;
    p.delta_b = profile.delta_b;
    p.delta_d = profile.delta_d;
    p.delta_gamma = profile.delta_gamma;
    p.delta_p = profile.delta_p;
    p.d_floor = profile.d_floor.value_or(InterventionProfile::default_d_floor(user));
    p.epsilon_b = profile.epsilon_b.value_or(InterventionProfile::default_epsilon_b(user));
    e.profile = p;
  }
  return e;
}

bool RunConfig::wants(const std::string& format) const {
  return std::find(formats.begin(), formats.end(), format) != formats.end();
}

ParsedConfig parse_config(const std::string& text, const std::string& source) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError(position(source, e.mark), "", "malformed YAML: " + e.msg);
  }
  ParsedConfig out;
  Reader r(source, out.locations);
  if (root.IsNull()) return out;
  r.expect_map(root, "");
  if (root["manifest_version"]) {
    const int version = r.integer(root["manifest_version"], "manifest_version");
    if (version != kManifestVersion) {
      r.fail(root["manifest_version"], "manifest_version", "unsupported manifest version " + std::to_string(version));
    }
    root = root["config"];
    if (!root) throw ConfigError(source, "config", "manifest has no config");
    r.expect_map(root, "config");
  }
  r.check_keys(root, "",
               {"world", "user", "profile", "gamma_app", "seed", "output", "simulate", "sensitivity"});
  RunConfig& cfg = out.config;
  if (root["world"]) read_world(r, root["world"], cfg.world);
  if (root["user"]) read_user(r, root["user"], cfg);
  if (root["profile"]) read_profile(r, root["profile"], cfg.profile);
  if (root["gamma_app"]) cfg.gamma_app = r.number(root["gamma_app"], "gamma_app");
  if (root["seed"]) cfg.seed = r.scalar<std::uint64_t>(root["seed"], "seed", "a non-negative integer");
  if (root["output"]) read_output(r, root["output"], cfg);
  if (root["simulate"]) read_simulate(r, root["simulate"], cfg.simulate);
  if (root["sensitivity"]) read_sensitivity(r, root["sensitivity"], cfg);
  return out;
}

ParsedConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path, "", "cannot open config file");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path);
}

void apply_overrides(ParsedConfig& parsed, const Overrides& o) {
  RunConfig& cfg = parsed.config;
  Locations& locs = parsed.locations;
  auto take = [&](const auto& opt, auto& target, std::initializer_list<const char*> fields) {
    if (!opt) return;
    target = *opt;
    for (const char* f : fields) locs.erase(f);
  };
  take(o.seed, cfg.seed, {"seed"});
  take(o.out_dir, cfg.out_dir, {"output.dir"});
  if (!o.formats.empty()) cfg.formats = o.formats;
  if (o.preset) {
    cfg.preset = *o.preset;
    try {
      cfg.user = preset(parse_preset(*o.preset));
    } catch (const std::invalid_argument&) {
      throw ConfigError("--preset", "user.preset", "unknown preset '" + *o.preset + "'");
    }
    for (const char* f : {"user", "user.preset", "user.burden", "user.goal_reward", "user.disengage_reward",
                          "user.p_user", "user.gamma_user"}) {
      locs.erase(f);
    }
  }
  take(o.n_states, cfg.world.n_states, {"world.n_states"});
  take(o.sigma2, cfg.world.sigma2, {"world.sigma2"});
  take(o.gamma_app, cfg.gamma_app, {"gamma_app"});
  take(o.episodes, cfg.simulate.episodes, {"simulate.episodes"});
  take(o.horizon, cfg.simulate.horizon, {"simulate.horizon"});
  take(o.policy, cfg.simulate.policy, {"simulate.policy"});
  take(o.trials, cfg.trials, {"sensitivity.trials"});
}

void validate_config(const RunConfig& cfg, const Locations& locs) {
  auto check = [&](bool ok, const std::string& field, const std::string& msg) {
    if (!ok) throw ConfigError(where(locs, field), field, msg);
  };
  const WorldParams& w = cfg.world;
  check(w.n_states >= 2, "world.n_states", "must be at least 2");
  check(w.p_world > 0.0 && w.p_world <= 1.0, "world.p_world", "must lie in (0, 1]");
  check(w.d_world > 0.0 && w.d_world <= 1.0, "world.d_world", "must lie in (0, 1]");
  check(w.sigma2 >= 0.0 && w.sigma2 <= 1.0, "world.sigma2", "must lie in [0, 1]");
  try {
    validate(w);
  } catch (const std::invalid_argument& e) {
    throw ConfigError("", "world", e.what());
  }

  const UserParams& u = cfg.user;
  check(is_probability(u.p_user), "user.p_user", "must lie in [0, 1]");
  check(is_probability(u.gamma_user), "user.gamma_user", "must lie in [0, 1]");
  check(!(u.gamma_user == 1.0 && u.p_user == 0.0), "user.gamma_user",
        "gamma_user = 1 with p_user = 0 makes the value of acting diverge");
  try {
    validate(u);
  } catch (const std::exception& e) {
    throw ConfigError("", "user", e.what());
  }

  const ProfileConfig& p = cfg.profile;
  if (p.d_floor) check(std::isfinite(*p.d_floor), "profile.d_floor", "must be finite");
  if (p.epsilon_b) check(*p.epsilon_b > 0.0, "profile.epsilon_b", "must be positive");
  if (!p.maximal) {
    check(p.delta_b >= 0.0, "profile.delta_b", "must be non-negative");
    check(p.delta_d >= 0.0, "profile.delta_d", "must be non-negative");
    check(p.delta_gamma >= 0.0, "profile.delta_gamma", "must be non-negative");
    check(p.delta_p >= 0.0, "profile.delta_p", "must be non-negative");
  }
  try {
    validate(cfg.experiment().profile_for(u));
  } catch (const std::invalid_argument& e) {
    throw ConfigError("", "profile", e.what());
  }

  check(cfg.gamma_app >= 0.0 && cfg.gamma_app < 1.0, "gamma_app", "must lie in [0, 1)");
  check(!cfg.out_dir.empty(), "output.dir", "must not be empty");
  check(!cfg.formats.empty(), "output.formats", "needs at least one format");
  for (const std::string& f : cfg.formats) {
    check(f == "csv" || f == "json" || f == "svg", "output.formats", "unknown format '" + f + "'");
  }

  const SimulateConfig& s = cfg.simulate;
  check(s.episodes >= 1, "simulate.episodes", "must be at least 1");
  check(s.horizon >= 1, "simulate.horizon", "must be at least 1");
  check(s.start_w >= 1 && s.start_w < w.n_states, "simulate.start_w", "must lie in 1 .. n_states - 1");
  if (s.policy != "planned") {
    try {
      parse_kind(s.policy);
    } catch (const std::invalid_argument&) {
      check(false, "simulate.policy", "expected planned, noop, B, D, gamma or p");
    }
  }
  check(cfg.trials >= 1, "sensitivity.trials", "must be at least 1");
}

nlohmann::ordered_json config_to_json(const RunConfig& cfg) {
  using nlohmann::ordered_json;
  ordered_json user = {{"preset", cfg.preset}};
  user["burden"] = cfg.user.burden;
  user["goal_reward"] = cfg.user.goal_reward;
  user["disengage_reward"] = cfg.user.disengage_reward;
  user["p_user"] = cfg.user.p_user;
  user["gamma_user"] = cfg.user.gamma_user;

  ordered_json profile = {{"mode", cfg.profile.maximal ? "maximal" : "explicit"}};
  if (!cfg.profile.maximal) {
    profile["delta_b"] = cfg.profile.delta_b;
    profile["delta_d"] = cfg.profile.delta_d;
    profile["delta_gamma"] = cfg.profile.delta_gamma;
    profile["delta_p"] = cfg.profile.delta_p;
  }
  if (cfg.profile.d_floor) profile["d_floor"] = *cfg.profile.d_floor;
  if (cfg.profile.epsilon_b) profile["epsilon_b"] = *cfg.profile.epsilon_b;

  ordered_json out;
  out["world"] = {{"n_states", cfg.world.n_states},
                  {"p_world", cfg.world.p_world},
                  {"d_world", cfg.world.d_world},
                  {"sigma2", cfg.world.sigma2}};
  out["user"] = user;
  out["profile"] = profile;
  out["gamma_app"] = cfg.gamma_app;
  out["seed"] = cfg.seed;
  out["output"] = {{"dir", cfg.out_dir}, {"formats", cfg.formats}};
  out["simulate"] = {{"episodes", cfg.simulate.episodes},
                     {"horizon", cfg.simulate.horizon},
                     {"start_w", cfg.simulate.start_w},
                     {"policy", cfg.simulate.policy}};
  out["sensitivity"] = {{"trials", cfg.trials}};
  return out;
}

}  // namespace nudge::cli
