// nudge_cli: command-line front end for the planning and simulation toolkit.

#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "nudge/report.hpp"
#include "nudge_cli/commands.hpp"
#include "nudge_cli/run_config.hpp"

namespace {

struct Flags {
  std::string config;
  nudge::cli::Overrides o;
  std::uint64_t seed = 0;
  std::string out;
  std::string preset;
  std::string policy;
  int n_states = 0;
  int episodes = 0;
  int horizon = 0;
  int trials = 0;
  double sigma2 = 0.0;
  double gamma_app = 0.0;
};

void add_common(CLI::App* sub, Flags& f) {
  sub->add_option("--config", f.config, "YAML config file, or a manifest.json from an earlier run");
  sub->add_option("--seed", f.seed, "base random seed");
  sub->add_option("--out", f.out, "output directory");
  sub->add_option("--format", f.o.formats, "output formats (csv, json, svg); repeat or comma-separate")
      ->delimiter(',')
      ->check(CLI::IsMember({"csv", "json", "svg"}));
  sub->add_option("--preset", f.preset, "user preset; replaces the config's user block");
  sub->add_option("--n-states", f.n_states, "number of world states (goal at w = n_states)");
  sub->add_option("--sigma2", f.sigma2, "execution noise");
  sub->add_option("--gamma-app", f.gamma_app, "app discount factor");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Plan, evaluate and simulate app interventions for a goal-directed user model"};
  app.set_version_flag("--version", std::string(nudge::kToolkitVersion));
  app.require_subcommand(1);

  Flags f;
  const std::string help[] = {
      "closed-form user values and policy per distance to goal",
      "app policy and window decomposition for the configured user",
      "minimum intervention effectiveness per state and kind",
      "Monte Carlo rollouts of the planned (or a fixed) intervention policy",
      "randomized sensitivity study of the window patterns",
      "all experiment tables: policy maps, effectiveness curves, sensitivity",
  };
  std::size_t i = 0;
  for (const std::string& name : nudge::cli::command_names()) {
    CLI::App* sub = app.add_subcommand(name, help[i++]);
    add_common(sub, f);
    if (name == "simulate") {
      sub->add_option("--episodes", f.episodes, "number of episodes");
      sub->add_option("--horizon", f.horizon, "step limit per episode");
      sub->add_option("--policy", f.policy, "planned, noop, B, D, gamma or p");
    }
    if (name == "sensitivity" || name == "reproduce-figures") {
      sub->add_option("--trials", f.trials, "number of sensitivity trials");
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return nudge::cli::kExitValidation;
  }

  CLI::App* sub = app.get_subcommands().front();
  auto given = [&](const char* flag) { return sub->count(flag) > 0; };
  nudge::cli::Overrides& o = f.o;
  if (given("--seed")) o.seed = f.seed;
  if (given("--out")) o.out_dir = f.out;
  if (given("--preset")) o.preset = f.preset;
  if (given("--n-states")) o.n_states = f.n_states;
  if (given("--sigma2")) o.sigma2 = f.sigma2;
  if (given("--gamma-app")) o.gamma_app = f.gamma_app;
  if (sub->get_name() == "simulate") {
    if (given("--episodes")) o.episodes = f.episodes;
    if (given("--horizon")) o.horizon = f.horizon;
    if (given("--policy")) o.policy = f.policy;
  }
  if (sub->get_name() == "sensitivity" || sub->get_name() == "reproduce-figures") {
    if (given("--trials")) o.trials = f.trials;
  }

  nudge::cli::ParsedConfig parsed;
  try {
    if (!f.config.empty()) parsed = nudge::cli::load_config_file(f.config);
    nudge::cli::apply_overrides(parsed, o);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return nudge::cli::kExitValidation;
  }
  return nudge::cli::execute(sub->get_name(), parsed, std::cout, std::cerr);
}
