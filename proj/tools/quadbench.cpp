// Command-line front end: train, benchmark, ablate-window, ablate-inputs,
// stress, replay. Output root comes from $QUADBENCH_OUT (default ./results).

#include <CLI11.hpp>

#include <iostream>
#include <string>
#include <vector>

#include "quadbench/harness.hpp"

namespace qb = quadbench;

namespace {

struct Options {
  std::string config = QUADBENCH_DEFAULT_CONFIG;
  std::vector<std::string> overrides;
  std::string obs;
  long long seed = -1;
  long steps = -1;
  int jobs = 1;
  std::vector<std::string> controllers;
};

qb::BenchConfig load(const Options& o) {
  std::vector<std::string> ov = o.overrides;
  if (o.seed >= 0) ov.push_back("plan.seed=" + std::to_string(o.seed));
  if (o.steps >= 0) ov.push_back("plan.train_steps=" + std::to_string(o.steps));
  return qb::load_config(o.config, ov);
}

void add_common(CLI::App* cmd, Options& o) {
  cmd->add_option("--config", o.config, "INI configuration file")->check(CLI::ExistingFile);
  cmd->add_option("--set", o.overrides, "override a setting, section.key=value (repeatable)");
  cmd->add_option("--seed", o.seed, "run seed (overrides plan.seed)");
  cmd->add_option("--steps", o.steps, "environment steps per training run");
  cmd->add_option("--jobs", o.jobs, "worker threads")->check(CLI::PositiveNumber);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"quadbench: quadrotor observation-space benchmark"};
  app.set_version_flag("--version", qb::kToolVersion);
  app.require_subcommand(1);
  Options o;

  auto* train = app.add_subcommand("train", "train one observation config, write checkpoint and curve");
  add_common(train, o);
  train->add_option("--obs", o.obs, "observation config name (default plan.train_obs)");

  auto* bench = app.add_subcommand("benchmark", "evaluate PID and trained policies on all scenarios");
  add_common(bench, o);

  auto* window = app.add_subcommand("ablate-window", "train the window-length variants");
  add_common(window, o);

  auto* inputs = app.add_subcommand("ablate-inputs", "train and evaluate the input variants");
  add_common(inputs, o);

  auto* stress = app.add_subcommand("stress", "ramping-circle velocity stress test");
  add_common(stress, o);
  stress->add_option("controllers", o.controllers,
                     "pid, frozen-hover, teleport-oracle or an observation config name")
      ->required();

  auto* replay = app.add_subcommand("replay", "recompute stored reports from run logs");
  add_common(replay, o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? qb::kExitOk : qb::kExitUsage;
  }

  try {
    const qb::BenchConfig cfg = load(o);
    const qb::ResultStore store(qb::ResultStore::default_root());
    if (*train) {
      const std::string obs = o.obs.empty() ? cfg.plan.train_obs : o.obs;
      qb::cmd_train(cfg, store, obs, cfg.plan.seed, cfg.plan.train_steps, std::cout);
    } else if (*bench) {
      qb::cmd_benchmark(cfg, store, o.jobs, std::cout);
    } else if (*window) {
      qb::cmd_ablate_window(cfg, store, cfg.plan.train_steps, o.jobs, std::cout);
    } else if (*inputs) {
      qb::cmd_ablate_inputs(cfg, store, cfg.plan.train_steps, o.jobs, std::cout);
    } else if (*stress) {
      qb::cmd_stress(cfg, store, o.controllers, std::cout);
    } else if (*replay) {
      const auto outcomes = qb::cmd_replay(cfg, store, std::cout);
      for (const auto& r : outcomes)
        if (!r.identical) return qb::kExitFailure;
    }
  } catch (const qb::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    if (e.kind() == qb::ErrorKind::UnknownName) {
      std::cerr << "valid observation configs: " << qb::join_names(qb::all_config_names()) << "\n";
    }
    return qb::exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return qb::kExitFailure;
  }
  return qb::kExitOk;
}
