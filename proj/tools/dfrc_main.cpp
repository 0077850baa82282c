// Batch experiment runner: designs hybrid beamformers for a joint
// radar-communication transmitter and reproduces the evaluation curves
// (convergence traces, QoS and antenna sweeps, beampatterns, ROC) as CSV/JSON.
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dfrc/experiments.hpp"

namespace {

using namespace dfrc;

std::vector<Architecture> parse_architectures(const std::vector<std::string>& names) {
  std::vector<Architecture> out;
  if (names.empty() || (names.size() == 1 && names[0] == "all")) {
    out = {Architecture::FC, Architecture::FixSPS, Architecture::FixDPS,
           Architecture::DymSPS, Architecture::DymDPS};
    return out;
  }
  for (const auto& n : names) out.push_back(architecture_from_string(n));
  return out;
}

struct CommonArgs {
  std::string config_path;
  std::vector<std::string> arch_names{"all"};
  std::uint64_t seed = 0;
  std::string out_dir = "out";
  int jobs = 1;
  std::string channel_model = "iid-rayleigh";
  int max_outer = 300;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "scenario config file")->required();
  cmd->add_option("--arch", args.arch_names,
                  "architectures (FC FixSPS FixDPS DymSPS DymDPS or 'all')");
  cmd->add_option("--seed", args.seed, "master seed");
  cmd->add_option("--out", args.out_dir, "output directory");
  cmd->add_option("--jobs", args.jobs, "worker pool size");
  cmd->add_option("--channel-model", args.channel_model, "iid-rayleigh | geometric");
  cmd->add_option("--max-outer", args.max_outer, "outer iteration cap");
}

ExperimentSpec make_spec(const CommonArgs& args) {
  ExperimentSpec spec;
  spec.scenario = load_config(args.config_path);
  spec.architectures = parse_architectures(args.arch_names);
  spec.seed = args.seed;
  spec.out_dir = args.out_dir;
  spec.jobs = args.jobs;
  spec.channel_model = channel_model_from_string(args.channel_model);
  spec.solver.max_outer = args.max_outer;
  auto errs = validate_spec(spec);
  if (!errs.empty()) {
    std::string msg = "invalid experiment spec:";
    for (const auto& e : errs) msg += "\n  " + e;
    throw ConfigError(msg);
  }
  return spec;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hybrid beamformer designer for a radar-communication base station"};
  app.require_subcommand(1);

  CommonArgs solve_args, sweep_args, bp_args, roc_args;
  std::string validate_path;

  auto* solve_cmd = app.add_subcommand("solve", "single design per architecture");
  add_common(solve_cmd, solve_args);

  auto* sweep_cmd = app.add_subcommand("sweep", "sweep QoS threshold or antenna count");
  add_common(sweep_cmd, sweep_args);
  std::string sweep_var = "qos";
  std::vector<double> sweep_values;
  int draws = 5;
  std::string qos_unit = "nats";
  sweep_cmd->add_option("--sweep", sweep_var, "qos | n_tx")->required();
  sweep_cmd->add_option("--values", sweep_values, "sweep values (strictly increasing)")
      ->required();
  sweep_cmd->add_option("--draws", draws, "channel draws per point");
  sweep_cmd->add_option("--qos-unit", qos_unit,
                        "unit of qos sweep values: nats | bits (converted at parse)");

  auto* bp_cmd = app.add_subcommand("beampattern", "transmit beampattern per architecture");
  add_common(bp_cmd, bp_args);
  double angle_min = -90.0, angle_max = 90.0, angle_step = 0.25;
  bp_cmd->add_option("--angle-min", angle_min, "grid start [deg]");
  bp_cmd->add_option("--angle-max", angle_max, "grid stop [deg]");
  bp_cmd->add_option("--angle-step", angle_step, "grid step [deg]");

  auto* roc_cmd = app.add_subcommand("roc", "Monte Carlo detection ROC per architecture");
  add_common(roc_cmd, roc_args);
  long trials = 10000;
  int roc_draws = 1;
  std::vector<double> p_fa_grid;
  roc_cmd->add_option("--trials", trials, "Monte Carlo trials per hypothesis");
  roc_cmd->add_option("--draws", roc_draws, "channel draws to average over");
  roc_cmd->add_option("--pfa-grid", p_fa_grid, "false-alarm grid in (0,1)");

  auto* validate_cmd = app.add_subcommand("validate", "check a scenario config file");
  validate_cmd->add_option("--config", validate_path, "scenario config file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (solve_cmd->parsed()) {
      run_solve(make_spec(solve_args));
    } else if (sweep_cmd->parsed()) {
      ExperimentSpec spec = make_spec(sweep_args);
      if (sweep_var == "qos")
        spec.sweep = SweepVariable::Qos;
      else if (sweep_var == "n_tx")
        spec.sweep = SweepVariable::NTx;
      else
        throw ConfigError("unknown sweep variable: " + sweep_var);
      spec.sweep_values = sweep_values;
      spec.draws = draws;
      if (qos_unit == "bits")
        spec.qos_unit = QosUnit::Bits;
      else if (qos_unit != "nats")
        throw ConfigError("unknown qos unit: " + qos_unit);
      auto errs = validate_spec(spec);
      if (!errs.empty()) throw ConfigError("invalid sweep spec: " + errs.front());
      run_sweep(spec);
    } else if (bp_cmd->parsed()) {
      run_beampattern(make_spec(bp_args), angle_min, angle_max, angle_step);
    } else if (roc_cmd->parsed()) {
      ExperimentSpec spec = make_spec(roc_args);
      spec.draws = roc_draws;
      run_roc(spec, trials, p_fa_grid.empty() ? default_p_fa_grid() : p_fa_grid);
    } else if (validate_cmd->parsed()) {
      std::ifstream in(validate_path);
      if (!in) throw ConfigError("cannot open config file: " + validate_path);
      std::stringstream ss;
      ss << in.rdbuf();
      ScenarioConfig cfg = parse_config(ss.str());
      auto errs = validate_config(cfg);
      if (!errs.empty()) {
        for (const auto& e : errs) std::cerr << "error: " << e << "\n";
        return 2;
      }
      std::cout << "ok\n";
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const RunError& e) {
    std::cout << e.what() << "\n";  // machine-readable error JSON
    return e.exit_code;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
