#pragma once

#include <string>
#include <vector>

#include "dfrc/ao_driver.hpp"
#include "dfrc/radar_detect.hpp"
#include "dfrc/scenario.hpp"

namespace dfrc {

inline constexpr const char* kVersion = "dfrc-0.1.0";

enum class SweepVariable { None, Qos, NTx };

enum class QosUnit { Nats, Bits };

// Batch experiment description shared by all subcommands.
struct ExperimentSpec {
  ScenarioConfig scenario;
  std::vector<Architecture> architectures;
  SweepVariable sweep = SweepVariable::None;
  std::vector<double> sweep_values;  // strictly increasing
  int draws = 5;
  std::uint64_t seed = 0;
  std::string out_dir;
  int jobs = 1;
  QosUnit qos_unit = QosUnit::Nats;  // unit of sweep_values for the qos sweep
  ChannelModel channel_model = ChannelModel::IidRayleigh;
  SolveOptions solver;
};

std::vector<std::string> validate_spec(const ExperimentSpec& spec);

struct RunError : std::runtime_error {
  RunError(const std::string& msg, int code) : std::runtime_error(msg), exit_code(code) {}
  int exit_code;
};

// Channel draw `draw` of sweep point `point`, derived from the master seed so
// earlier draws never change when more are added.
CommChannels channels_for_draw(const ScenarioConfig& cfg, ChannelModel model,
                               std::uint64_t master_seed, int point, int draw);

// Scenario at one sweep point (thresholds or antenna count replaced).
ScenarioConfig scenario_at(const ExperimentSpec& spec, int point, int draw);

// Writes design_<arch>.json and trace_<arch>.csv per architecture.
// Throws RunError (after writing error.json) on InfeasibleQoS.
void run_solve(const ExperimentSpec& spec);

// Writes sweep.csv with per-point means over channel draws; per-point
// failures are recorded in the status column and the run continues.
void run_sweep(const ExperimentSpec& spec);

// Writes beampattern_<arch>.csv over [angle_min, angle_max] in degrees.
void run_beampattern(const ExperimentSpec& spec, double angle_min_deg = -90.0,
                     double angle_max_deg = 90.0, double angle_step_deg = 0.25);

// Writes roc.csv (mean detection probability over draws per architecture).
void run_roc(const ExperimentSpec& spec, long trials,
             const std::vector<double>& p_fa_grid);

std::vector<double> default_p_fa_grid();

// design_<arch>.json round-trip support.
struct DesignFile {
  HybridBeamformer bf;
  DpsRealization dps;
  MetricsReport metrics;
  SolveStatus status = SolveStatus::MaxIterations;
  std::uint64_t seed = 0;
  std::string config_hash;
};

std::string design_to_json(const DesignFile& design);
DesignFile design_from_json(const std::string& text);
DesignFile load_design(const std::string& path);

}  // namespace dfrc
