#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dfrc/rng.hpp"
#include "dfrc/types.hpp"

namespace dfrc {

struct PowerModel {
  double p_rf = 0.0;  // per RF chain [W]
  double p_bb = 0.0;  // baseband beamformer [W]
  double p_ps = 0.0;  // per phase shifter [W]
  double p_sw = 0.0;  // per switch [W]
};

// All physical and algorithmic constants of one design instance. Angles are
// radians and variances linear once constructed; the config-file loader does
// the degree/dB conversions.
struct ScenarioConfig {
  int n_tx = 0;
  int n_rx = 0;
  int n_users = 0;
  int n_rf = 0;
  int n_slots = 0;
  double power_budget = 0.0;                // P [W]
  std::vector<double> qos_thresholds;       // Gamma_u [nats]
  std::vector<double> comm_noise_vars;      // sigma^2_{c,u} [W]
  double radar_noise_var = 0.0;             // sigma^2_r [W]
  double target_angle = 0.0;                // theta_T [rad]
  double target_rcs_var = 0.0;              // varsigma_T (linear)
  std::vector<double> clutter_angles;       // theta_q [rad]
  std::vector<double> clutter_rcs_vars;     // varsigma_q (linear)
  PowerModel power_model;
  double spacing_factor = 1.0;              // kappa in the steering phase 2*pi*kappa*m*sin(phi)
  std::uint64_t rng_seed = 0;

  int n_clutter() const { return static_cast<int>(clutter_angles.size()); }
};

// Empty list means the config is valid; otherwise one message per violated
// invariant, each naming the offending field.
std::vector<std::string> validate_config(const ScenarioConfig& cfg);

// The simulation operating point used throughout: N_T=32, N_R=4,
// N_U=N_RF=4, L=8, P=1 W, SNR 15 dB, target 0 deg, clutter at -50/-10/40 deg
// with 30 dB RCS, 20 dB target RCS, unit radar noise.
ScenarioConfig default_scenario();

// ULA steering vector, entry m = sqrt(1/n) * exp(-j*2*pi*spacing_factor*m*sin(angle)).
VecC steering_vector(double angle, int n, double spacing_factor);

struct RadarChannel {
  VecC a_rx;  // unit norm, length N_R
  VecC a_tx;  // unit norm, length N_T
  // A(theta) = a_rx * a_tx^T (transpose, not conjugate); rank 1, unit Frobenius norm.
  MatC matrix() const { return a_rx * a_tx.transpose(); }
};

RadarChannel radar_channel(double angle, int n_rx, int n_tx, double spacing_factor);

enum class ChannelModel { IidRayleigh, Geometric };

ChannelModel channel_model_from_string(const std::string& s);
const char* to_string(ChannelModel m);

struct CommChannels {
  MatC h;  // N_T x N_U, column u is user-u downlink channel
};

// Geometric channel column from explicit path gains/angles:
// h = sqrt(n_tx / n_paths) * sum_p g_p * a_tx(phi_p).
VecC geometric_channel_from_paths(const VecC& gains, const VecR& angles, int n_tx,
                                  double spacing_factor);

// iid-rayleigh: entries CN(0,1). geometric: 8 paths, CN(0,1) gains, angles
// uniform on (-pi/2, pi/2). Pure function of (cfg, model, rng state).
CommChannels generate_comm_channels(const ScenarioConfig& cfg, ChannelModel model, Rng& rng);

// key = value config file with [scenario] and [power_model] sections.
// Angles are given in degrees, RCS and noise variances in dB; unknown keys
// are rejected. Throws ConfigError.
ScenarioConfig load_config(const std::string& path);
ScenarioConfig parse_config(const std::string& text);

// Canonical serialization of the parsed (linear/radian) config; input to the
// provenance hash so that equivalent configs hash equal.
std::string canonical_string(const ScenarioConfig& cfg);

std::uint64_t fnv1a_hash(const std::string& s);

}  // namespace dfrc
