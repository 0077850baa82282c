#pragma once

#include <utility>
#include <vector>

#include "dfrc/scenario.hpp"
#include "dfrc/types.hpp"

namespace dfrc {

struct MetricsReport {
  std::vector<double> sinr_per_user;
  std::vector<double> rate_per_user;  // nats per channel use
  double rmi = 0.0;
  double p_tol = 0.0;  // total power consumption [W]
  double cee = 0.0;    // sum rate / p_tol
  double ree = 0.0;    // rmi / p_tol
};

// Architecture membership of F_A plus the power constraint on F_A F_D.
// Empty list means the beamformer is feasible.
std::vector<std::string> membership_violations(const HybridBeamformer& bf,
                                               double power_budget,
                                               double tol = 1e-9);

// SINR of user u for the effective waveform T (column v is the user-v stream).
double sinr_of_t(const VecC& h_u, const MatC& t_eff, int u, double noise_var);

double sinr(const VecC& h_u, const HybridBeamformer& bf, int u, double noise_var);

inline double rate(double sinr_value) { return std::log1p(sinr_value); }

// R_CN = sum_q varsigma_q A_q T T^H A_q^H + sigma_r^2 I (Hermitian PD).
MatC clutter_noise_covariance(const MatC& t_eff, const ScenarioConfig& cfg);

// log det(I + varsigma_T A_T T T^H A_T^H R_CN^{-1}), evaluated through the
// N_U x N_U Sylvester form with a solve against R_CN.
double rmi(const MatC& t_eff, const ScenarioConfig& cfg);

// E|s_u - delta_u y_u|^2 for unit-variance independent streams.
double mse(const MatC& t_eff, const VecC& h_u, cxd delta_u, int u, double noise_var);

// Transmit gain 10*log10(||a_tx(theta)^T F_A F_D||^2) over the grid,
// normalized so the grid maximum is 0 dB.
std::vector<std::pair<double, double>> beampattern(const HybridBeamformer& bf,
                                                   const std::vector<double>& angle_grid,
                                                   const ScenarioConfig& cfg);

double power_consumption(Architecture arch, const ScenarioConfig& cfg);

// (cee, ree) = (sum of rates, rmi) / p_tol.
std::pair<double, double> energy_efficiencies(const std::vector<double>& rates,
                                              double rmi_value, double p_tol);

MetricsReport evaluate_metrics(const HybridBeamformer& bf, const CommChannels& channels,
                               const ScenarioConfig& cfg);

}  // namespace dfrc
