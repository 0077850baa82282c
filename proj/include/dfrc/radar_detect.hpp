#pragma once

#include <string>
#include <utility>
#include <vector>

#include "dfrc/metrics.hpp"
#include "dfrc/rng.hpp"
#include "dfrc/scenario.hpp"
#include "dfrc/types.hpp"

namespace dfrc {

// One simulated radar frame: y = alpha_T mu_T + sum_q alpha_q mu_q + n with
// mu_x = (I_L (x) A(theta_x) F_A F_D) s, alphas constant over the frame.
struct EchoFrame {
  VecC y;   // N_R * L
  bool h1;  // target present
  VecC s;   // N_U * L unit-variance Gaussian symbols
};

EchoFrame simulate_echo(const HybridBeamformer& bf, const ScenarioConfig& cfg, bool h1,
                        Rng& rng);

// Signature of the scatterer at `angle` for the realized symbols.
VecC effective_signature(double angle, const MatC& f_af_d, const VecC& s,
                         const ScenarioConfig& cfg);

// Generalized matched filter |mu_T^H Rbar^{-1} y|^2, with
// Rbar = sum_q vs_q mu_q mu_q^H + sigma_r^2 I solved by Woodbury
// (rank Q plus identity).
double detector_statistic(const VecC& y, const VecC& s, const HybridBeamformer& bf,
                          const ScenarioConfig& cfg);

// mu_T^H Rbar^{-1} mu_T: the statistic's H0 scale. Under H0 the ratio
// statistic/scale is unit-mean exponential; under H1 its mean is
// 1 + vs_T * scale.
double gmf_scale(const VecC& s, const HybridBeamformer& bf, const ScenarioConfig& cfg);

struct RocCurve {
  std::vector<std::pair<double, double>> points;  // (p_fa, p_d), endpoints included
  long trials = 0;
  std::string threshold_rule;
};

// Empirical ROC: fresh symbols per trial, scale-normalized statistic,
// thresholds at the empirical (1 - p_fa) quantiles of the H0 sample,
// isotonic cleanup of Monte Carlo noise.
RocCurve roc_curve(const HybridBeamformer& bf, const ScenarioConfig& cfg, long trials,
                   const std::vector<double>& p_fa_grid, Rng& rng);

}  // namespace dfrc
