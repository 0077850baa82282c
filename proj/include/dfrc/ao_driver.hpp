#pragma once

#include <functional>
#include <vector>

#include "dfrc/beamformer_updates.hpp"
#include "dfrc/metrics.hpp"
#include "dfrc/mm_engine.hpp"
#include "dfrc/qcqp.hpp"
#include "dfrc/rng.hpp"
#include "dfrc/scenario.hpp"
#include "dfrc/types.hpp"

namespace dfrc {

struct InfeasibleQoSError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SolverFailureError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Mutable state of the alternating-optimization loop.
struct SolverState {
  MatC t_eff;                    // auxiliary waveform T, N_T x N_U
  MatC lambda;                   // dual Lambda, N_T x N_U
  double rho = 10.0;             // penalty parameter
  std::vector<cxd> receivers;    // delta_u
  std::vector<double> weights;   // w_u >= 1
  int iteration = 0;
  HybridBeamformer bf;
  int qcqp_strikes = 0;          // consecutive inner-solver MaxIterations
};

struct TraceRow {
  int iteration = 0;
  double al_objective = 0.0;     // after steps (a)-(c), at the iteration's dual
  double rmi = 0.0;              // RMI(T)
  double min_rate_margin = 0.0;  // min_u rate_u(T) - Gamma_u
  double residual = 0.0;         // ||T - F_A F_D||_F / max(1, ||T||_F)
  double step_violation = 0.0;   // max AL increase across sub-steps (>=0 means none)
  bool repaired = false;         // an empty subarray was repaired this iteration
};

enum class SolveStatus { Converged, MaxIterations, InfeasibleQoS };

const char* to_string(SolveStatus s);

struct DesignResult {
  HybridBeamformer bf;
  DpsRealization dps;  // empty for SPS architectures
  std::vector<TraceRow> traces;
  MetricsReport metrics;
  SolveStatus status = SolveStatus::MaxIterations;
};

struct SolveOptions {
  int max_outer = 300;
  double obj_tol = 1e-4;    // relative AL change, must hold 3 consecutive iterations
  double resid_tol = 1e-3;  // relative coupling residual
  double rho = 10.0;
  // Residual-stall safeguard: when the best coupling residual over a window
  // of iterations stops improving, rho doubles (dual kept). Set the window
  // to 0 to pin rho at its initial value.
  int rho_growth_window = 12;
  // QoS is enforced on T; the coupling gap leaks a little rate when the
  // constraint is tight, so the solver works against thresholds inflated by
  // this guard and the exit check runs against the true ones.
  double qos_guard = 3e-3;
  int mm_inner = 5;
  double qcqp_tol = 1e-9;
  std::function<void(const TraceRow&)> on_trace;
};

// -RMI(T) + (rho/2)||T - F_A F_D||_F^2 + Re Tr[Lambda^H (T - F_A F_D)].
double al_objective(const MatC& t_eff, const MatC& f_af_d, const MatC& lambda, double rho,
                    const ScenarioConfig& cfg);

// Random feasible analog beamformer, waveform from the QoS phase-1 loop
// scaled to full power, auxiliaries from the WMMSE expressions, zero dual.
// Throws InfeasibleQoSError when the thresholds exceed what the power budget
// supports on this channel draw.
SolverState initialize(const ScenarioConfig& cfg, const CommChannels& channels,
                       Architecture arch, Rng& rng, double rho = 10.0);

struct IterationInfo {
  double al_before = 0.0;
  double al_after_t = 0.0;
  double al_after_abf = 0.0;
  double al_after_dbf = 0.0;
  bool repaired = false;
};

// One outer iteration: MM inner loop on T (QCQP), analog update, digital
// update, WMMSE auxiliaries, dual ascent. The AL objective is non-increasing
// across the first three sub-steps at fixed dual.
IterationInfo iterate(SolverState& state, const ScenarioConfig& cfg,
                      const CommChannels& channels, const SolveOptions& opts = {});

DesignResult solve(const ScenarioConfig& cfg, const CommChannels& channels,
                   Architecture arch, const SolveOptions& opts = {});

}  // namespace dfrc
