#pragma once

#include <optional>
#include <vector>

#include "dfrc/mm_engine.hpp"
#include "dfrc/types.hpp"

namespace dfrc {

// Convex QCQP over the vectorized waveform t = vec(T), T of size
// n_rows x n_cols:
//   minimize   t^H Q t - Re(q^H t)          (objective, strictly convex)
//   subject to per-user QoS quadratics <= 0 and ||t||^2 <= power.
// Every quadratic is Kronecker-factored (I_{n_cols} (x) core + shift*I), so
// the Newton systems decompose into n_rows x n_rows Hermitian solves.
struct QcqpProblem {
  MMQuadratic objective;
  std::vector<QoSQuadratic> constraints;
  double power = 0.0;
  int n_rows = 0;
  int n_cols = 0;
};

enum class QcqpStatus { Optimal, Infeasible, MaxIterations };

struct QcqpSolution {
  MatC t;                        // n_rows x n_cols
  std::vector<double> multipliers;  // QoS duals then the power dual
  double kkt_residual = 0.0;     // max(stationarity, complementarity) / scale
  int iterations = 0;
  QcqpStatus status = QcqpStatus::Optimal;
  double objective = 0.0;
  // Infeasibility certificate (set when status == Infeasible): the phase-1
  // min-max value and the convex weights theta with sum(theta) = 1 such that
  // min over the power ball of sum theta_i g_i(t) is bounded below by the
  // phase-1 value.
  double phase1_value = 0.0;
  std::vector<double> farkas_weights;
};

struct QcqpOptions {
  double tol = 1e-8;
  int max_iter = 200;  // total Newton steps across barrier stages
  // Optional strictly feasible interior point; computed by phase 1 if absent.
  const MatC* anchor = nullptr;
  // Optional warm start (feasible, possibly on the boundary); blended with
  // the anchor to obtain a strictly interior starting point.
  const MatC* warm_start = nullptr;
};

// Primal-dual interior-point solve with a KKT certificate.
QcqpSolution solve(const QcqpProblem& problem, const QcqpOptions& opts = {});

struct FeasiblePoint {
  bool feasible = false;
  MatC t;
  double max_violation = 0.0;   // max_i g_i(t) at the returned point
  double phase1_value = 0.0;    // optimal epigraph value (min of max_i g_i over the ball)
  std::vector<double> farkas_weights;
  int iterations = 0;
};

// Phase 1: minimize the maximum constraint value over the power ball
// (epigraph form). feasible == true iff a strictly interior point was found.
FeasiblePoint feasible_point(const std::vector<QoSQuadratic>& constraints, double power,
                             int n_rows, int n_cols, const MatC* warm = nullptr);

}  // namespace dfrc
