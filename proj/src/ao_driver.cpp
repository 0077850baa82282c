#include "dfrc/ao_driver.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>

namespace dfrc {

namespace {

double rate_margin(const MatC& t_eff, const CommChannels& channels,
                   const ScenarioConfig& cfg) {
  double margin = std::numeric_limits<double>::infinity();
  for (int u = 0; u < cfg.n_users; ++u) {
    const double r = rate(sinr_of_t(channels.h.col(u), t_eff, u, cfg.comm_noise_vars[u]));
    margin = std::min(margin, r - cfg.qos_thresholds[u]);
  }
  return margin;
}

double coupling_residual(const MatC& t_eff, const MatC& product) {
  return (t_eff - product).norm() / std::max(1.0, t_eff.norm());
}

MatC random_feasible_abf(const ScenarioConfig& cfg, Architecture arch, Rng& rng) {
  MatC f_a = MatC::Zero(cfg.n_tx, cfg.n_rf);
  auto unit = [&] { return std::polar(1.0, 2.0 * M_PI * rng.uniform()); };
  for (int i = 0; i < cfg.n_tx; ++i) {
    if (arch == Architecture::FC) {
      for (int j = 0; j < cfg.n_rf; ++j) f_a(i, j) = unit();
    } else if (is_dynamic(arch)) {
      f_a(i, i % cfg.n_rf) = unit();  // round-robin: no empty subarray
    } else {
      f_a(i, fixed_subarray_column(i, cfg.n_tx, cfg.n_rf)) = unit();
    }
  }
  return f_a;
}

// Cost K(i,j) of connecting antenna row i to chain j, matching the row-scan
// closed forms (amplitude clipped for DPS, unit for SPS).
double connection_cost(const MatC& t_tilde, const MatC& f_d, int i, int j, bool dps) {
  const double n2 = f_d.row(j).squaredNorm();
  if (n2 < 1e-12) return 0.0;
  const cxd c = (f_d.row(j) * t_tilde.row(i).adjoint())(0, 0);
  const double amp = dps ? std::min(std::abs(c) / n2, 2.0) : 1.0;
  return n2 * amp * amp - 2.0 * amp * std::abs(c);
}

// Move the least-costly donor rows onto starving chains, then retry the
// digital update.
MatC repair_and_update_dbf(MatC& f_a, const MatC& t_tilde, const MatC& f_d_prev,
                           Architecture arch, bool* repaired) {
  const int n_rf = static_cast<int>(f_a.cols());
  const int n_tx = static_cast<int>(f_a.rows());
  for (int round = 0; round <= n_rf; ++round) {
    try {
      return update_dbf(f_a, t_tilde);
    } catch (const EmptySubarrayError& e) {
      if (!is_dynamic(arch) || round == n_rf) throw;
      *repaired = true;
      for (int starving : e.chains) {
        std::vector<int> owner(n_tx, -1);
        std::vector<int> count(n_rf, 0);
        for (int i = 0; i < n_tx; ++i)
          for (int j = 0; j < n_rf; ++j)
            if (f_a(i, j) != cxd(0.0, 0.0)) {
              owner[i] = j;
              ++count[j];
            }
        int best_row = -1;
        double best_gain = -std::numeric_limits<double>::infinity();
        const bool dps = uses_dps(arch);
        for (int i = 0; i < n_tx; ++i) {
          if (owner[i] < 0 || count[owner[i]] < 2) continue;
          const double gain = connection_cost(t_tilde, f_d_prev, i, owner[i], dps) -
                              connection_cost(t_tilde, f_d_prev, i, starving, dps);
          if (gain > best_gain) {
            best_gain = gain;
            best_row = i;
          }
        }
        if (best_row < 0) throw;
        const double n2 = f_d_prev.row(starving).squaredNorm();
        const cxd c = (f_d_prev.row(starving) * t_tilde.row(best_row).adjoint())(0, 0);
        const double phase = c == cxd(0.0, 0.0) ? 0.0 : std::arg(std::conj(c));
        const double amp =
            dps ? std::min(n2 < 1e-12 ? 1.0 : std::abs(c) / n2, 2.0) : 1.0;
        f_a.row(best_row).setZero();
        f_a(best_row, starving) = std::polar(amp == 0.0 ? 1.0 : amp, phase);
      }
    }
  }
  throw SolverFailureError("subarray repair did not terminate");
}

}  // namespace

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Converged: return "Converged";
    case SolveStatus::MaxIterations: return "MaxIterations";
    case SolveStatus::InfeasibleQoS: return "InfeasibleQoS";
  }
  return "?";
}

double al_objective(const MatC& t_eff, const MatC& f_af_d, const MatC& lambda, double rho,
                    const ScenarioConfig& cfg) {
  const MatC diff = t_eff - f_af_d;
  return -rmi(t_eff, cfg) + 0.5 * rho * diff.squaredNorm() +
         std::real((lambda.array().conjugate() * diff.array()).sum());
}

SolverState initialize(const ScenarioConfig& cfg, const CommChannels& channels,
                       Architecture arch, Rng& rng, double rho) {
  SolverState st;
  st.rho = rho;
  st.bf.architecture = arch;
  st.bf.f_a = random_feasible_abf(cfg, arch, rng);

  // Matched-filter start, then exact MM on max_u (Gamma_u - rate_u): alternate
  // the WMMSE auxiliaries with the phase-1 min-max solve until the QoS set is
  // reached. Tight auxiliaries make T itself feasible once rates clear Gamma.
  MatC t(cfg.n_tx, cfg.n_users);
  const double col_norm = std::sqrt(cfg.power_budget / cfg.n_users);
  for (int u = 0; u < cfg.n_users; ++u)
    t.col(u) = col_norm * channels.h.col(u).normalized();

  double prev_deficit = std::numeric_limits<double>::infinity();
  int stalls = 0;
  bool feasible = false;
  for (int round = 0; round < 40; ++round) {
    st.receivers = update_receivers(t, channels, cfg);
    st.weights = update_weights(t, channels, cfg);
    const double margin = rate_margin(t, channels, cfg);
    if (margin >= 0.0) {
      feasible = true;
      break;
    }
    const auto cons = qos_quadratics(st.receivers, st.weights, channels, cfg);
    const FeasiblePoint fp =
        feasible_point(cons, cfg.power_budget, cfg.n_tx, cfg.n_users, &t);
    t = fp.t;
    const double deficit = -rate_margin(t, channels, cfg);
    if (deficit >= prev_deficit - 1e-9) {
      if (++stalls >= 2) break;
    } else {
      stalls = 0;
    }
    prev_deficit = deficit;
  }
  if (!feasible && rate_margin(t, channels, cfg) < 0.0)
    throw InfeasibleQoSError("QoS thresholds exceed what the power budget supports");

  t *= std::sqrt(cfg.power_budget / t.squaredNorm());
  st.t_eff = t;
  st.receivers = update_receivers(t, channels, cfg);
  st.weights = update_weights(t, channels, cfg);
  st.lambda = MatC::Zero(cfg.n_tx, cfg.n_users);
  st.bf.f_d = update_dbf(st.bf.f_a, t);
  st.iteration = 0;
  return st;
}

IterationInfo iterate(SolverState& state, const ScenarioConfig& cfg,
                      const CommChannels& channels, const SolveOptions& opts) {
  IterationInfo info;
  const double p = cfg.power_budget;
  const auto cons = qos_quadratics(state.receivers, state.weights, channels, cfg);
  MatC product = state.bf.product();
  info.al_before = al_objective(state.t_eff, product, state.lambda, state.rho, cfg);

  // (a) MM inner loop on T
  const FeasiblePoint fp = feasible_point(cons, p, cfg.n_tx, cfg.n_users, &state.t_eff);
  const bool have_anchor = fp.feasible;
  bool t_feasible = state.t_eff.squaredNorm() <= p * (1.0 + 1e-9);
  for (const auto& c : cons)
    t_feasible = t_feasible && c.value(state.t_eff) <= 1e-9 * std::max(1.0, std::abs(c.c));
  double cur = info.al_before;
  for (int inner = 0; inner < opts.mm_inner; ++inner) {
    const LiftedForm lifted = lift_xi(state.t_eff, cfg);
    const MatC gain = minorizer_gain(lifted);
    QcqpProblem prob;
    prob.objective = assemble_quadratic(gain, product, state.lambda, state.rho, cfg);
    prob.constraints = cons;
    prob.power = p;
    prob.n_rows = cfg.n_tx;
    prob.n_cols = cfg.n_users;
    QcqpOptions qopts;
    qopts.tol = opts.qcqp_tol;
    qopts.anchor = have_anchor ? &fp.t : nullptr;
    qopts.warm_start = &state.t_eff;
    const QcqpSolution sol = dfrc::solve(prob, qopts);
    if (std::getenv("DFRC_AO_TRACE") && sol.status != QcqpStatus::Optimal)
      std::fprintf(stderr,
                   "[ao] iter=%d inner=%d qcqp status=%d newton=%d kkt=%.3e rho=%.1f\n",
                   state.iteration, inner, static_cast<int>(sol.status), sol.iterations,
                   sol.kkt_residual, state.rho);
    if (sol.status == QcqpStatus::Infeasible) break;
    const bool best_effort = sol.status == QcqpStatus::MaxIterations;
    if (best_effort) {
      if (++state.qcqp_strikes >= 2)
        throw SolverFailureError("inner QCQP failed to converge twice consecutively");
    } else {
      state.qcqp_strikes = 0;
    }
    const double al_new = al_objective(sol.t, product, state.lambda, state.rho, cfg);
    // t_feasible == false happens when thresholds were tightened mid-run; the
    // step is then a restoration move and skips the descent guard.
    if (t_feasible && al_new > cur) break;  // surrogate exhausted within tolerance
    bool feasible_new = sol.t.squaredNorm() <= p * (1.0 + 1e-9);
    for (const auto& c : cons)
      feasible_new = feasible_new && c.value(sol.t) <= 1e-8 * std::max(1.0, std::abs(c.c));
    if (!feasible_new) break;
    const double improvement = cur - al_new;
    state.t_eff = sol.t;
    cur = al_new;
    t_feasible = true;
    if (best_effort || improvement < 1e-6 * std::max(1.0, std::abs(cur))) break;
  }
  info.al_after_t = cur;

  // (b) analog update
  const MatC t_tilde = state.t_eff + state.lambda / state.rho;
  state.bf.f_a = update_abf(state.bf.architecture, t_tilde, state.bf.f_d, &state.bf.f_a);
  if (uses_dps(state.bf.architecture))
    rebalance_dps_columns(state.bf.f_a, state.bf.f_d);  // product-invariant
  product = state.bf.product();
  info.al_after_abf = al_objective(state.t_eff, product, state.lambda, state.rho, cfg);

  // (c) digital update (with dynamic-subarray repair if a chain starved)
  state.bf.f_d = repair_and_update_dbf(state.bf.f_a, t_tilde, state.bf.f_d,
                                       state.bf.architecture, &info.repaired);
  product = state.bf.product();
  info.al_after_dbf = al_objective(state.t_eff, product, state.lambda, state.rho, cfg);

  // (d) WMMSE auxiliaries
  state.receivers = update_receivers(state.t_eff, channels, cfg);
  state.weights = update_weights(state.t_eff, channels, cfg);

  // (e) dual ascent
  state.lambda += state.rho * (state.t_eff - product);
  ++state.iteration;
  return info;
}

DesignResult solve(const ScenarioConfig& cfg, const CommChannels& channels,
                   Architecture arch, const SolveOptions& opts) {
  DesignResult result;
  SolverState state;
  // The loop runs against guard-inflated thresholds; traces, metrics and the
  // exit check use the true ones.
  ScenarioConfig work = cfg;
  for (double& g : work.qos_thresholds) g += opts.qos_guard;
  try {
    Rng rng(derive_seed(cfg.rng_seed, 1, static_cast<std::uint64_t>(arch)));
    state = initialize(work, channels, arch, rng, opts.rho);
  } catch (const InfeasibleQoSError&) {
    result.status = SolveStatus::InfeasibleQoS;
    result.bf.architecture = arch;
    result.bf.f_a = MatC::Zero(cfg.n_tx, cfg.n_rf);
    result.bf.f_d = MatC::Zero(cfg.n_rf, cfg.n_users);
    return result;
  }

  int consecutive_stalls = 0;
  double prev_obj = std::numeric_limits<double>::infinity();
  double window_best = std::numeric_limits<double>::infinity();
  double window_prev = std::numeric_limits<double>::infinity();
  int window_count = 0;
  bool converged = false;
  try {
    for (int k = 0; k < opts.max_outer; ++k) {
      const IterationInfo info = iterate(state, work, channels, opts);
      TraceRow row;
      row.iteration = state.iteration;
      row.al_objective = info.al_after_dbf;
      row.rmi = rmi(state.t_eff, cfg);
      row.min_rate_margin = rate_margin(state.t_eff, channels, cfg);
      row.residual = coupling_residual(state.t_eff, state.bf.product());
      row.step_violation = std::max({info.al_after_t - info.al_before,
                                     info.al_after_abf - info.al_after_t,
                                     info.al_after_dbf - info.al_after_abf});
      row.repaired = info.repaired;
      result.traces.push_back(row);
      if (opts.on_trace) opts.on_trace(row);

      const double rel_change =
          std::abs(row.al_objective - prev_obj) / std::max(1.0, std::abs(prev_obj));
      consecutive_stalls = rel_change <= opts.obj_tol ? consecutive_stalls + 1 : 0;
      prev_obj = row.al_objective;
      if (consecutive_stalls >= 3 && row.residual <= opts.resid_tol) {
        converged = true;
        break;
      }

      // coupling stalled above tolerance: tighten the penalty
      if (opts.rho_growth_window > 0) {
        window_best = std::min(window_best, row.residual);
        if (++window_count >= opts.rho_growth_window) {
          if (row.residual > opts.resid_tol && window_best > 0.9 * window_prev &&
              state.rho < 1e9) {
            state.rho *= 2.0;
            consecutive_stalls = 0;
          }
          window_prev = window_best;
          window_best = std::numeric_limits<double>::infinity();
          window_count = 0;
        }
      }
    }
  } catch (const SolverFailureError& e) {
    if (std::getenv("DFRC_AO_TRACE"))
      std::fprintf(stderr, "[ao] solver failure: %s (rho=%.1f iter=%d)\n", e.what(),
                   state.rho, state.iteration);
    converged = false;
  }

  auto rescale = [&] {
    const double pw = state.bf.product().squaredNorm();
    if (pw > cfg.power_budget)
      state.bf.f_d *= std::sqrt(cfg.power_budget / pw);
  };
  rescale();

  // QoS is enforced on T during the loop; re-verify on the physical product
  // and push with a doubled penalty if the coupling gap broke it.
  auto physical_margin = [&] {
    double m = std::numeric_limits<double>::infinity();
    const MatC f = state.bf.product();
    for (int u = 0; u < cfg.n_users; ++u)
      m = std::min(m, rate(sinr_of_t(channels.h.col(u), f, u, cfg.comm_noise_vars[u])) -
                          cfg.qos_thresholds[u]);
    return m;
  };
  for (int extra = 0; extra < 5 && physical_margin() < -1e-3; ++extra) {
    const double deficit = -physical_margin();
    for (double& g : work.qos_thresholds) g += 2.0 * deficit;
    state.rho *= 2.0;
    try {
      iterate(state, work, channels, opts);
    } catch (const SolverFailureError&) {
      break;
    }
    rescale();
  }

  result.bf = state.bf;
  if (uses_dps(arch)) result.dps = dps_realization(state.bf.f_a);
  result.metrics = evaluate_metrics(state.bf, channels, cfg);
  const bool qos_ok = physical_margin() >= -1e-3;
  result.status = (converged && qos_ok) ? SolveStatus::Converged : SolveStatus::MaxIterations;
  return result;
}

}  // namespace dfrc
