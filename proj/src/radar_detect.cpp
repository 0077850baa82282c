#include "dfrc/radar_detect.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace dfrc {

namespace {

VecC draw_symbols(int n_users, int n_slots, Rng& rng) {
  VecC s(n_users * n_slots);
  for (int i = 0; i < s.size(); ++i) s(i) = rng.cnormal();
  return s;
}

// Columns are the clutter signatures mu_q for the realized symbols.
MatC clutter_signatures(const MatC& f, const VecC& s, const ScenarioConfig& cfg) {
  MatC u(cfg.n_rx * cfg.n_slots, cfg.n_clutter());
  for (int q = 0; q < cfg.n_clutter(); ++q)
    u.col(q) = effective_signature(cfg.clutter_angles[q], f, s, cfg);
  return u;
}

// Rbar^{-1} v for Rbar = sigma^2 I + U diag(vs) U^H via Woodbury.
VecC woodbury_solve(const MatC& u, const std::vector<double>& vs, double sigma2,
                    const VecC& v) {
  if (u.cols() == 0) return v / sigma2;
  MatC m = u.adjoint() * u;
  for (int q = 0; q < m.rows(); ++q) m(q, q) += sigma2 / vs[q];
  const VecC w = Eigen::LDLT<MatC>(0.5 * (m + m.adjoint())).solve(u.adjoint() * v);
  return (v - u * w) / sigma2;
}

}  // namespace

VecC effective_signature(double angle, const MatC& f_af_d, const VecC& s,
                         const ScenarioConfig& cfg) {
  const RadarChannel ch = radar_channel(angle, cfg.n_rx, cfg.n_tx, cfg.spacing_factor);
  // A(theta) F s_l = a_rx * (a_tx^T F s_l): rank-1 channel collapses each slot
  // to a scalar gain on a_rx.
  const Eigen::RowVectorXcd g = ch.a_tx.transpose() * f_af_d;  // 1 x N_U
  VecC mu(cfg.n_rx * cfg.n_slots);
  for (int l = 0; l < cfg.n_slots; ++l) {
    cxd c = 0.0;
    for (int u = 0; u < cfg.n_users; ++u) c += g(u) * s(l * cfg.n_users + u);
    mu.segment(l * cfg.n_rx, cfg.n_rx) = c * ch.a_rx;
  }
  return mu;
}

EchoFrame simulate_echo(const HybridBeamformer& bf, const ScenarioConfig& cfg, bool h1,
                        Rng& rng) {
  EchoFrame frame;
  frame.h1 = h1;
  frame.s = draw_symbols(cfg.n_users, cfg.n_slots, rng);
  const MatC f = bf.product();

  VecC y = VecC::Zero(cfg.n_rx * cfg.n_slots);
  if (h1) {
    const cxd alpha_t = std::sqrt(cfg.target_rcs_var) * rng.cnormal();
    y += alpha_t * effective_signature(cfg.target_angle, f, frame.s, cfg);
  }
  for (int q = 0; q < cfg.n_clutter(); ++q) {
    const cxd alpha_q = std::sqrt(cfg.clutter_rcs_vars[q]) * rng.cnormal();
    y += alpha_q * effective_signature(cfg.clutter_angles[q], f, frame.s, cfg);
  }
  const double noise_sd = std::sqrt(cfg.radar_noise_var);
  for (int i = 0; i < y.size(); ++i) y(i) += noise_sd * rng.cnormal();
  frame.y = std::move(y);
  return frame;
}

double detector_statistic(const VecC& y, const VecC& s, const HybridBeamformer& bf,
                          const ScenarioConfig& cfg) {
  const MatC f = bf.product();
  const VecC mu_t = effective_signature(cfg.target_angle, f, s, cfg);
  const MatC u = clutter_signatures(f, s, cfg);
  const VecC z = woodbury_solve(u, cfg.clutter_rcs_vars, cfg.radar_noise_var, y);
  return std::norm(mu_t.dot(z));
}

double gmf_scale(const VecC& s, const HybridBeamformer& bf, const ScenarioConfig& cfg) {
  const MatC f = bf.product();
  const VecC mu_t = effective_signature(cfg.target_angle, f, s, cfg);
  const MatC u = clutter_signatures(f, s, cfg);
  const VecC z = woodbury_solve(u, cfg.clutter_rcs_vars, cfg.radar_noise_var, mu_t);
  return std::real(mu_t.dot(z));
}

RocCurve roc_curve(const HybridBeamformer& bf, const ScenarioConfig& cfg, long trials,
                   const std::vector<double>& p_fa_grid, Rng& rng) {
  std::vector<double> h0(trials), h1(trials);
  for (long i = 0; i < trials; ++i) {
    // one symbol frame per trial; independent echoes under each hypothesis
    const EchoFrame f0 = simulate_echo(bf, cfg, false, rng);
    const double m0 = gmf_scale(f0.s, bf, cfg);
    h0[i] = detector_statistic(f0.y, f0.s, bf, cfg) / m0;
    const EchoFrame f1 = simulate_echo(bf, cfg, true, rng);
    const double m1 = gmf_scale(f1.s, bf, cfg);
    h1[i] = detector_statistic(f1.y, f1.s, bf, cfg) / m1;
  }
  std::sort(h0.begin(), h0.end());
  std::sort(h1.begin(), h1.end());

  RocCurve curve;
  curve.trials = trials;
  curve.threshold_rule = "empirical (1 - p_fa) quantile of the scale-normalized H0 statistic";
  curve.points.emplace_back(0.0, 0.0);
  for (double p_fa : p_fa_grid) {
    if (p_fa <= 0.0 || p_fa >= 1.0) continue;
    const long k = std::clamp<long>(
        static_cast<long>(std::ceil((1.0 - p_fa) * trials)) - 1, -1, trials - 1);
    const double thr = k < 0 ? -std::numeric_limits<double>::infinity() : h0[k];
    const long exceed =
        h1.end() - std::upper_bound(h1.begin(), h1.end(), thr);
    curve.points.emplace_back(p_fa, static_cast<double>(exceed) / trials);
  }
  curve.points.emplace_back(1.0, 1.0);
  std::sort(curve.points.begin(), curve.points.end());
  // isotonic cleanup: running max along increasing p_fa
  double run = 0.0;
  for (auto& [fa, pd] : curve.points) {
    run = std::max(run, pd);
    pd = run;
  }
  curve.points.back().second = 1.0;
  return curve;
}

}  // namespace dfrc
