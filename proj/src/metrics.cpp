#include "dfrc/metrics.hpp"

#include <cmath>
#include <limits>

namespace dfrc {

std::vector<std::string> membership_violations(const HybridBeamformer& bf,
                                               double power_budget, double tol) {
  std::vector<std::string> errs;
  const MatC& fa = bf.f_a;
  const int n_tx = static_cast<int>(fa.rows());
  const int n_rf = static_cast<int>(fa.cols());
  const Architecture a = bf.architecture;

  auto check_modulus = [&](int i, int j) {
    const double m = std::abs(fa(i, j));
    if (uses_dps(a)) {
      if (m > 2.0 + tol)
        errs.push_back("f_a(" + std::to_string(i) + "," + std::to_string(j) +
                       ") modulus exceeds 2");
    } else if (std::abs(m - 1.0) > tol) {
      errs.push_back("f_a(" + std::to_string(i) + "," + std::to_string(j) +
                     ") modulus must be 1");
    }
  };

  for (int i = 0; i < n_tx; ++i) {
    if (a == Architecture::FC) {
      for (int j = 0; j < n_rf; ++j) check_modulus(i, j);
      continue;
    }
    int nonzeros = 0;
    for (int j = 0; j < n_rf; ++j) {
      if (std::abs(fa(i, j)) == 0.0) continue;
      ++nonzeros;
      const bool on_support =
          is_dynamic(a) || j == fixed_subarray_column(i, n_tx, n_rf);
      if (!on_support) {
        errs.push_back("f_a(" + std::to_string(i) + "," + std::to_string(j) +
                       ") off the architecture support");
        continue;
      }
      check_modulus(i, j);
    }
    if (nonzeros != 1)
      errs.push_back("row " + std::to_string(i) + " must have exactly one connection");
  }
  const double p = bf.product().squaredNorm();
  if (p > power_budget + 1e-9)
    errs.push_back("||F_A F_D||_F^2 exceeds the power budget");
  return errs;
}

double sinr_of_t(const VecC& h_u, const MatC& t_eff, int u, double noise_var) {
  const Eigen::RowVectorXcd g = h_u.adjoint() * t_eff;  // per-stream gains at user u
  double interference = 0.0;
  for (int v = 0; v < g.size(); ++v)
    if (v != u) interference += std::norm(g(v));
  return std::norm(g(u)) / (interference + noise_var);
}

double sinr(const VecC& h_u, const HybridBeamformer& bf, int u, double noise_var) {
  return sinr_of_t(h_u, bf.product(), u, noise_var);
}

MatC clutter_noise_covariance(const MatC& t_eff, const ScenarioConfig& cfg) {
  MatC r = cfg.radar_noise_var * MatC::Identity(cfg.n_rx, cfg.n_rx);
  for (int q = 0; q < cfg.n_clutter(); ++q) {
    const RadarChannel ch =
        radar_channel(cfg.clutter_angles[q], cfg.n_rx, cfg.n_tx, cfg.spacing_factor);
    const MatC bt = ch.matrix() * t_eff;  // N_R x N_U
    r.noalias() += cfg.clutter_rcs_vars[q] * bt * bt.adjoint();
  }
  return 0.5 * (r + r.adjoint());
}

double rmi(const MatC& t_eff, const ScenarioConfig& cfg) {
  const RadarChannel ch =
      radar_channel(cfg.target_angle, cfg.n_rx, cfg.n_tx, cfg.spacing_factor);
  const MatC b = ch.matrix() * t_eff;  // N_R x N_U
  const MatC r_cn = clutter_noise_covariance(t_eff, cfg);
  const MatC x = Eigen::LLT<MatC>(r_cn).solve(b);
  MatC m = MatC::Identity(cfg.n_users, cfg.n_users) + cfg.target_rcs_var * b.adjoint() * x;
  m = 0.5 * (m + m.adjoint());
  // I + varsigma_T B^H R^{-1} B is Hermitian PD; log det via Cholesky
  const MatC l = Eigen::LLT<MatC>(m).matrixL();
  double logdet = 0.0;
  for (int i = 0; i < l.rows(); ++i) logdet += std::log(std::real(l(i, i)));
  return 2.0 * logdet;
}

double mse(const MatC& t_eff, const VecC& h_u, cxd delta_u, int u, double noise_var) {
  const Eigen::RowVectorXcd g = h_u.adjoint() * t_eff;
  double others = noise_var;
  for (int v = 0; v < g.size(); ++v)
    if (v != u) others += std::norm(g(v));
  return std::norm(1.0 - delta_u * g(u)) + std::norm(delta_u) * others;
}

std::vector<std::pair<double, double>> beampattern(const HybridBeamformer& bf,
                                                   const std::vector<double>& angle_grid,
                                                   const ScenarioConfig& cfg) {
  const MatC f = bf.product();
  std::vector<std::pair<double, double>> out;
  out.reserve(angle_grid.size());
  double peak = -std::numeric_limits<double>::infinity();
  for (double theta : angle_grid) {
    const VecC a = steering_vector(theta, cfg.n_tx, cfg.spacing_factor);
    const double p = (a.transpose() * f).squaredNorm();
    const double db = 10.0 * std::log10(std::max(p, 1e-300));
    peak = std::max(peak, db);
    out.emplace_back(theta, db);
  }
  for (auto& [theta, db] : out) db -= peak;
  return out;
}

double power_consumption(Architecture arch, const ScenarioConfig& cfg) {
  const PowerModel& pm = cfg.power_model;
  const double base = cfg.power_budget + cfg.n_rf * pm.p_rf + pm.p_bb;
  switch (arch) {
    case Architecture::FC: return base + cfg.n_tx * cfg.n_rf * pm.p_ps;
    case Architecture::FixSPS: return base + cfg.n_tx * pm.p_ps;
    case Architecture::FixDPS: return base + 2.0 * cfg.n_tx * pm.p_ps;
    case Architecture::DymSPS: return base + cfg.n_tx * (pm.p_ps + pm.p_sw);
    case Architecture::DymDPS: return base + cfg.n_tx * (2.0 * pm.p_ps + pm.p_sw);
  }
  return base;
}

std::pair<double, double> energy_efficiencies(const std::vector<double>& rates,
                                              double rmi_value, double p_tol) {
  double sum = 0.0;
  for (double r : rates) sum += r;
  return {sum / p_tol, rmi_value / p_tol};
}

MetricsReport evaluate_metrics(const HybridBeamformer& bf, const CommChannels& channels,
                               const ScenarioConfig& cfg) {
  MetricsReport rep;
  const MatC f = bf.product();
  rep.sinr_per_user.resize(cfg.n_users);
  rep.rate_per_user.resize(cfg.n_users);
  for (int u = 0; u < cfg.n_users; ++u) {
    rep.sinr_per_user[u] = sinr_of_t(channels.h.col(u), f, u, cfg.comm_noise_vars[u]);
    rep.rate_per_user[u] = rate(rep.sinr_per_user[u]);
  }
  rep.rmi = rmi(f, cfg);
  rep.p_tol = power_consumption(bf.architecture, cfg);
  std::tie(rep.cee, rep.ree) = energy_efficiencies(rep.rate_per_user, rep.rmi, rep.p_tol);
  return rep;
}

}  // namespace dfrc
