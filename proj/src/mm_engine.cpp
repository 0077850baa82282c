#include "dfrc/mm_engine.hpp"

#include <cmath>

namespace dfrc {

LiftedForm lift_xi(const MatC& t_eff, const ScenarioConfig& cfg) {
  const int nu = cfg.n_users;
  const int nr = cfg.n_rx;
  const RadarChannel target =
      radar_channel(cfg.target_angle, nr, cfg.n_tx, cfg.spacing_factor);
  const MatC bt = target.matrix() * t_eff;  // N_R x N_U

  MatC r_tc = cfg.target_rcs_var * bt * bt.adjoint();
  for (int q = 0; q < cfg.n_clutter(); ++q) {
    const RadarChannel ch =
        radar_channel(cfg.clutter_angles[q], nr, cfg.n_tx, cfg.spacing_factor);
    const MatC bq = ch.matrix() * t_eff;
    r_tc.noalias() += cfg.clutter_rcs_vars[q] * bq * bq.adjoint();
  }
  r_tc = 0.5 * (r_tc + r_tc.adjoint());

  LiftedForm out;
  out.n_users = nu;
  out.n_rx = nr;
  out.r_tc_hat = r_tc;
  out.xi = MatC::Zero(nu + nr, nu + nr);
  out.xi.topLeftCorner(nu, nu).setIdentity();
  const double s = std::sqrt(cfg.target_rcs_var);
  out.xi.bottomLeftCorner(nr, nu) = s * bt;
  out.xi.topRightCorner(nu, nr) = s * bt.adjoint();
  out.xi.bottomRightCorner(nr, nr) =
      r_tc + cfg.radar_noise_var * MatC::Identity(nr, nr);
  return out;
}

double lifted_rmi(const LiftedForm& lifted) {
  const int nu = lifted.n_users;
  const MatC v = Eigen::LDLT<MatC>(lifted.xi).solve(
      MatC(lifted.e_mat().cast<cxd>()));
  MatC s = v.topRows(nu);  // E^H Xi^{-1} E
  s = 0.5 * (s + s.adjoint());
  const MatC l = Eigen::LLT<MatC>(s).matrixL();
  double logdet = 0.0;
  for (int i = 0; i < nu; ++i) logdet += std::log(std::real(l(i, i)));
  return 2.0 * logdet;
}

MatC minorizer_gain(const LiftedForm& lifted) {
  const int nu = lifted.n_users;
  Eigen::SelfAdjointEigenSolver<MatC> eig(lifted.xi);
  const double lo = eig.eigenvalues().minCoeff();
  const double hi = eig.eigenvalues().maxCoeff();
  if (!(lo > 0.0) || hi / lo > 1e12)
    throw SingularLiftError("lifted matrix numerically singular (cond > 1e12)");
  MatC v = eig.eigenvectors().adjoint() * lifted.e_mat().cast<cxd>();
  for (int i = 0; i < v.rows(); ++i) v.row(i) /= eig.eigenvalues()(i);
  v = eig.eigenvectors() * v;  // Xi^{-1} E
  MatC s = v.topRows(nu);
  s = 0.5 * (s + s.adjoint());
  MatC g = v * Eigen::LLT<MatC>(s).solve(v.adjoint());
  return 0.5 * (g + g.adjoint());
}

MMQuadratic assemble_quadratic(const MatC& gain, const MatC& f_af_d, const MatC& lambda,
                               double rho, const ScenarioConfig& cfg) {
  const int nu = cfg.n_users;
  const int nr = cfg.n_rx;
  const MatC g12 = gain.topRightCorner(nu, nr);
  const MatC g22 = gain.bottomRightCorner(nr, nr);

  const RadarChannel target =
      radar_channel(cfg.target_angle, nr, cfg.n_tx, cfg.spacing_factor);
  MatC core = cfg.target_rcs_var * target.matrix().adjoint() * g22 * target.matrix();
  for (int q = 0; q < cfg.n_clutter(); ++q) {
    const MatC a =
        radar_channel(cfg.clutter_angles[q], nr, cfg.n_tx, cfg.spacing_factor).matrix();
    core.noalias() += cfg.clutter_rcs_vars[q] * a.adjoint() * g22 * a;
  }
  core = 0.5 * (core + core.adjoint());

  MMQuadratic mq;
  mq.gain = gain;
  mq.core = core;
  mq.shift = rho / 2.0;
  mq.n_users = nu;
  mq.q_lin = rho * f_af_d - lambda -
             2.0 * std::sqrt(cfg.target_rcs_var) * target.matrix().adjoint() * g12.adjoint();
  // T-independent part of Tr[G Xi(T)] + penalty
  mq.constant = std::real(gain.topLeftCorner(nu, nu).trace()) +
                cfg.radar_noise_var * std::real(g22.trace()) +
                (rho / 2.0) * f_af_d.squaredNorm() -
                std::real((lambda.array().conjugate() * f_af_d.array()).sum());
  return mq;
}

std::vector<QoSQuadratic> qos_quadratics(const std::vector<cxd>& receivers,
                                         const std::vector<double>& weights,
                                         const CommChannels& channels,
                                         const ScenarioConfig& cfg) {
  std::vector<QoSQuadratic> out;
  out.reserve(cfg.n_users);
  for (int u = 0; u < cfg.n_users; ++u) {
    const double w = weights[u];
    const cxd d = receivers[u];
    QoSQuadratic q;
    q.user = u;
    q.h = channels.h.col(u);
    q.core_scale = w * std::norm(d);
    q.m_block = 2.0 * w * std::conj(d) * channels.h.col(u);
    q.c = w * (1.0 + std::norm(d) * cfg.comm_noise_vars[u]) - std::log(w) - 1.0 +
          cfg.qos_thresholds[u];
    out.push_back(std::move(q));
  }
  return out;
}

}  // namespace dfrc
