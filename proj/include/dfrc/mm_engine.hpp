#pragma once

#include <vector>

#include "dfrc/metrics.hpp"
#include "dfrc/scenario.hpp"
#include "dfrc/types.hpp"

namespace dfrc {

// Partitioned lifting of the radar mutual information,
//   Xi(T) = [ I_NU                 sqrt(vs_T) T^H A_T^H ]
//           [ sqrt(vs_T) A_T T     R_tc_hat + sigma_r^2 I ]
// with R_tc_hat summing the target *and* clutter terms. With E = [I; 0],
// log det |E^H Xi^{-1} E| equals RMI(T) exactly.
struct LiftedForm {
  MatC xi;        // (N_U + N_R) square Hermitian PD
  MatC r_tc_hat;  // N_R x N_R target-plus-clutter part
  int n_users = 0;
  int n_rx = 0;

  MatR e_mat() const {
    MatR e = MatR::Zero(n_users + n_rx, n_users);
    e.topRows(n_users).setIdentity();
    return e;
  }
};

LiftedForm lift_xi(const MatC& t_eff, const ScenarioConfig& cfg);

// log det |E^H Xi^{-1} E| evaluated on the lifted form (cross-check route
// against metrics::rmi).
double lifted_rmi(const LiftedForm& lifted);

struct SingularLiftError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// G = Xi^{-1} E (E^H Xi^{-1} E)^{-1} E^H Xi^{-1}; Hermitian PSD of rank N_U,
// Tr[G Xi] = N_U. Throws SingularLiftError when cond(Xi) > 1e12.
MatC minorizer_gain(const LiftedForm& lifted);

// One MM step's quadratic: value(T) + constant equals
//   Tr[G_k Xi(T)] + (rho/2)||T - F_A F_D||_F^2 + Re Tr[Lambda^H (T - F_A F_D)]
// for every T. The N_T*N_U x N_T*N_U operator is kept in Kronecker-factored
// form I_{N_U} (x) core + shift*I and is never materialized densely.
struct MMQuadratic {
  MatC gain;      // G_k, (N_U+N_R) square
  MatC core;      // N_T x N_T Hermitian PSD: sum_q vs_q A_q^H G22 A_q
  double shift;   // rho / 2
  MatC q_lin;     // N_T x N_U, q_hat = vec(q_lin)
  double constant;
  int n_users = 0;

  double value(const MatC& t) const {
    const MatC ct = core * t;
    return std::real((t.array().conjugate() * ct.array()).sum()) +
           shift * t.squaredNorm() -
           std::real((q_lin.array().conjugate() * t.array()).sum());
  }
  // Complex gradient: f(t + d) = f(t) + Re<grad, d> + O(d^2).
  MatC gradient(const MatC& t) const { return 2.0 * (core * t + shift * t) - q_lin; }
};

MMQuadratic assemble_quadratic(const MatC& gain, const MatC& f_af_d, const MatC& lambda,
                               double rho, const ScenarioConfig& cfg);

// Per-user QoS constraint in quadratic form; for every T,
//   value(T) = w_u * mse(T, delta_u) - log w_u - 1 + Gamma_u,
// so value(T) <= 0 is the WMMSE rate constraint. The Kronecker core is the
// rank-1 matrix core_scale * h h^H; the linear coefficient lives in column u.
struct QoSQuadratic {
  int user = 0;
  VecC h;              // channel h_u
  double core_scale;   // w_u |delta_u|^2
  VecC m_block;        // 2 w_u conj(delta_u) h_u
  double c;            // w_u (1 + |delta_u|^2 sigma^2) - log w_u - 1 + Gamma_u

  double value(const MatC& t) const {
    const Eigen::RowVectorXcd g = h.adjoint() * t;
    return core_scale * g.squaredNorm() - std::real(m_block.dot(t.col(user))) + c;
  }
  MatC gradient(const MatC& t) const {
    MatC grad = 2.0 * core_scale * (h * (h.adjoint() * t));
    grad.col(user) -= m_block;
    return grad;
  }
};

std::vector<QoSQuadratic> qos_quadratics(const std::vector<cxd>& receivers,
                                         const std::vector<double>& weights,
                                         const CommChannels& channels,
                                         const ScenarioConfig& cfg);

}  // namespace dfrc
