#include "dfrc/beamformer_updates.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dfrc/metrics.hpp"

namespace dfrc {

namespace {

constexpr double kRowNormFloor = 1e-12;

struct EntryChoice {
  cxd value;
  double cost;  // K(i,j) with the row-constant dropped
};

// Closed-form best entry for (i,j) given c = F_D[j,:] Ttilde^H[i,:]. On a
// degenerate digital row every gain has zero cost; dynamic rows contribute
// nothing (entry 0), fixed rows keep a unit gain so the chain stays alive.
EntryChoice best_entry(cxd c, double fd_row_norm2, bool dps, bool fixed_mapping = false) {
  if (fd_row_norm2 < kRowNormFloor)
    return {fixed_mapping ? cxd(1.0, 0.0) : cxd(0.0, 0.0), 0.0};
  const double phase = c == cxd(0.0, 0.0) ? 0.0 : std::arg(std::conj(c));
  double amp;
  if (dps) {
    amp = std::min(std::abs(c) / fd_row_norm2, 2.0);
  } else {
    amp = 1.0;
  }
  const cxd value = std::polar(amp, phase);
  const double cost = fd_row_norm2 * amp * amp - 2.0 * std::real(value * c);
  return {value, cost};
}

MatC row_scan_update(const MatC& t_tilde, const MatC& f_d, bool dps) {
  const int n_tx = static_cast<int>(t_tilde.rows());
  const int n_rf = static_cast<int>(f_d.rows());
  VecR fd_norm2(n_rf);
  for (int j = 0; j < n_rf; ++j) fd_norm2(j) = f_d.row(j).squaredNorm();

  MatC f_a = MatC::Zero(n_tx, n_rf);
  for (int i = 0; i < n_tx; ++i) {
    int best_j = 0;
    EntryChoice best{cxd(0.0, 0.0), std::numeric_limits<double>::infinity()};
    for (int j = 0; j < n_rf; ++j) {
      const cxd c_ij = (f_d.row(j) * t_tilde.row(i).adjoint())(0, 0);
      const EntryChoice cand = best_entry(c_ij, fd_norm2(j), dps);
      if (cand.cost < best.cost) {  // strict: ties keep the lowest column index
        best = cand;
        best_j = j;
      }
    }
    f_a(i, best_j) = best.value;
  }
  return f_a;
}

MatC fixed_support_update(const MatC& t_tilde, const MatC& f_d, bool dps) {
  const int n_tx = static_cast<int>(t_tilde.rows());
  const int n_rf = static_cast<int>(f_d.rows());
  MatC f_a = MatC::Zero(n_tx, n_rf);
  for (int i = 0; i < n_tx; ++i) {
    const int j = fixed_subarray_column(i, n_tx, n_rf);
    const cxd c_ij = (f_d.row(j) * t_tilde.row(i).adjoint())(0, 0);
    f_a(i, j) = best_entry(c_ij, f_d.row(j).squaredNorm(), dps, true).value;
  }
  return f_a;
}

MatC fully_connected_update(const MatC& t_tilde, const MatC& f_d, const MatC* init) {
  const int n_tx = static_cast<int>(t_tilde.rows());
  const int n_rf = static_cast<int>(f_d.rows());
  MatC f_a = init ? *init : MatC::Ones(n_tx, n_rf);
  VecR fd_norm2(n_rf);
  for (int j = 0; j < n_rf; ++j) fd_norm2(j) = f_d.row(j).squaredNorm();

  double prev = (t_tilde - f_a * f_d).squaredNorm();
  for (int sweep = 0; sweep < 20; ++sweep) {
    for (int i = 0; i < n_tx; ++i) {
      // residual for row i with one entry knocked out at a time
      Eigen::RowVectorXcd row_res = t_tilde.row(i) - f_a.row(i) * f_d;
      for (int j = 0; j < n_rf; ++j) {
        if (fd_norm2(j) < kRowNormFloor) continue;
        const Eigen::RowVectorXcd res = row_res + f_a(i, j) * f_d.row(j);
        const cxd r = (res * f_d.row(j).adjoint())(0, 0);
        const cxd updated = r == cxd(0.0, 0.0) ? cxd(1.0, 0.0) : cxd(std::polar(1.0, std::arg(r)));
        row_res += (f_a(i, j) - updated) * f_d.row(j);
        f_a(i, j) = updated;
      }
    }
    const double cur = (t_tilde - f_a * f_d).squaredNorm();
    if (prev - cur < 1e-10) break;
    prev = cur;
  }
  return f_a;
}

}  // namespace

std::pair<double, double> dps_decompose(double amplitude, double phase) {
  if (amplitude < 0.0 || amplitude > 2.0 + 1e-12)
    throw AmplitudeOutOfRangeError("DPS amplitude must lie in [0, 2], got " +
                                   std::to_string(amplitude));
  const double half = std::acos(std::clamp(amplitude / 2.0, -1.0, 1.0));
  return {phase + half, phase - half};
}

DpsRealization dps_realization(const MatC& f_a) {
  DpsRealization out;
  out.phi1 = MatR::Zero(f_a.rows(), f_a.cols());
  out.phi2 = MatR::Zero(f_a.rows(), f_a.cols());
  for (int i = 0; i < f_a.rows(); ++i)
    for (int j = 0; j < f_a.cols(); ++j) {
      const cxd v = f_a(i, j);
      if (v == cxd(0.0, 0.0)) {
        // zero gain: antiphase pair
        out.phi1(i, j) = M_PI / 2.0;
        out.phi2(i, j) = -M_PI / 2.0;
        continue;
      }
      auto [p1, p2] = dps_decompose(std::abs(v), std::arg(v));
      out.phi1(i, j) = p1;
      out.phi2(i, j) = p2;
    }
  return out;
}

MatC update_abf_dym_dps(const MatC& t_tilde, const MatC& f_d) {
  return row_scan_update(t_tilde, f_d, /*dps=*/true);
}

MatC update_abf(Architecture arch, const MatC& t_tilde, const MatC& f_d,
                const MatC* f_a_init) {
  switch (arch) {
    case Architecture::DymDPS: return update_abf_dym_dps(t_tilde, f_d);
    case Architecture::DymSPS: return row_scan_update(t_tilde, f_d, false);
    case Architecture::FixDPS: return fixed_support_update(t_tilde, f_d, true);
    case Architecture::FixSPS: return fixed_support_update(t_tilde, f_d, false);
    case Architecture::FC: return fully_connected_update(t_tilde, f_d, f_a_init);
  }
  throw std::logic_error("unreachable");
}

void rebalance_dps_columns(MatC& f_a, MatC& f_d) {
  for (int j = 0; j < f_a.cols(); ++j) {
    const double m = f_a.col(j).cwiseAbs().maxCoeff();
    if (m <= 0.0 || (m >= 0.5 && m <= 2.0)) continue;
    f_a.col(j) /= m;
    f_d.row(j) *= m;
  }
}

MatC update_dbf(const MatC& f_a, const MatC& t_tilde) {
  const int n_rf = static_cast<int>(f_a.cols());
  MatC gram = f_a.adjoint() * f_a;
  std::vector<int> starved;
  const double floor = 1e-12 * std::max(1.0, std::real(gram.trace()));
  for (int j = 0; j < n_rf; ++j)
    if (std::real(gram(j, j)) < floor) starved.push_back(j);
  if (!starved.empty()) throw EmptySubarrayError(std::move(starved));
  gram = 0.5 * (gram + gram.adjoint());
  return Eigen::LDLT<MatC>(gram).solve(f_a.adjoint() * t_tilde);
}

std::vector<cxd> update_receivers(const MatC& t_eff, const CommChannels& channels,
                                  const ScenarioConfig& cfg) {
  std::vector<cxd> delta(cfg.n_users);
  for (int u = 0; u < cfg.n_users; ++u) {
    const Eigen::RowVectorXcd g = channels.h.col(u).adjoint() * t_eff;
    const double den = g.squaredNorm() + cfg.comm_noise_vars[u];
    delta[u] = std::conj(g(u)) / den;
  }
  return delta;
}

std::vector<double> update_weights(const MatC& t_eff, const CommChannels& channels,
                                   const ScenarioConfig& cfg) {
  std::vector<double> w(cfg.n_users);
  for (int u = 0; u < cfg.n_users; ++u)
    w[u] = 1.0 + sinr_of_t(channels.h.col(u), t_eff, u, cfg.comm_noise_vars[u]);
  return w;
}

}  // namespace dfrc
