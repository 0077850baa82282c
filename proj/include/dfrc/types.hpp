#pragma once

#include <Eigen/Dense>
#include <complex>
#include <stdexcept>
#include <string>

namespace dfrc {

using cxd = std::complex<double>;
using MatC = Eigen::MatrixXcd;
using VecC = Eigen::VectorXcd;
using MatR = Eigen::MatrixXd;
using VecR = Eigen::VectorXd;

// Analog front-end variants. FC: every antenna sees every RF chain through a
// unit-modulus phase shifter. Fix*/Dym*: one chain per antenna, mapping fixed
// by position or chosen by the optimizer; SPS entries have modulus 1, DPS
// entries (two shifters in parallel) have modulus <= 2.
enum class Architecture { FC, FixSPS, FixDPS, DymSPS, DymDPS };

inline const char* to_string(Architecture a) {
  switch (a) {
    case Architecture::FC: return "FC";
    case Architecture::FixSPS: return "FixSPS";
    case Architecture::FixDPS: return "FixDPS";
    case Architecture::DymSPS: return "DymSPS";
    case Architecture::DymDPS: return "DymDPS";
  }
  return "?";
}

Architecture architecture_from_string(const std::string& s);

inline bool uses_dps(Architecture a) {
  return a == Architecture::FixDPS || a == Architecture::DymDPS;
}
inline bool is_dynamic(Architecture a) {
  return a == Architecture::DymSPS || a == Architecture::DymDPS;
}

struct HybridBeamformer {
  MatC f_a;           // N_T x N_RF analog beamformer
  MatC f_d;           // N_RF x N_U digital beamformer
  Architecture architecture = Architecture::DymDPS;

  MatC product() const { return f_a * f_d; }
};

// RF chain that feeds antenna `row` under the fixed sub-connected mapping
// j(i) = ceil(i * N_RF / N_T) with 1-based i, returned 0-based.
inline int fixed_subarray_column(int row, int n_tx, int n_rf) {
  return static_cast<int>((static_cast<long>(row + 1) * n_rf + n_tx - 1) / n_tx) - 1;
}

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace dfrc
