#pragma once

#include <utility>
#include <vector>

#include "dfrc/scenario.hpp"
#include "dfrc/types.hpp"

namespace dfrc {

struct AmplitudeOutOfRangeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct EmptySubarrayError : std::runtime_error {
  explicit EmptySubarrayError(std::vector<int> starved)
      : std::runtime_error("RF chain(s) with no connected antenna"),
        chains(std::move(starved)) {}
  std::vector<int> chains;
};

// Double-phase-shifter split of A e^{j phi} into e^{j phi1} + e^{j phi2}:
// phi1,2 = phi +- arccos(A/2). Requires 0 <= A <= 2.
std::pair<double, double> dps_decompose(double amplitude, double phase);

// Per-entry DPS phases for the nonzero support of F_A (zeros elsewhere).
struct DpsRealization {
  MatR phi1;
  MatR phi2;
};
DpsRealization dps_realization(const MatC& f_a);

// Row-by-row analog update for the dynamic DPS architecture: per row pick the
// RF chain and clipped least-squares gain minimizing
//   K(i,j) = ||F_D[j,:]||^2 |F_A[i,j]|^2 - 2 Re{F_A[i,j] c_ij},
// c_ij = F_D[j,:] Ttilde^H[i,:]. Ties break to the lowest column index.
MatC update_abf_dym_dps(const MatC& t_tilde, const MatC& f_d);

// Analog update minimizing ||Ttilde - F_A F_D||_F^2 over the architecture's
// feasible set. FC runs cyclic per-element coordinate descent from
// f_a_init (required for FC, ignored otherwise).
MatC update_abf(Architecture arch, const MatC& t_tilde, const MatC& f_d,
                const MatC* f_a_init = nullptr);

// F_D = (F_A^H F_A)^{-1} F_A^H Ttilde. Throws EmptySubarrayError when a chain
// owns no antennas (singular Gram diagonal).
MatC update_dbf(const MatC& f_a, const MatC& t_tilde);

// Gauge rebalance for DPS architectures: scales each analog column so its
// largest gain is 1 and inversely scales the digital row. The product
// F_A F_D is invariant; keeps both factors' scales bounded across the
// alternation.
void rebalance_dps_columns(MatC& f_a, MatC& f_d);

// MMSE receive scalars, delta_u = (sum_v |h_u^H t_v|^2 + sigma_u^2)^{-1} t_u^H h_u.
std::vector<cxd> update_receivers(const MatC& t_eff, const CommChannels& channels,
                                  const ScenarioConfig& cfg);

// WMMSE weights, w_u = 1 + SINR_u(T) >= 1.
std::vector<double> update_weights(const MatC& t_eff, const CommChannels& channels,
                                   const ScenarioConfig& cfg);

}  // namespace dfrc
