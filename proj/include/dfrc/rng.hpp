#pragma once

#include <cmath>
#include <complex>
#include <cstdint>

namespace dfrc {

// SplitMix64 generator. Chosen over std::mt19937 so that streams are cheap to
// derive from (seed, stream, index) counters and draws do not depend on the
// standard library's unspecified distribution algorithms.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform on [0, 1) from the top 53 bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Standard normal via Box-Muller; second value of each pair is cached.
  double normal() {
    if (has_cached_) {
      has_cached_ = false;
      return cached_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * M_PI * u2;
    cached_ = r * std::sin(a);
    has_cached_ = true;
    return r * std::cos(a);
  }

  // Circularly symmetric complex normal CN(0, 1).
  std::complex<double> cnormal() {
    const double re = normal();
    const double im = normal();
    return {re * M_SQRT1_2, im * M_SQRT1_2};
  }

 private:
  std::uint64_t state_;
  double cached_ = 0.0;
  bool has_cached_ = false;
};

// Stateless seed derivation: hashes (master, stream, index) through one
// SplitMix64 round each, so adding draws or sweep points never perturbs the
// seeds of earlier ones.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream,
                                 std::uint64_t index) {
  Rng h(master ^ (0x6a09e667f3bcc909ULL + stream * 0x9e3779b97f4a7c15ULL));
  std::uint64_t x = h.next_u64() ^ (index * 0xd1342543de82ef95ULL + 0x2545f4914f6cdd1dULL);
  Rng h2(x);
  return h2.next_u64();
}

}  // namespace dfrc
