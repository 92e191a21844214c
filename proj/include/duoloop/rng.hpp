#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

#include "duoloop/errors.hpp"

namespace duoloop {

/// splitmix64 step: advances the state and returns a mixed 64-bit value.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9E3779B97F4A7C15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Small deterministic random stream.
///
/// Every Monte-Carlo shot (and every independently sampled grid point) gets
/// its own stream derived from (seed, index), so results are bit-identical
/// regardless of evaluation order and never depend on std::random_device or
/// the distribution implementations shipped with a particular libstdc++.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t state) : state_(state) {}

  /// Stream for element `index` of the family identified by `seed`.
  /// An optional `tag` keeps independent consumers (shots, readout noise,
  /// spectra, ...) from colliding on the same index space.
  static RandomStream for_index(std::uint64_t seed, std::uint64_t index,
                                std::uint64_t tag = 0) {
    std::uint64_t s = seed;
    std::uint64_t a = splitmix64(s);
    s ^= tag * 0xD1342543DE82EF95ULL + 0x2545F4914F6CDD1DULL;
    std::uint64_t b = splitmix64(s);
    std::uint64_t state = a ^ (b + 0x9E3779B97F4A7C15ULL * (index + 1));
    return RandomStream(state);
  }

  std::uint64_t next_u64() { return splitmix64(state_); }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  /// Standard normal via Box-Muller (one value per call, no cached spare,
  /// so the draw count per shot is easy to reason about).
  double normal() {
    double u1 = 0.0;
    do {
      u1 = uniform();
    } while (u1 <= 0.0);
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
  }

  /// Poisson sample.  Knuth's product method below lambda = 30, a rounded
  /// normal approximation above (adequate for photon-counting noise, and
  /// keeps the draw deterministic and cheap for large means).
  long poisson(double lambda) {
    if (!(lambda >= 0.0)) {
      throw InvalidParameterError("poisson: lambda must be >= 0");
    }
    if (lambda == 0.0) return 0;
    if (lambda < 30.0) {
      const double limit = std::exp(-lambda);
      long k = 0;
      double p = 1.0;
      do {
        ++k;
        p *= uniform();
      } while (p > limit);
      return k - 1;
    }
    const double g = normal();
    const double value = std::round(lambda + std::sqrt(lambda) * g);
    return value < 0.0 ? 0 : static_cast<long>(value);
  }

 private:
  std::uint64_t state_;
};

}  // namespace duoloop
