#pragma once

#include <cmath>
#include <numbers>

namespace duoloop {

/// Vacuum permeability [T·m/A].
inline constexpr double kMu0 = 4.0e-7 * std::numbers::pi;

/// Lengths cross the public interfaces in micrometres; everything internal
/// is SI (metres, tesla, hertz, seconds).
inline constexpr double kUm = 1e-6;

inline constexpr double um_to_m(double um) { return um * kUm; }
inline constexpr double m_to_um(double m) { return m / kUm; }
inline constexpr double ns_to_s(double ns) { return ns * 1e-9; }
inline constexpr double s_to_ns(double s) { return s * 1e9; }

/// Wrap a phase into [0, 2*pi).
inline double wrap_phase(double phase) {
  const double two_pi = 2.0 * std::numbers::pi;
  double w = std::fmod(phase, two_pi);
  if (w < 0.0) w += two_pi;
  // fmod can return exactly two_pi after the correction when phase is a
  // tiny negative number; fold that back to zero.
  if (w >= two_pi) w = 0.0;
  return w;
}

}  // namespace duoloop
