#pragma once

#include <vector>

#include "duoloop/fitting.hpp"
#include "duoloop/geometry.hpp"
#include "duoloop/magnetostatics.hpp"

namespace duoloop {

/// Coarse-grid resolution used before golden-section refinement when
/// hunting field nulls along a scan axis.
inline constexpr int kNullSearchGridPoints = 1000;

/// Drive settings that null the z-field of a concentric loop pair at one
/// target point, plus the local/remote power bookkeeping that goes with it.
struct CancellationSolution {
  double ratio = 0.0;         // outer amplitude / inner amplitude
  double phase_offset = 0.0;  // outer phase - inner phase (pi by design)
  Point3 target;
  Point3 local_site;  // loop centre lifted to the target height

  /// |Bz|^2 at the target relative to |Bz|^2 at the local site [dB].
  double residual_power_db = 0.0;
  /// Total |B|^2 at the target relative to the local site [dB].
  double residual_total_db = 0.0;
  /// Local-site power with both loops driven over inner-loop-only power;
  /// < 1 because the counter-driven outer loop costs a little local drive.
  double local_power_factor = 0.0;
  /// Per-unit-current power ratio inner/outer at the local site: how much
  /// more strongly the small loop couples to its own site than the large
  /// loop does.
  double centre_power_ratio = 0.0;
};

/// Solve for the outer-loop drive that cancels Bz at `target`.  The loops
/// must be concentric and coplanar; the phase offset is fixed at pi and the
/// amplitude ratio starts from the closed-form per-unit-field quotient and
/// is refined by a secant root-find on the residual z-field.
/// Throws UnsolvableTargetError when the outer loop has no z-field at the
/// target or the two z-fields have opposite signs there.
CancellationSolution solve(const LoopSpec& inner, const LoopSpec& outer,
                           const Point3& target);

/// The loop pair with the solution's drive applied to the outer loop
/// (inner drive is kept as given).
std::vector<LoopSpec> apply(const CancellationSolution& solution,
                            const LoopSpec& inner, const LoopSpec& outer);

/// Residual |Bz|^2 at an arbitrary probe, in dB relative to the local
/// site, with the solution applied.
double residual_at(const CancellationSolution& solution,
                   const LoopSpec& inner, const LoopSpec& outer,
                   const Point3& probe);

struct RatioSweepPoint {
  double factor = 0.0;       // multiplier applied to the solved ratio
  double ratio = 0.0;        // resulting outer/inner amplitude ratio
  double null_x_um = 0.0;    // null position along the scan axis
  double null_power_db = 0.0;  // |Bz|^2 at the null rel. local site
  bool interior = false;     // false if the minimum sat on a window edge
};

/// Detune the solved amplitude ratio by each factor and track where the
/// field null moves along the axis from the loop centre through the target
/// (searched on [x_min_um, x_max_um] at the target height).  Coarse grid
/// first, golden-section refinement after.
std::vector<RatioSweepPoint> sweep_ratio(const LoopSpec& inner,
                                         const LoopSpec& outer,
                                         const CancellationSolution& solution,
                                         const std::vector<double>& factors,
                                         double x_min_um, double x_max_um);

struct PhaseSweepResult {
  std::vector<double> phase;     // relative drive phase [rad]
  std::vector<double> p_local;   // |Bz|^2 at the local probe [T^2]
  std::vector<double> p_remote;  // |Bz|^2 at the remote probe [T^2]
  SinusoidFit remote_fit;        // offset + amplitude*cos(phase - phase0)
  double residual_rel = 0.0;     // fit rms residual / fit amplitude
  double remote_min_phase = 0.0;
  double local_modulation_depth = 0.0;  // 1 - min/max of p_local
};

/// Sweep the relative drive phase at a fixed amplitude ratio and record the
/// z-power at a local and a remote probe.  The remote curve follows the
/// two-phasor interference law a + b*cos(dphi - phi0) to numerical
/// precision in this quasi-static model.
PhaseSweepResult sweep_phase(const LoopSpec& inner, const LoopSpec& outer,
                             double ratio, const std::vector<double>& phases,
                             const Point3& local_probe,
                             const Point3& remote_probe);

/// Residual z-power at `probe` under an amplitude imbalance of
/// `imbalance_db` (<= 0) between the branches, relative to the unmitigated
/// inner-only z-power at the same probe.  Equals the square of the
/// amplitude error epsilon = 10^(imbalance_db/20).
double extinction_ratio(const CancellationSolution& solution,
                        const LoopSpec& inner, const LoopSpec& outer,
                        const Point3& probe, double imbalance_db);

}  // namespace duoloop
