#include "duoloop/cancellation.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <string>

#include "duoloop/errors.hpp"

namespace duoloop {

namespace {

constexpr double kConcentricTolerance = 1e-12;  // [m]

void require_concentric(const LoopSpec& inner, const LoopSpec& outer) {
  const Point3 d = inner.centre - outer.centre;
  if (std::abs(d.x) > kConcentricTolerance ||
      std::abs(d.y) > kConcentricTolerance ||
      std::abs(d.z) > kConcentricTolerance) {
    throw InvalidParameterError(
        "cancellation: loops must be concentric and coplanar");
  }
}

// Real z-field per unit drive current of one loop.
double unit_bz(const LoopSpec& loop, const Point3& p) {
  const std::vector<Segment> segments = discretize(loop);
  return field_per_unit_current(segments, p).z;
}

double golden_section_min(const std::function<double(double)>& f, double a,
                          double b, double tol) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = b - inv_phi * (b - a);
  double x2 = a + inv_phi * (b - a);
  double f1 = f(x1);
  double f2 = f(x2);
  while (b - a > tol) {
    if (f1 < f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - inv_phi * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + inv_phi * (b - a);
      f2 = f(x2);
    }
  }
  return 0.5 * (a + b);
}

}  // namespace

CancellationSolution solve(const LoopSpec& inner, const LoopSpec& outer,
                           const Point3& target) {
  require_concentric(inner, outer);
  if (inner.drive.amplitude() <= 0.0) {
    throw InvalidParameterError(
        "cancellation: inner drive amplitude must be > 0");
  }
  const Point3 offset = target - inner.centre;
  if (norm(offset) < kSingularDistance) {
    throw InvalidParameterError(
        "cancellation: target must be distinct from the loop centre");
  }

  const double bz_inner = unit_bz(inner, target);
  const double bz_outer = unit_bz(outer, target);
  if (std::abs(bz_outer) < 1e-12 * std::abs(bz_inner) ||
      bz_outer == 0.0) {
    throw UnsolvableTargetError(
        "cancellation: outer loop has no usable z-field at the target");
  }
  if (bz_inner * bz_outer < 0.0) {
    throw UnsolvableTargetError(
        "cancellation: z-fields have opposite signs at the target; an "
        "out-of-phase drive cannot null this point");
  }

  // Closed-form per-unit ratio, then a secant refinement on the signed
  // residual z-field of the fully assembled (discretized, complex-drive)
  // configuration.  The residual is linear in the outer amplitude, so this
  // converges immediately while staying honest about the code path used.
  const double amp_in = inner.drive.amplitude();
  const double phase_in = inner.drive.phase();
  const auto residual_bz = [&](double ratio) {
    const LoopSpec out_driven = outer.with_drive(
        Phasor(ratio * amp_in, phase_in + std::numbers::pi));
    const FieldPhasor f = field_at({inner, out_driven}, target);
    // Rotate the inner drive phase out so the residual is a signed scalar.
    return (f.bz * std::polar(1.0, -phase_in)).real();
  };

  double r0 = bz_inner / bz_outer;
  double r1 = 1.05 * r0;
  double g0 = residual_bz(r0);
  double g1 = residual_bz(r1);
  for (int iter = 0; iter < 32 && std::abs(g1 - g0) > 0.0; ++iter) {
    const double r2 = r1 - g1 * (r1 - r0) / (g1 - g0);
    r0 = r1;
    g0 = g1;
    r1 = r2;
    g1 = residual_bz(r1);
    if (std::abs(r1 - r0) <= 1e-15 * std::abs(r1)) break;
  }
  const double ratio = r1;
  if (!(ratio > 0.0) || !std::isfinite(ratio)) {
    throw UnsolvableTargetError(
        "cancellation: amplitude ratio did not converge to a positive value");
  }

  CancellationSolution sol;
  sol.ratio = ratio;
  sol.phase_offset = std::numbers::pi;
  sol.target = target;
  sol.local_site = Point3{inner.centre.x, inner.centre.y, target.z};

  const std::vector<LoopSpec> driven = apply(sol, inner, outer);
  const std::vector<DiscretizedLoop> cached = discretize_all(driven);
  const FieldPhasor at_target = field_at(cached, target);
  const FieldPhasor at_local = field_at(cached, sol.local_site);
  sol.residual_power_db =
      power_db(at_target.power_z(), at_local.power_z());
  sol.residual_total_db =
      power_db(at_target.power_total(), at_local.power_total());

  const FieldPhasor local_inner_only = field_at({inner}, sol.local_site);
  sol.local_power_factor =
      at_local.power_total() / local_inner_only.power_total();

  const FieldPhasor unit_in =
      field_at({inner.with_drive(Phasor(1.0, 0.0))}, sol.local_site);
  const FieldPhasor unit_out =
      field_at({outer.with_drive(Phasor(1.0, 0.0))}, sol.local_site);
  sol.centre_power_ratio = unit_in.power_total() / unit_out.power_total();
  return sol;
}

std::vector<LoopSpec> apply(const CancellationSolution& solution,
                            const LoopSpec& inner, const LoopSpec& outer) {
  const Phasor outer_drive(solution.ratio * inner.drive.amplitude(),
                           inner.drive.phase() + solution.phase_offset);
  return {inner, outer.with_drive(outer_drive)};
}

double residual_at(const CancellationSolution& solution,
                   const LoopSpec& inner, const LoopSpec& outer,
                   const Point3& probe) {
  const std::vector<DiscretizedLoop> cached =
      discretize_all(apply(solution, inner, outer));
  const double local = field_at(cached, solution.local_site).power_z();
  return power_db(field_at(cached, probe).power_z(), local);
}

std::vector<RatioSweepPoint> sweep_ratio(const LoopSpec& inner,
                                         const LoopSpec& outer,
                                         const CancellationSolution& solution,
                                         const std::vector<double>& factors,
                                         double x_min_um, double x_max_um) {
  if (!(x_min_um < x_max_um)) {
    throw InvalidParameterError("sweep_ratio: need x_min < x_max");
  }
  if (factors.empty()) {
    throw InvalidParameterError("sweep_ratio: factor list is empty");
  }
  // Scan axis: from the loop centre through the target, at target height.
  Point3 axis = solution.target - inner.centre;
  axis.z = 0.0;
  const double axis_len = norm(axis);
  if (axis_len <= 0.0) {
    throw InvalidParameterError(
        "sweep_ratio: target sits on the loop axis; no scan direction");
  }
  const Point3 u = (1.0 / axis_len) * axis;
  const double z = solution.target.z;

  std::vector<RatioSweepPoint> points;
  points.reserve(factors.size());
  for (double factor : factors) {
    if (!(factor > 0.0) || !std::isfinite(factor)) {
      throw InvalidParameterError("sweep_ratio: factors must be > 0");
    }
    CancellationSolution scaled = solution;
    scaled.ratio = factor * solution.ratio;
    const std::vector<DiscretizedLoop> cached =
        discretize_all(apply(scaled, inner, outer));
    const auto pz_at = [&](double x_um) {
      const Point3 p = inner.centre + um_to_m(x_um) * u +
                       Point3{0.0, 0.0, z - inner.centre.z};
      return field_at(cached, p).power_z();
    };

    int best = 0;
    double best_value = std::numeric_limits<double>::infinity();
    const int n = kNullSearchGridPoints;
    for (int i = 0; i < n; ++i) {
      const double x = x_min_um + (x_max_um - x_min_um) * i / (n - 1.0);
      const double v = pz_at(x);
      if (v < best_value) {
        best_value = v;
        best = i;
      }
    }

    RatioSweepPoint point;
    point.factor = factor;
    point.ratio = scaled.ratio;
    point.interior = best > 0 && best < n - 1;
    if (point.interior) {
      const double step = (x_max_um - x_min_um) / (n - 1.0);
      const double a = x_min_um + step * (best - 1);
      const double b = x_min_um + step * (best + 1);
      point.null_x_um = golden_section_min(pz_at, a, b, 1e-4);
    } else {
      point.null_x_um = x_min_um + (x_max_um - x_min_um) * best / (n - 1.0);
    }
    const double local_pz = field_at(cached, scaled.local_site).power_z();
    point.null_power_db = power_db(pz_at(point.null_x_um), local_pz);
    points.push_back(point);
  }
  return points;
}

PhaseSweepResult sweep_phase(const LoopSpec& inner, const LoopSpec& outer,
                             double ratio, const std::vector<double>& phases,
                             const Point3& local_probe,
                             const Point3& remote_probe) {
  require_concentric(inner, outer);
  if (!(ratio > 0.0) || !std::isfinite(ratio)) {
    throw InvalidParameterError("sweep_phase: ratio must be > 0");
  }
  if (phases.size() < 4) {
    throw InvalidParameterError("sweep_phase: need at least 4 phases");
  }

  PhaseSweepResult result;
  result.phase = phases;
  result.p_local.reserve(phases.size());
  result.p_remote.reserve(phases.size());

  const double amp_in = inner.drive.amplitude();
  const double phase_in = inner.drive.phase();
  for (double dphi : phases) {
    if (!std::isfinite(dphi)) {
      throw InvalidParameterError("sweep_phase: phases must be finite");
    }
    const LoopSpec out_driven =
        outer.with_drive(Phasor(ratio * amp_in, phase_in + dphi));
    const std::vector<DiscretizedLoop> cached =
        discretize_all({inner, out_driven});
    result.p_local.push_back(field_at(cached, local_probe).power_z());
    result.p_remote.push_back(field_at(cached, remote_probe).power_z());
  }

  result.remote_fit = fit_sinusoid(result.phase, result.p_remote);
  result.residual_rel =
      result.remote_fit.amplitude > 0.0
          ? result.remote_fit.rms_residual / result.remote_fit.amplitude
          : 0.0;
  result.remote_min_phase =
      wrap_phase(result.remote_fit.phase0 + std::numbers::pi);
  const auto [lmin, lmax] =
      std::minmax_element(result.p_local.begin(), result.p_local.end());
  result.local_modulation_depth = *lmax > 0.0 ? 1.0 - *lmin / *lmax : 0.0;
  return result;
}

double extinction_ratio(const CancellationSolution& solution,
                        const LoopSpec& inner, const LoopSpec& outer,
                        const Point3& probe, double imbalance_db) {
  if (std::isnan(imbalance_db) || imbalance_db > 0.0) {
    throw InvalidParameterError(
        "extinction_ratio: imbalance_db must be <= 0");
  }
  const double epsilon = std::pow(10.0, imbalance_db / 20.0);
  if (epsilon == 0.0) return 0.0;  // perfect balance, perfect extinction

  CancellationSolution imbalanced = solution;
  imbalanced.ratio = solution.ratio * (1.0 + epsilon);
  const double p_residual =
      field_at(apply(imbalanced, inner, outer), probe).power_z();
  const double p_unmitigated = field_at({inner}, probe).power_z();
  if (p_unmitigated <= 0.0) {
    throw InvalidParameterError(
        "extinction_ratio: unmitigated power vanishes at the probe");
  }
  return p_residual / p_unmitigated;
}

}  // namespace duoloop
