#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "duoloop/cancellation.hpp"
#include "duoloop/errors.hpp"

using namespace duoloop;

namespace {

constexpr double kPi = std::numbers::pi;

struct Setup {
  LoopSpec inner = LoopSpec::circle_um(15.0, Point3{}, Phasor(1.0, 0.0));
  LoopSpec outer = LoopSpec::circle_um(38.0, Point3{}, Phasor(1.0, 0.0));
  Point3 target = Point3::from_um(60.0, 0.0, 1.0);
};

std::vector<double> phase_grid(int n) {
  std::vector<double> phases(n);
  for (int i = 0; i < n; ++i) phases[i] = 2.0 * kPi * i / (n - 1);
  return phases;
}

}  // namespace

TEST_CASE("solve nulls Bz at the neighbour site") {
  const Setup s;
  const CancellationSolution sol = solve(s.inner, s.outer, s.target);

  CHECK(sol.phase_offset == kPi);
  CHECK(sol.ratio == doctest::Approx(0.140897206).epsilon(1e-6));
  CHECK(sol.residual_power_db <= -120.0);
  CHECK(sol.local_power_factor == doctest::Approx(0.889493).epsilon(1e-4));
  CHECK(sol.centre_power_ratio == doctest::Approx(6.13804).epsilon(1e-3));
  CHECK(sol.target.x_um() == doctest::Approx(60.0));
  CHECK(sol.local_site.x_um() == doctest::Approx(0.0));
  CHECK(sol.local_site.z_um() == doctest::Approx(1.0));

  SUBCASE("the residual field really is nulled") {
    const auto driven = apply(sol, s.inner, s.outer);
    const FieldPhasor f = field_at(driven, s.target);
    const FieldPhasor local = field_at(driven, sol.local_site);
    CHECK(f.power_z() <= 1e-12 * local.power_z());
  }
}

TEST_CASE("apply keeps the inner drive and counter-drives the outer") {
  const Setup s;
  const LoopSpec inner = s.inner.with_drive(Phasor(2.0, 0.4));
  const CancellationSolution sol = solve(inner, s.outer, s.target);
  const auto driven = apply(sol, inner, s.outer);
  REQUIRE(driven.size() == 2);
  CHECK(driven[0].drive.amplitude() == 2.0);
  CHECK(driven[0].drive.phase() == doctest::Approx(0.4));
  CHECK(driven[1].drive.amplitude() ==
        doctest::Approx(2.0 * sol.ratio).epsilon(1e-12));
  CHECK(driven[1].drive.phase() == doctest::Approx(0.4 + kPi));
}

TEST_CASE("identical loops cancel exactly with unit ratio") {
  const LoopSpec inner = LoopSpec::circle_um(15.0, Point3{}, Phasor(1.0, 0.0));
  const CancellationSolution sol =
      solve(inner, inner, Point3::from_um(60.0, 0.0, 1.0));
  CHECK(sol.ratio == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::isinf(sol.residual_power_db));
  CHECK(sol.residual_power_db < 0.0);
  CHECK(sol.centre_power_ratio == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("far targets approach the dipole-moment ratio") {
  // Far away the fields scale with the loop moments ~ area, so the
  // amplitude ratio approaches (15/38)^2 = 0.1558.
  const Setup s;
  const CancellationSolution sol =
      solve(s.inner, s.outer, Point3::from_um(5000.0, 0.0, 1.0));
  CHECK(sol.ratio > 0.12);
  CHECK(sol.ratio < 0.16);
  CHECK(sol.ratio == doctest::Approx(std::pow(15.0 / 38.0, 2)).epsilon(0.01));
}

TEST_CASE("unsolvable targets are reported") {
  const Setup s;
  // Between the two conductors the z-fields have opposite signs, so no
  // counter-drive with a pi offset can null the sum.
  CHECK_THROWS_AS(solve(s.inner, s.outer, Point3::from_um(12.0, 0.0, 1.0)),
                  UnsolvableTargetError);
}

TEST_CASE("residual_at reproduces the solution bookkeeping") {
  const Setup s;
  const CancellationSolution sol = solve(s.inner, s.outer, s.target);
  CHECK(residual_at(sol, s.inner, s.outer, s.target) <= -120.0);
  CHECK(residual_at(sol, s.inner, s.outer, sol.local_site) ==
        doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("sweep_ratio tracks the null monotonically") {
  const Setup s;
  const CancellationSolution sol = solve(s.inner, s.outer, s.target);
  const std::vector<double> factors{0.9, 1.0, 1.05};
  const auto points = sweep_ratio(s.inner, s.outer, sol, factors, 5.0, 108.0);
  REQUIRE(points.size() == 3);

  // The exact solution pins the null at the target.
  CHECK(points[1].factor == 1.0);
  CHECK(points[1].null_x_um == doctest::Approx(60.0).epsilon(1e-4));
  CHECK(points[1].null_power_db <= -120.0);

  for (const auto& p : points) CHECK(p.interior);
  CHECK(points[0].null_x_um < points[1].null_x_um);
  CHECK(points[1].null_x_um < points[2].null_x_um);
  CHECK(points[0].ratio == doctest::Approx(0.9 * sol.ratio));
}

TEST_CASE("sweep_phase follows the two-phasor interference law") {
  const Setup s;
  const CancellationSolution sol = solve(s.inner, s.outer, s.target);
  const Point3 local = sol.local_site;
  const auto result = sweep_phase(s.inner, s.outer, sol.ratio,
                                  phase_grid(65), local, s.target);

  // Remote power is minimal at the pi offset and follows a + b*cos.
  CHECK(result.remote_min_phase == doctest::Approx(kPi).epsilon(1e-6));
  CHECK(result.residual_rel < 1e-10);
  CHECK(result.remote_fit.r_squared == doctest::Approx(1.0).epsilon(1e-9));

  // 2*pi periodicity: first and last grid points coincide.
  CHECK(result.p_remote.front() ==
        doctest::Approx(result.p_remote.back()).epsilon(1e-9));
  CHECK(result.p_local.front() ==
        doctest::Approx(result.p_local.back()).epsilon(1e-9));

  // At the minimum the remote power matches the solved residual (which is
  // at the numerical floor here).
  double min_remote = result.p_remote.front();
  for (double v : result.p_remote) min_remote = std::min(min_remote, v);
  CHECK(min_remote <= 1e-12 * result.p_remote.front());

  SUBCASE("drive scaling leaves the modulation depth invariant") {
    const auto scaled =
        sweep_phase(s.inner.with_drive(Phasor(3.0, 0.0)), s.outer, sol.ratio,
                    phase_grid(65), local, s.target);
    CHECK(scaled.local_modulation_depth ==
          doctest::Approx(result.local_modulation_depth).epsilon(1e-9));
    CHECK(scaled.p_remote[7] ==
          doctest::Approx(9.0 * result.p_remote[7]).epsilon(1e-9));
  }
}

TEST_CASE("extinction_ratio is the squared amplitude error") {
  const Setup s;
  const CancellationSolution sol = solve(s.inner, s.outer, s.target);
  const double at_20 = extinction_ratio(sol, s.inner, s.outer, s.target,
                                        -20.0);
  CHECK(at_20 == doctest::Approx(0.01).epsilon(1e-6));
  const double at_suppression =
      extinction_ratio(sol, s.inner, s.outer, s.target,
                       10.0 * std::log10(0.03));
  CHECK(at_suppression == doctest::Approx(0.03).epsilon(1e-6));
  // A nearly balanced pair leaves almost nothing.
  CHECK(extinction_ratio(sol, s.inner, s.outer, s.target, -300.0) < 1e-29);
  CHECK_THROWS_AS(extinction_ratio(sol, s.inner, s.outer, s.target, 1.0),
                  InvalidParameterError);
}
