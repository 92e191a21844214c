#include <doctest.h>

#include <cmath>
#include <complex>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <vector>

#include "duoloop/csv.hpp"
#include "duoloop/errors.hpp"
#include "duoloop/magnetostatics.hpp"
#include "oracles.hpp"

using namespace duoloop;

namespace {

constexpr double kPi = std::numbers::pi;

LoopSpec unit_circle(double diameter_um, int segments = kDefaultCircleSegments) {
  return LoopSpec::circle_um(diameter_um, Point3{}, Phasor(1.0, 0.0), +1,
                             segments);
}

std::vector<double> grid(double lo, double hi, int n) {
  std::vector<double> xs(n);
  for (int i = 0; i < n; ++i) xs[i] = lo + (hi - lo) * i / (n - 1);
  return xs;
}

}  // namespace

TEST_CASE("centre field matches mu0*I/d") {
  const std::vector<LoopSpec> loops{unit_circle(15.0)};
  const FieldPhasor f = field_at(loops, Point3{});
  const double expected = oracles::circle_centre_field(1.0, um_to_m(15.0));
  CHECK(f.bz.real() == doctest::Approx(expected).epsilon(1e-6));
  CHECK(f.bz.imag() == doctest::Approx(0.0).epsilon(1e-18));
  CHECK(std::abs(f.bx) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(std::abs(f.by) == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("on-axis field matches the ring closed form") {
  const std::vector<LoopSpec> loops{unit_circle(15.0)};
  for (double z_um : {1.0, 5.0, 20.0, 100.0}) {
    const FieldPhasor f = field_at(loops, Point3::from_um(0.0, 0.0, z_um));
    const double expected =
        oracles::circle_on_axis_bz(1.0, um_to_m(7.5), um_to_m(z_um));
    CHECK(f.bz.real() == doctest::Approx(expected).epsilon(1e-6));
  }
}

TEST_CASE("off-axis field matches the elliptic-integral closed form") {
  const std::vector<LoopSpec> loops{unit_circle(15.0)};
  for (double rho_um : {3.0, 20.0, 60.0}) {
    for (double z_um : {1.0, 4.0}) {
      const FieldPhasor f =
          field_at(loops, Point3::from_um(rho_um, 0.0, z_um));
      const auto oracle = oracles::circle_off_axis(1.0, um_to_m(7.5),
                                                   um_to_m(rho_um),
                                                   um_to_m(z_um));
      CHECK(f.bz.real() == doctest::Approx(oracle.b_z).epsilon(1e-5));
      // rho direction here is +x
      CHECK(f.bx.real() == doctest::Approx(oracle.b_rho).epsilon(1e-5));
      // By vanishes by symmetry up to floating-point cancellation noise.
      CHECK(std::abs(f.by) < 1e-10 * std::abs(f.bz));
    }
  }
}

TEST_CASE("rectangle centre field matches the four-wire closed form") {
  const std::vector<LoopSpec> loops{
      LoopSpec::rectangle_um(38.0, 38.0, Point3{}, Phasor(1.0, 0.0))};
  const FieldPhasor f = field_at(loops, Point3{});
  const double expected =
      oracles::rectangle_centre_field(1.0, um_to_m(38.0), um_to_m(38.0));
  CHECK(f.bz.real() == doctest::Approx(expected).epsilon(1e-9));
}

TEST_CASE("field linearity, superposition, and phase factor") {
  const LoopSpec a = unit_circle(15.0);
  const LoopSpec b =
      LoopSpec::circle_um(38.0, Point3{}, Phasor(0.3, 1.2));
  const Point3 p = Point3::from_um(22.0, -7.0, 3.0);

  const FieldPhasor fa = field_at(std::vector<LoopSpec>{a}, p);
  const FieldPhasor fb = field_at(std::vector<LoopSpec>{b}, p);
  const FieldPhasor fab = field_at(std::vector<LoopSpec>{a, b}, p);
  CHECK(fab.bz.real() == doctest::Approx(fa.bz.real() + fb.bz.real()));
  CHECK(fab.bz.imag() == doctest::Approx(fa.bz.imag() + fb.bz.imag()));
  CHECK(fab.bx.real() == doctest::Approx(fa.bx.real() + fb.bx.real()));

  // Scaling the drive scales the phasor linearly.
  const FieldPhasor f3 =
      field_at(std::vector<LoopSpec>{a.with_drive(Phasor(3.0, 0.0))}, p);
  CHECK(f3.bz.real() == doctest::Approx(3.0 * fa.bz.real()).epsilon(1e-12));

  // A drive phase multiplies by exactly exp(i*phi).
  const double phi = 0.77;
  const FieldPhasor fp =
      field_at(std::vector<LoopSpec>{a.with_drive(Phasor(1.0, phi))}, p);
  const std::complex<double> rot(std::cos(phi), std::sin(phi));
  CHECK(fp.bz.real() == doctest::Approx((fa.bz * rot).real()).epsilon(1e-12));
  CHECK(fp.bz.imag() == doctest::Approx((fa.bz * rot).imag()).epsilon(1e-12));
}

TEST_CASE("equal and opposite concentric loops cancel everywhere") {
  const LoopSpec pos = unit_circle(15.0);
  const LoopSpec neg = pos.with_drive(Phasor(1.0, kPi));
  const std::vector<LoopSpec> pair{pos, neg};
  const std::vector<LoopSpec> single{pos};
  for (double x_um : {0.0, 5.0, 30.0, 90.0}) {
    const Point3 p = Point3::from_um(x_um, 0.0, 1.0);
    const FieldPhasor f = field_at(pair, p);
    // Cancellation down to floating-point rounding of the single-loop power.
    CHECK(f.power_total() < 1e-24 * field_at(single, p).power_total());
  }
}

TEST_CASE("mirror symmetry of a centred loop") {
  const std::vector<LoopSpec> loops{unit_circle(15.0)};
  const FieldPhasor plus = field_at(loops, Point3::from_um(12.0, 0.0, 2.0));
  const FieldPhasor minus = field_at(loops, Point3::from_um(-12.0, 0.0, 2.0));
  CHECK(plus.bz.real() == doctest::Approx(minus.bz.real()).epsilon(1e-12));
  CHECK(plus.bx.real() == doctest::Approx(-minus.bx.real()).epsilon(1e-12));
}

TEST_CASE("winding reversal flips the field sign") {
  const LoopSpec ccw = unit_circle(15.0);
  const LoopSpec cw =
      LoopSpec::circle_um(15.0, Point3{}, Phasor(1.0, 0.0), -1);
  const Point3 p = Point3::from_um(4.0, 3.0, 2.0);
  const FieldPhasor f1 = field_at(std::vector<LoopSpec>{ccw}, p);
  const FieldPhasor f2 = field_at(std::vector<LoopSpec>{cw}, p);
  CHECK(f1.bz.real() == doctest::Approx(-f2.bz.real()).epsilon(1e-12));
  CHECK(f1.bx.real() == doctest::Approx(-f2.bx.real()).epsilon(1e-12));
}

TEST_CASE("empty loop list gives the zero field") {
  const FieldPhasor f =
      field_at(std::vector<LoopSpec>{}, Point3::from_um(1.0, 2.0, 3.0));
  CHECK(f.power_total() == 0.0);
}

TEST_CASE("points on the wire raise SingularPointError") {
  const LoopSpec loop = unit_circle(15.0);
  const auto segs = discretize(loop);
  const std::vector<LoopSpec> loops{loop};
  CHECK_THROWS_AS(field_at(loops, segs.front().start), SingularPointError);
  // Midpoint of a segment is singular too.
  const Point3 mid = 0.5 * (segs.front().start + segs.front().end);
  CHECK_THROWS_AS(field_at(loops, mid), SingularPointError);
}

TEST_CASE("collinear-but-outside points are finite") {
  // A point on the extension of a rectangle side: that segment contributes
  // nothing, the rest a finite field.
  const std::vector<LoopSpec> loops{
      LoopSpec::rectangle_um(38.0, 38.0, Point3{}, Phasor(1.0, 0.0), +1, 4)};
  const FieldPhasor f = field_at(loops, Point3::from_um(40.0, -19.0, 0.0));
  CHECK(std::isfinite(f.bz.real()));
  CHECK(std::isfinite(f.power_total()));
  CHECK(f.power_total() > 0.0);
}

TEST_CASE("power_db reference behaviour") {
  CHECK(power_db(1.0, 1.0) == 0.0);
  CHECK(power_db(0.03, 1.0) == doctest::Approx(-15.2288).epsilon(1e-4));
  CHECK(power_db(100.0, 1.0) == doctest::Approx(20.0));
  CHECK(std::isinf(power_db(0.0, 1.0)));
  CHECK(power_db(0.0, 1.0) < 0.0);
  CHECK(std::isinf(power_db(0.5 * kPowerFloor, 1.0)));
  CHECK_THROWS_AS(power_db(1.0, 0.0), InvalidParameterError);
  CHECK_THROWS_AS(power_db(1.0, -2.0), InvalidParameterError);
}

TEST_CASE("line_scan samples and references") {
  const std::vector<LoopSpec> loops{unit_circle(15.0)};
  const auto xs = grid(2.0, 50.0, 25);
  const LineScan scan = line_scan(loops, Point3{}, Point3{1.0, 0.0, 0.0}, xs,
                                  1.0);
  REQUIRE(scan.samples.size() == xs.size());
  CHECK(scan.start.z_um() == doctest::Approx(1.0));
  CHECK(norm(scan.direction) == doctest::Approx(1.0));
  CHECK(scan.reference_power ==
        doctest::Approx(scan.samples.front().power_total()));

  // Sample positions honour start + t*direction with the z offset applied.
  const FieldPhasor direct =
      field_at(loops, Point3::from_um(xs[3], 0.0, 1.0));
  CHECK(scan.samples[3].bz.real() ==
        doctest::Approx(direct.bz.real()).epsilon(1e-12));

  // Direction is normalized internally.
  const LineScan scaled = line_scan(loops, Point3{}, Point3{2.0, 0.0, 0.0},
                                    xs, 1.0);
  CHECK(scaled.samples[5].bz.real() ==
        doctest::Approx(scan.samples[5].bz.real()).epsilon(1e-12));

  SUBCASE("invalid inputs") {
    CHECK_THROWS_AS(line_scan(loops, Point3{}, Point3{}, xs, 1.0),
                    InvalidParameterError);
    CHECK_THROWS_AS(
        line_scan(loops, Point3{}, Point3{1.0, 0.0, 0.0}, {5.0}, 1.0),
        InvalidParameterError);
    CHECK_THROWS_AS(line_scan(loops, Point3{}, Point3{1.0, 0.0, 0.0},
                              {5.0, 4.0}, 1.0),
                    InvalidParameterError);
    CHECK_THROWS_AS(line_scan(loops, Point3{}, Point3{1.0, 0.0, 0.0}, xs, 1.0,
                              -1.0),
                    InvalidParameterError);
  }
}

TEST_CASE("power-law fits on synthetic scans") {
  // Hand-built scan with |Bz|^2 = x^-4 exactly.
  LineScan scan;
  scan.direction = Point3{1.0, 0.0, 0.0};
  scan.positions_um = grid(10.0, 100.0, 40);
  for (double x : scan.positions_um) {
    FieldPhasor f;
    f.bz = std::complex<double>(1.0 / (x * x), 0.0);
    scan.samples.push_back(f);
  }
  scan.reference_power = 1.0;
  scan.reference_power_z = 1.0;

  const PowerLawFit fit = fit_power_law(scan, 10.0, 100.0, PowerMetric::kZ);
  CHECK(fit.exponent == doctest::Approx(-4.0).epsilon(1e-3));
  CHECK(fit.r_squared == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(fit.n_samples == 40);

  const PowerLawFit amp = amplitude_decay_exponent(scan, 10.0, 100.0);
  CHECK(amp.exponent == doctest::Approx(-2.0).epsilon(1e-3));

  SUBCASE("narrow windows are rejected") {
    CHECK_THROWS_AS(fit_power_law(scan, 10.0, 14.0), FitDomainError);
    CHECK_THROWS_AS(fit_power_law(scan, 200.0, 300.0), FitDomainError);
    CHECK_THROWS_AS(fit_power_law(scan, 100.0, 10.0), InvalidParameterError);
  }
}

TEST_CASE("single loop amplitude exponents: near plateau, far dipole") {
  const std::vector<LoopSpec> loops{unit_circle(15.0)};

  // On-axis far field decays as |B| ~ z^-3.
  const LineScan far = line_scan(loops, Point3{}, Point3{0.0, 0.0, 1.0},
                                 grid(100.0, 500.0, 60));
  const PowerLawFit dipole = amplitude_decay_exponent(far, 100.0, 500.0);
  CHECK(dipole.exponent == doctest::Approx(-3.0).epsilon(0.034));

  // Just above the loop plane the on-axis field barely varies.
  const LineScan near = line_scan(loops, Point3{}, Point3{0.0, 0.0, 1.0},
                                  grid(0.1, 1.0, 20));
  const PowerLawFit plateau = amplitude_decay_exponent(near, 0.1, 1.0);
  CHECK(std::abs(plateau.exponent) < 0.02);
}

TEST_CASE("line_scan_table carries the pinned columns") {
  const std::vector<LoopSpec> loops{unit_circle(15.0)};
  const LineScan scan = line_scan(loops, Point3{}, Point3{1.0, 0.0, 0.0},
                                  grid(2.0, 20.0, 10), 1.0);
  const Table table = line_scan_table(scan, "single");
  CHECK(table.name == "single");
  const std::vector<std::string> expected{
      "x_um", "z_um", "Bx_re", "Bx_im", "By_re", "By_im",
      "Bz_re", "Bz_im", "P_total", "P_z", "P_total_db", "P_z_db"};
  CHECK(table.columns == expected);
  REQUIRE(table.rows.size() == 10);
  CHECK(table.rows[0][0] == doctest::Approx(2.0));
  CHECK(table.rows[0][1] == doctest::Approx(1.0));  // lifted scan height
  CHECK(table.rows[0][10] == doctest::Approx(0.0));  // dB ref = first sample
}

TEST_CASE("csv formatting and atomic writes") {
  CHECK(format_csv_value(-std::numeric_limits<double>::infinity()) == "-inf");
  CHECK(format_csv_value(std::numeric_limits<double>::infinity()) == "inf");
  CHECK(format_csv_value(1.5) == "1.5");

  Table t;
  t.name = "demo";
  t.columns = {"a", "b"};
  t.add_row({1.0, 2.0});
  t.add_row({3.0, -std::numeric_limits<double>::infinity()});
  const std::string text = to_csv(t);
  CHECK(text == "a,b\n1,2\n3,-inf\n");

  const auto dir = std::filesystem::temp_directory_path() / "duoloop_csv_test";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  const auto path = dir / "demo.csv";
  write_csv(t, path);
  std::ifstream in(path);
  std::string content((std::istreambuf_iterator<char>(in)),
                      std::istreambuf_iterator<char>());
  CHECK(content == text);
  // No temporary files were left behind by the atomic rename.
  int entries = 0;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    (void)entry;
    ++entries;
  }
  CHECK(entries == 1);
  std::filesystem::remove_all(dir);
}
