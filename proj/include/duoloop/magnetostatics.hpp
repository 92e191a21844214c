#pragma once

#include <complex>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "duoloop/csv.hpp"
#include "duoloop/geometry.hpp"

namespace duoloop {

/// Powers below this [T^2] are reported as -inf dB instead of a huge
/// negative number, so "numerically zero" is visible in outputs.
inline constexpr double kPowerFloor = 1e-30;

/// Field requests closer than this [m] to a current segment are an error.
inline constexpr double kSingularDistance = 1e-9;

/// Complex field phasor at a point [T].  Each component carries the
/// amplitude and phase of the sinusoidal steady-state field; the drive
/// frequency itself never appears in the quasi-static field problem.
struct FieldPhasor {
  std::complex<double> bx{0.0, 0.0};
  std::complex<double> by{0.0, 0.0};
  std::complex<double> bz{0.0, 0.0};

  double power_total() const {
    return std::norm(bx) + std::norm(by) + std::norm(bz);
  }
  double power_z() const { return std::norm(bz); }
  double power_transverse() const { return std::norm(bx) + std::norm(by); }

  FieldPhasor& operator+=(const FieldPhasor& other) {
    bx += other.bx;
    by += other.by;
    bz += other.bz;
    return *this;
  }
};

/// Loop reduced to its segment chain with the complex drive factored out.
/// Discretizing once and reusing the chain is what makes dense scans cheap.
struct DiscretizedLoop {
  std::vector<Segment> segments;
  std::complex<double> drive;
};

std::vector<DiscretizedLoop> discretize_all(const std::vector<LoopSpec>& loops);

/// Real-valued field of a segment chain carrying 1 A [T].  Uses the exact
/// finite-segment expression; contributions from segments the point is
/// collinear with vanish identically.  Throws SingularPointError if the
/// point lies within kSingularDistance of any segment.
Point3 field_per_unit_current(const std::vector<Segment>& segments,
                              const Point3& p);

/// Superposed complex field of a set of driven loops at a point.
FieldPhasor field_at(const std::vector<DiscretizedLoop>& loops,
                     const Point3& p);
FieldPhasor field_at(const std::vector<LoopSpec>& loops, const Point3& p);

/// 10*log10(power/reference) with the kPowerFloor sentinel: anything below
/// the floor maps to -infinity.  `reference` must be > 0.
double power_db(double power, double reference);

/// Samples of the field along a straight line.
struct LineScan {
  Point3 start;       // first sample position (z offset already applied)
  Point3 direction;   // unit vector
  std::vector<double> positions_um;   // distance along `direction` from start
  std::vector<FieldPhasor> samples;
  double reference_power = 0.0;    // dB reference for total power [T^2]
  double reference_power_z = 0.0;  // dB reference for |Bz|^2 [T^2]
};

/// Scan the field along start + t*direction (t from `positions_um`), with
/// the whole line lifted by `z_offset_um`.  References default to the
/// first-sample powers and are clamped up to kPowerFloor so dB columns stay
/// well defined even for an all-zero scan.
LineScan line_scan(const std::vector<LoopSpec>& loops, const Point3& start,
                   const Point3& direction,
                   const std::vector<double>& positions_um,
                   double z_offset_um = 0.0,
                   std::optional<double> reference_power = std::nullopt,
                   std::optional<double> reference_power_z = std::nullopt);

enum class PowerMetric { kTotal, kZ };

struct PowerLawFit {
  double exponent = 0.0;
  double std_error = 0.0;
  double r_squared = 0.0;
  int n_samples = 0;
};

/// Least-squares slope of log10(power) vs log10(position) over the window
/// [x_min_um, x_max_um].  Requires >= 5 usable samples with positive
/// position and power inside the window.
PowerLawFit fit_power_law(const LineScan& scan, double x_min_um,
                          double x_max_um,
                          PowerMetric metric = PowerMetric::kTotal);

/// Same fit on log10(|B|) instead of log10(power); for a single small loop
/// the result approaches the dipole value -3 far from the loop.
PowerLawFit amplitude_decay_exponent(const LineScan& scan, double x_min_um,
                                     double x_max_um);

/// Scan as a table with the columns
/// x_um,z_um,Bx_re,Bx_im,By_re,By_im,Bz_re,Bz_im,P_total,P_z,P_total_db,P_z_db
/// where x_um is the distance along the scan direction.
Table line_scan_table(const LineScan& scan, const std::string& name);

void write_line_scan_csv(const LineScan& scan,
                         const std::filesystem::path& path);

}  // namespace duoloop
