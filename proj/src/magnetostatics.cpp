#include "duoloop/magnetostatics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "duoloop/csv.hpp"
#include "duoloop/errors.hpp"

namespace duoloop {

namespace {

constexpr double kMu0Over4Pi = 1e-7;
// rho^2 below this [m^2] means the point is on the segment's carrier line;
// the contribution vanishes identically there.
constexpr double kCollinearRho2 = 1e-30;

[[noreturn]] void throw_singular(const Point3& p) {
  throw SingularPointError(
      "field requested within 1 nm of a current segment at (" +
      std::to_string(p.x_um()) + ", " + std::to_string(p.y_um()) + ", " +
      std::to_string(p.z_um()) + ") um");
}

}  // namespace

Point3 field_per_unit_current(const std::vector<Segment>& segments,
                              const Point3& p) {
  Point3 b{0.0, 0.0, 0.0};
  for (const Segment& s : segments) {
    const Point3 d = s.end - s.start;
    const double len = norm(d);
    if (len <= 0.0) continue;
    const Point3 e = (1.0 / len) * d;
    const Point3 r1v = p - s.start;
    const double proj = dot(e, r1v);
    const Point3 c = cross(e, r1v);
    const double rho2 = dot(c, c);
    const double r1 = norm(r1v);
    const double r2 = norm(p - s.end);

    // Distance from p to the segment (not its carrier line).
    const double dist = proj < 0.0  ? r1
                        : proj > len ? r2
                                     : std::sqrt(rho2);
    if (dist < kSingularDistance) throw_singular(p);
    if (rho2 <= kCollinearRho2) continue;

    const double scale =
        kMu0Over4Pi / rho2 * ((len - proj) / r2 + proj / r1);
    b = b + scale * c;
  }
  return b;
}

std::vector<DiscretizedLoop> discretize_all(
    const std::vector<LoopSpec>& loops) {
  std::vector<DiscretizedLoop> out;
  out.reserve(loops.size());
  for (const LoopSpec& loop : loops) {
    out.push_back(DiscretizedLoop{discretize(loop), loop.drive.value()});
  }
  return out;
}

FieldPhasor field_at(const std::vector<DiscretizedLoop>& loops,
                     const Point3& p) {
  FieldPhasor total;
  for (const DiscretizedLoop& loop : loops) {
    const Point3 b = field_per_unit_current(loop.segments, p);
    total.bx += loop.drive * b.x;
    total.by += loop.drive * b.y;
    total.bz += loop.drive * b.z;
  }
  return total;
}

FieldPhasor field_at(const std::vector<LoopSpec>& loops, const Point3& p) {
  return field_at(discretize_all(loops), p);
}

double power_db(double power, double reference) {
  if (!std::isfinite(reference) || reference <= 0.0) {
    throw InvalidParameterError("power_db: reference must be finite and > 0");
  }
  if (std::isnan(power) || power < 0.0) {
    throw InvalidParameterError("power_db: power must be >= 0");
  }
  if (power < kPowerFloor) {
    return -std::numeric_limits<double>::infinity();
  }
  return 10.0 * std::log10(power / reference);
}

LineScan line_scan(const std::vector<LoopSpec>& loops, const Point3& start,
                   const Point3& direction,
                   const std::vector<double>& positions_um,
                   double z_offset_um,
                   std::optional<double> reference_power,
                   std::optional<double> reference_power_z) {
  if (positions_um.size() < 2) {
    throw InvalidParameterError("line_scan: need at least 2 positions");
  }
  for (std::size_t i = 0; i < positions_um.size(); ++i) {
    if (!std::isfinite(positions_um[i])) {
      throw InvalidParameterError("line_scan: positions must be finite");
    }
    if (i > 0 && positions_um[i] <= positions_um[i - 1]) {
      throw InvalidParameterError(
          "line_scan: positions must be strictly increasing");
    }
  }
  const double dir_norm = norm(direction);
  if (dir_norm <= 0.0 || !std::isfinite(dir_norm)) {
    throw InvalidParameterError("line_scan: direction must be non-zero");
  }

  LineScan scan;
  scan.direction = (1.0 / dir_norm) * direction;
  scan.start = start + Point3{0.0, 0.0, um_to_m(z_offset_um)};
  scan.positions_um = positions_um;

  const std::vector<DiscretizedLoop> cached = discretize_all(loops);
  scan.samples.reserve(positions_um.size());
  for (double t_um : positions_um) {
    const Point3 p = scan.start + um_to_m(t_um) * scan.direction;
    scan.samples.push_back(field_at(cached, p));
  }

  const double first_total = scan.samples.front().power_total();
  const double first_z = scan.samples.front().power_z();
  scan.reference_power =
      std::max(reference_power.value_or(first_total), kPowerFloor);
  scan.reference_power_z =
      std::max(reference_power_z.value_or(first_z), kPowerFloor);
  if (reference_power && *reference_power <= 0.0) {
    throw InvalidParameterError("line_scan: reference_power must be > 0");
  }
  if (reference_power_z && *reference_power_z <= 0.0) {
    throw InvalidParameterError("line_scan: reference_power_z must be > 0");
  }
  return scan;
}

namespace {

PowerLawFit loglog_fit(const std::vector<double>& log_x,
                       const std::vector<double>& log_y) {
  const int n = static_cast<int>(log_x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int i = 0; i < n; ++i) {
    sx += log_x[i];
    sy += log_y[i];
    sxx += log_x[i] * log_x[i];
    sxy += log_x[i] * log_y[i];
  }
  const double denom = n * sxx - sx * sx;
  if (denom <= 0.0) {
    throw FitDomainError("power-law fit: degenerate abscissa");
  }
  const double slope = (n * sxy - sx * sy) / denom;
  const double intercept = (sy - slope * sx) / n;

  double rss = 0.0, tss = 0.0;
  const double mean_y = sy / n;
  for (int i = 0; i < n; ++i) {
    const double resid = log_y[i] - (intercept + slope * log_x[i]);
    rss += resid * resid;
    tss += (log_y[i] - mean_y) * (log_y[i] - mean_y);
  }
  PowerLawFit fit;
  fit.exponent = slope;
  fit.n_samples = n;
  fit.r_squared = tss > 0.0 ? 1.0 - rss / tss : 1.0;
  fit.std_error =
      n > 2 ? std::sqrt(rss / (n - 2) * n / denom) : 0.0;
  return fit;
}

PowerLawFit windowed_fit(const LineScan& scan, double x_min_um,
                         double x_max_um, PowerMetric metric,
                         bool amplitude) {
  if (!(x_min_um < x_max_um)) {
    throw InvalidParameterError("fit window: need x_min < x_max");
  }
  std::vector<double> log_x, log_y;
  for (std::size_t i = 0; i < scan.positions_um.size(); ++i) {
    const double x = scan.positions_um[i];
    if (x < x_min_um || x > x_max_um) continue;
    if (x <= 0.0) {
      throw FitDomainError(
          "power-law fit: non-positive position inside the window");
    }
    double value = metric == PowerMetric::kZ ? scan.samples[i].power_z()
                                             : scan.samples[i].power_total();
    if (amplitude) value = std::sqrt(value);
    if (value <= 0.0) {
      throw FitDomainError(
          "power-law fit: non-positive power inside the window");
    }
    log_x.push_back(std::log10(x));
    log_y.push_back(std::log10(value));
  }
  if (log_x.size() < 5) {
    throw FitDomainError("power-law fit: fewer than 5 samples in window [" +
                         std::to_string(x_min_um) + ", " +
                         std::to_string(x_max_um) + "] um");
  }
  return loglog_fit(log_x, log_y);
}

}  // namespace

PowerLawFit fit_power_law(const LineScan& scan, double x_min_um,
                          double x_max_um, PowerMetric metric) {
  return windowed_fit(scan, x_min_um, x_max_um, metric, /*amplitude=*/false);
}

PowerLawFit amplitude_decay_exponent(const LineScan& scan, double x_min_um,
                                     double x_max_um) {
  return windowed_fit(scan, x_min_um, x_max_um, PowerMetric::kTotal,
                      /*amplitude=*/true);
}

Table line_scan_table(const LineScan& scan, const std::string& name) {
  Table table;
  table.name = name;
  table.columns = {"x_um",  "z_um",  "Bx_re",   "Bx_im", "By_re",
                   "By_im", "Bz_re", "Bz_im",   "P_total", "P_z",
                   "P_total_db", "P_z_db"};
  for (std::size_t i = 0; i < scan.positions_um.size(); ++i) {
    const FieldPhasor& f = scan.samples[i];
    // direction is a unit vector, so its raw z component is dimensionless
    const double z_um = scan.start.z_um() + scan.positions_um[i] * scan.direction.z;
    table.add_row({scan.positions_um[i], z_um, f.bx.real(), f.bx.imag(),
                   f.by.real(), f.by.imag(), f.bz.real(), f.bz.imag(),
                   f.power_total(), f.power_z(),
                   power_db(f.power_total(), scan.reference_power),
                   power_db(f.power_z(), scan.reference_power_z)});
  }
  return table;
}

void write_line_scan_csv(const LineScan& scan,
                         const std::filesystem::path& path) {
  write_csv(line_scan_table(scan, "line_scan"), path);
}

}  // namespace duoloop
