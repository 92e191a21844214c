#include "duoloop/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "duoloop/errors.hpp"

namespace duoloop {

namespace {

void require_finite(double v, const char* name) {
  if (!std::isfinite(v)) {
    throw InvalidParameterError(std::string(name) + " must be finite");
  }
}

void require_positive(double v, const char* name) {
  require_finite(v, name);
  if (v <= 0.0) {
    throw InvalidParameterError(std::string(name) + " must be > 0");
  }
}

void require_winding(int winding) {
  if (winding != +1 && winding != -1) {
    throw InvalidParameterError("winding must be +1 or -1");
  }
}

}  // namespace

Point3 Point3::from_um(double x_um, double y_um, double z_um) {
  require_finite(x_um, "x_um");
  require_finite(y_um, "y_um");
  require_finite(z_um, "z_um");
  return Point3{um_to_m(x_um), um_to_m(y_um), um_to_m(z_um)};
}

Point3 operator+(const Point3& a, const Point3& b) {
  return Point3{a.x + b.x, a.y + b.y, a.z + b.z};
}

Point3 operator-(const Point3& a, const Point3& b) {
  return Point3{a.x - b.x, a.y - b.y, a.z - b.z};
}

Point3 operator*(double s, const Point3& a) {
  return Point3{s * a.x, s * a.y, s * a.z};
}

double dot(const Point3& a, const Point3& b) {
  return a.x * b.x + a.y * b.y + a.z * b.z;
}

Point3 cross(const Point3& a, const Point3& b) {
  return Point3{a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z,
                a.x * b.y - a.y * b.x};
}

double norm(const Point3& a) { return std::sqrt(dot(a, a)); }

Phasor::Phasor(double amplitude, double phase) {
  require_finite(amplitude, "amplitude");
  require_finite(phase, "phase");
  if (amplitude < 0.0) {
    throw InvalidParameterError("amplitude must be >= 0");
  }
  amplitude_ = amplitude;
  phase_ = wrap_phase(phase);
}

std::complex<double> Phasor::value() const {
  return std::polar(amplitude_, phase_);
}

LoopSpec LoopSpec::circle_um(double diameter_um, const Point3& centre,
                             const Phasor& drive, int winding,
                             int segment_count) {
  require_positive(diameter_um, "diameter_um");
  require_winding(winding);
  if (segment_count < kMinLoopSegments) {
    throw InvalidParameterError("segment_count must be >= " +
                                std::to_string(kMinLoopSegments));
  }
  LoopSpec loop;
  loop.shape = LoopShape::kCircle;
  loop.diameter = um_to_m(diameter_um);
  loop.centre = centre;
  loop.winding = winding;
  loop.drive = drive;
  loop.segment_count = segment_count;
  return loop;
}

LoopSpec LoopSpec::rectangle_um(double width_um, double height_um,
                                const Point3& centre, const Phasor& drive,
                                int winding, int segments_per_side) {
  require_positive(width_um, "width_um");
  require_positive(height_um, "height_um");
  require_winding(winding);
  if (segments_per_side < 0) {
    throw InvalidParameterError("segments_per_side must be >= 0");
  }
  if (segments_per_side > 0 &&
      4 * segments_per_side < kMinLoopSegments) {
    throw InvalidParameterError("segments_per_side must give >= " +
                                std::to_string(kMinLoopSegments) +
                                " segments in total");
  }
  LoopSpec loop;
  loop.shape = LoopShape::kRectangle;
  loop.width = um_to_m(width_um);
  loop.height = um_to_m(height_um);
  loop.centre = centre;
  loop.winding = winding;
  loop.drive = drive;
  loop.segment_count = segments_per_side;  // 0 = auto from max length rule
  return loop;
}

LoopSpec LoopSpec::with_drive(const Phasor& new_drive) const {
  LoopSpec copy = *this;
  copy.drive = new_drive;
  return copy;
}

double LoopSpec::perimeter() const {
  if (shape == LoopShape::kCircle) return std::numbers::pi * diameter;
  return 2.0 * (width + height);
}

namespace {

// Number of pieces a rectangle side of length `side` is cut into.
int rect_side_count(double side, int per_side) {
  if (per_side > 0) return per_side;
  return std::max(1, static_cast<int>(
                         std::ceil(side / kMaxRectSegmentLength)));
}

std::vector<Segment> chain_from_vertices(const std::vector<Point3>& verts) {
  std::vector<Segment> segments;
  segments.reserve(verts.size());
  for (std::size_t i = 0; i + 1 < verts.size(); ++i) {
    segments.push_back(Segment{verts[i], verts[i + 1]});
  }
  return segments;
}

}  // namespace

std::vector<Segment> discretize(const LoopSpec& loop) {
  std::vector<Point3> verts;
  if (loop.shape == LoopShape::kCircle) {
    const int n = loop.segment_count;
    const double r = 0.5 * loop.diameter;
    verts.reserve(n + 1);
    for (int i = 0; i <= n; ++i) {
      // Reuse the first vertex so the chain closes exactly.
      const int j = (i == n) ? 0 : i;
      const double theta =
          loop.winding * 2.0 * std::numbers::pi * j / static_cast<double>(n);
      verts.push_back(Point3{loop.centre.x + r * std::cos(theta),
                             loop.centre.y + r * std::sin(theta),
                             loop.centre.z});
    }
    return chain_from_vertices(verts);
  }

  const int nx = rect_side_count(loop.width, loop.segment_count);
  const int ny = rect_side_count(loop.height, loop.segment_count);
  const double hw = 0.5 * loop.width;
  const double hh = 0.5 * loop.height;
  // Counter-clockwise corner walk as seen from +z.
  const Point3 corners[4] = {
      Point3{loop.centre.x - hw, loop.centre.y - hh, loop.centre.z},
      Point3{loop.centre.x + hw, loop.centre.y - hh, loop.centre.z},
      Point3{loop.centre.x + hw, loop.centre.y + hh, loop.centre.z},
      Point3{loop.centre.x - hw, loop.centre.y + hh, loop.centre.z}};
  verts.reserve(2 * (nx + ny) + 1);
  for (int side = 0; side < 4; ++side) {
    const Point3& a = corners[side];
    const Point3& b = corners[(side + 1) % 4];
    const int n = (side % 2 == 0) ? nx : ny;
    for (int i = 0; i < n; ++i) {
      const double t = static_cast<double>(i) / n;
      verts.push_back(a + t * (b - a));
    }
  }
  verts.push_back(corners[0]);
  if (loop.winding == -1) {
    std::reverse(verts.begin(), verts.end());
  }
  return chain_from_vertices(verts);
}

double polyline_length(const std::vector<Segment>& segments) {
  double total = 0.0;
  for (const Segment& s : segments) total += norm(s.end - s.start);
  return total;
}

double signed_area_z(const std::vector<Segment>& segments) {
  double twice_area = 0.0;
  for (const Segment& s : segments) {
    twice_area += s.start.x * s.end.y - s.end.x * s.start.y;
  }
  return 0.5 * twice_area;
}

SiteLayout hex_sites(double spacing_um, int ring_count) {
  require_positive(spacing_um, "spacing_um");
  if (ring_count < 0) {
    throw InvalidParameterError("ring_count must be >= 0");
  }
  const double s = um_to_m(spacing_um);

  SiteLayout layout;
  layout.spacing = s;
  layout.ring_count = ring_count;
  layout.sites.push_back(Site{Point3{0.0, 0.0, 0.0}, 0});

  struct Entry {
    double angle;
    Site site;
  };
  for (int k = 1; k <= ring_count; ++k) {
    std::vector<Entry> ring;
    // Axial coordinates (i, j); hex distance to the origin is
    // (|i| + |j| + |i + j|) / 2.
    for (int i = -k; i <= k; ++i) {
      for (int j = -k; j <= k; ++j) {
        const int hex_norm = (std::abs(i) + std::abs(j) + std::abs(i + j)) / 2;
        if (hex_norm != k) continue;
        const double x = s * (i + 0.5 * j);
        const double y = s * (std::numbers::sqrt3 / 2.0) * j;
        const double r = std::hypot(x, y);
        int order = 0;
        if (std::abs(r - s) < 1e-9 * s) {
          order = 1;
        } else if (std::abs(r - std::numbers::sqrt3 * s) < 1e-9 * s) {
          order = 2;
        } else if (std::abs(r - 2.0 * s) < 1e-9 * s) {
          order = 3;
        }
        ring.push_back(Entry{wrap_phase(std::atan2(y, x)),
                             Site{Point3{x, y, 0.0}, order}});
      }
    }
    std::sort(ring.begin(), ring.end(),
              [](const Entry& a, const Entry& b) { return a.angle < b.angle; });
    for (const Entry& e : ring) layout.sites.push_back(e.site);
  }
  return layout;
}

}  // namespace duoloop
