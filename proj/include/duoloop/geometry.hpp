#pragma once

#include <complex>
#include <vector>

#include "duoloop/units.hpp"

namespace duoloop {

/// Default number of segments a circular loop is discretized into.  At this
/// resolution a further doubling moves |B| at the probe heights used here by
/// well under one part in 1e6, and the on-axis field agrees with the
/// closed-form ring expression to better than 1e-6 relative.
inline constexpr int kDefaultCircleSegments = 4096;

/// Rectangle sides are split so no segment is longer than this [m].
inline constexpr double kMaxRectSegmentLength = 0.5e-6;

/// Minimum total segment count accepted for any loop.
inline constexpr int kMinLoopSegments = 16;

/// Cartesian point, stored in metres.  Constructed from micrometres at the
/// interface boundary.
struct Point3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  static Point3 from_um(double x_um, double y_um, double z_um);

  double x_um() const { return m_to_um(x); }
  double y_um() const { return m_to_um(y); }
  double z_um() const { return m_to_um(z); }
};

Point3 operator+(const Point3& a, const Point3& b);
Point3 operator-(const Point3& a, const Point3& b);
Point3 operator*(double s, const Point3& a);
double dot(const Point3& a, const Point3& b);
Point3 cross(const Point3& a, const Point3& b);
double norm(const Point3& a);

/// Amplitude/phase pair describing a sinusoidal drive current.
/// Amplitude is non-negative; the phase is normalized into [0, 2*pi).
class Phasor {
 public:
  Phasor() : Phasor(0.0, 0.0) {}
  Phasor(double amplitude, double phase);

  double amplitude() const { return amplitude_; }
  double phase() const { return phase_; }
  std::complex<double> value() const;

 private:
  double amplitude_;
  double phase_;
};

enum class LoopShape { kCircle, kRectangle };

/// One drive loop: planar (normal along +z), centred at `centre`, traversed
/// counter-clockwise for winding +1 when seen from +z.
struct LoopSpec {
  LoopShape shape = LoopShape::kCircle;
  double diameter = 0.0;              // circle only [m]
  double width = 0.0, height = 0.0;   // rectangle only [m]
  Point3 centre;
  int winding = +1;
  Phasor drive{1.0, 0.0};
  int segment_count = kDefaultCircleSegments;  // circle: total; rect: per side

  static LoopSpec circle_um(double diameter_um, const Point3& centre,
                            const Phasor& drive, int winding = +1,
                            int segment_count = kDefaultCircleSegments);

  /// `segments_per_side` of 0 selects the smallest count that keeps every
  /// segment at or below kMaxRectSegmentLength.
  static LoopSpec rectangle_um(double width_um, double height_um,
                               const Point3& centre, const Phasor& drive,
                               int winding = +1, int segments_per_side = 0);

  LoopSpec with_drive(const Phasor& new_drive) const;
  double perimeter() const;
};

/// Directed straight current segment.
struct Segment {
  Point3 start;
  Point3 end;
};

/// Break a loop into its segment chain.  Circle vertices lie on the circle
/// itself; consecutive segments share endpoints exactly and the chain closes
/// on its start vertex.
std::vector<Segment> discretize(const LoopSpec& loop);

double polyline_length(const std::vector<Segment>& segments);

/// Signed enclosed area (z-component of the vector area); positive for a
/// counter-clockwise chain viewed from +z.
double signed_area_z(const std::vector<Segment>& segments);

/// Lattice site with its neighbour-order tag relative to the origin:
/// 1, 2, 3 for the first three neighbour shells (distances s, sqrt(3)*s,
/// 2*s), 0 for the origin itself and anything beyond the third shell.
struct Site {
  Point3 position;
  int nn_order = 0;
};

struct SiteLayout {
  double spacing = 0.0;  // [m]
  int ring_count = 0;
  std::vector<Site> sites;  // origin first, then rings in ascending order
};

/// Sites of a triangular (hexagonally packed) lattice: the origin plus
/// `ring_count` full hexagonal rings around it (ring k carries 6*k sites).
/// Within a ring, sites are ordered by polar angle from the +x axis.
SiteLayout hex_sites(double spacing_um, int ring_count);

}  // namespace duoloop
