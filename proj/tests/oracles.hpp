#pragma once

// Independent reference computations used only by tests. None of these call
// into the library code paths they are checking.

#include <cmath>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "fireline/geo.hpp"

namespace fireline::oracle {

// Great-circle distance by the spherical law of cosines.
inline double law_of_cosines_m(GeoPoint a, GeoPoint b) {
  const double k = std::numbers::pi / 180.0;
  const double c = std::sin(a.lat * k) * std::sin(b.lat * k) +
                   std::cos(a.lat * k) * std::cos(b.lat * k) * std::cos((b.lon - a.lon) * k);
  return 6371000.0 * std::acos(std::fmin(1.0, std::fmax(-1.0, c)));
}

struct Interval {
  double start;
  double end;
};

// Brute-force overlap of half-open intervals.
inline bool intervals_overlap(Interval a, Interval b) { return a.start < b.end && b.start < a.end; }

// Winding number of the closed polygon around p, in planar (lon, lat).
inline int winding_number(const std::vector<GeoPoint>& poly, GeoPoint p) {
  int wn = 0;
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) {
    const GeoPoint& a = poly[i];
    const GeoPoint& b = poly[(i + 1) % n];
    const double is_left = (b.lon - a.lon) * (p.lat - a.lat) - (p.lon - a.lon) * (b.lat - a.lat);
    if (a.lat <= p.lat) {
      if (b.lat > p.lat && is_left > 0) ++wn;
    } else {
      if (b.lat <= p.lat && is_left < 0) --wn;
    }
  }
  return wn;
}

// Distance from p to segment ab in planar degrees.
inline double segment_distance(GeoPoint a, GeoPoint b, GeoPoint p) {
  const double dx = b.lon - a.lon, dy = b.lat - a.lat;
  const double len2 = dx * dx + dy * dy;
  double t = len2 == 0.0 ? 0.0 : ((p.lon - a.lon) * dx + (p.lat - a.lat) * dy) / len2;
  t = std::fmax(0.0, std::fmin(1.0, t));
  const double ex = a.lon + t * dx - p.lon, ey = a.lat + t * dy - p.lat;
  return std::sqrt(ex * ex + ey * ey);
}

// Proper or touching intersection of two closed segments, via parametric solve.
inline bool segments_cross(GeoPoint p1, GeoPoint p2, GeoPoint q1, GeoPoint q2) {
  const double rx = p2.lon - p1.lon, ry = p2.lat - p1.lat;
  const double sx = q2.lon - q1.lon, sy = q2.lat - q1.lat;
  const double denom = rx * sy - ry * sx;
  const double qpx = q1.lon - p1.lon, qpy = q1.lat - p1.lat;
  if (denom == 0.0) {
    if (qpx * ry - qpy * rx != 0.0) return false;  // parallel, not collinear
    const double rr = rx * rx + ry * ry;
    const double t0 = (qpx * rx + qpy * ry) / rr;
    const double t1 = t0 + (sx * rx + sy * ry) / rr;
    return std::fmax(std::fmin(t0, t1), 0.0) <= std::fmin(std::fmax(t0, t1), 1.0);
  }
  const double t = (qpx * sy - qpy * sx) / denom;
  const double u = (qpx * ry - qpy * rx) / denom;
  return t >= 0.0 && t <= 1.0 && u >= 0.0 && u <= 1.0;
}

// A polygon is self-intersecting when any two non-adjacent edges meet.
inline bool has_crossing_edges(const std::vector<GeoPoint>& poly) {
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 2; j < n; ++j) {
      if (i == 0 && j == n - 1) continue;
      if (segments_cross(poly[i], poly[(i + 1) % n], poly[j], poly[(j + 1) % n])) return true;
    }
  }
  return false;
}

// Edge-triggered alert count for an upper threshold with a clearing band,
// scanning the samples one by one.
inline std::vector<std::size_t> upward_crossings(const std::vector<double>& xs, double trip, double band) {
  std::vector<std::size_t> at;
  bool armed = true;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (armed && xs[i] >= trip) {
      at.push_back(i);
      armed = false;
    } else if (!armed && xs[i] < trip - band) {
      armed = true;
    }
  }
  return at;
}

inline std::vector<std::size_t> downward_crossings(const std::vector<double>& xs, double trip, double band) {
  std::vector<double> neg;
  for (double x : xs) neg.push_back(-x);
  // x < trip  <=>  -x > -trip; clear when x > trip + band  <=>  -x < -trip - band.
  std::vector<std::size_t> at;
  bool armed = true;
  for (std::size_t i = 0; i < neg.size(); ++i) {
    if (armed && neg[i] > -trip) {
      at.push_back(i);
      armed = false;
    } else if (!armed && neg[i] < -trip - band) {
      armed = true;
    }
  }
  return at;
}

}  // namespace fireline::oracle
