#include "fireline/geofence.hpp"

#include <algorithm>

namespace fireline::geofence {

namespace {

struct Vec {
  double x;
  double y;
};

Vec planar(const GeoPoint& p) { return {p.lon, p.lat}; }

double cross(Vec o, Vec a, Vec b) { return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x); }

int orientation(Vec o, Vec a, Vec b) {
  const double c = cross(o, a, b);
  return (c > 0.0) - (c < 0.0);
}

bool within_box(Vec a, Vec b, Vec p) {
  return std::min(a.x, b.x) <= p.x && p.x <= std::max(a.x, b.x) && std::min(a.y, b.y) <= p.y &&
         p.y <= std::max(a.y, b.y);
}

bool on_segment(Vec a, Vec b, Vec p) { return orientation(a, b, p) == 0 && within_box(a, b, p); }

bool segments_intersect(Vec p1, Vec p2, Vec q1, Vec q2) {
  const int d1 = orientation(q1, q2, p1);
  const int d2 = orientation(q1, q2, p2);
  const int d3 = orientation(p1, p2, q1);
  const int d4 = orientation(p1, p2, q2);
  if (d1 * d2 < 0 && d3 * d4 < 0) return true;
  return (d1 == 0 && within_box(q1, q2, p1)) || (d2 == 0 && within_box(q1, q2, p2)) ||
         (d3 == 0 && within_box(p1, p2, q1)) || (d4 == 0 && within_box(p1, p2, q2));
}

}  // namespace

DraftBoundary draft_add_vertex(DraftBoundary draft, const GeoPoint& p) {
  draft.vertices.push_back(p);
  return draft;
}

DraftBoundary draft_undo(DraftBoundary draft) {
  if (!draft.vertices.empty()) draft.vertices.pop_back();
  return draft;
}

DraftBoundary draft_clear(DraftBoundary draft) {
  draft.vertices.clear();
  return draft;
}

std::string_view to_string(Rejection r) {
  switch (r) {
    case Rejection::kTooFewVertices:
      return "TooFewVertices";
    case Rejection::kMissingName:
      return "MissingName";
    case Rejection::kSelfIntersecting:
      return "SelfIntersecting";
  }
  return "?";
}

std::string_view to_string(EventKind k) { return k == EventKind::kEnter ? "ENTER" : "EXIT"; }

bool is_simple_polygon(const std::vector<GeoPoint>& vertices) {
  const std::size_t n = vertices.size();
  if (n < 3) return false;
  std::vector<Vec> v;
  v.reserve(n);
  for (const auto& p : vertices) v.push_back(planar(p));

  for (std::size_t i = 0; i < n; ++i) {
    const Vec a = v[i];
    const Vec b = v[(i + 1) % n];
    if (a.x == b.x && a.y == b.y) return false;
    for (std::size_t j = i + 1; j < n; ++j) {
      const Vec c = v[j];
      const Vec d = v[(j + 1) % n];
      const bool adjacent = j == i + 1 || (i == 0 && j == n - 1);
      if (!adjacent) {
        if (segments_intersect(a, b, c, d)) return false;
        continue;
      }
      // Adjacent edges share one vertex; they may not fold back onto each other.
      const Vec shared = (j == i + 1) ? b : a;
      const Vec other_i = (j == i + 1) ? a : b;
      const Vec other_j = (j == i + 1) ? d : c;
      if (orientation(shared, other_i, other_j) == 0) {
        const double dot = (other_i.x - shared.x) * (other_j.x - shared.x) +
                           (other_i.y - shared.y) * (other_j.y - shared.y);
        if (dot > 0.0) return false;
      }
    }
  }
  return true;
}

Expected<Boundary, Rejection> finalize(DraftBoundary draft, BoundaryId id) {
  if (draft.vertices.size() < 3) return unexpected(Rejection::kTooFewVertices);
  if (draft.name.find_first_not_of(" \t\r\n") == std::string::npos) {
    return unexpected(Rejection::kMissingName);
  }
  if (!is_simple_polygon(draft.vertices)) return unexpected(Rejection::kSelfIntersecting);
  return Boundary{id, std::move(draft.name), std::move(draft.vertices)};
}

bool contains(const std::vector<GeoPoint>& polygon, const GeoPoint& point) {
  const std::size_t n = polygon.size();
  if (n == 0) return false;
  const Vec p = planar(point);
  bool inside = false;
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Vec a = planar(polygon[i]);
    const Vec b = planar(polygon[j]);
    if (on_segment(a, b, p)) return true;
    if ((a.y > p.y) != (b.y > p.y)) {
      const double x_cross = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
      if (p.x < x_cross) inside = !inside;
    }
  }
  return inside;
}

bool contains(const Boundary& b, const GeoPoint& p) { return contains(b.vertices, p); }

UpdateResult update(const std::map<FirefighterId, std::optional<GeoPoint>>& positions,
                    const Membership& previous, const std::vector<Boundary>& boundaries, double now) {
  UpdateResult result;
  std::set<BoundaryId> live;
  for (const auto& b : boundaries) live.insert(b.id);
  for (const auto& m : previous) {
    if (live.contains(m.second)) result.membership.insert(m);
  }

  for (const auto& [unit, position] : positions) {
    if (!position) continue;
    for (const auto& b : boundaries) {
      const auto key = std::make_pair(unit, b.id);
      const bool was = result.membership.contains(key);
      const bool is = contains(b, *position);
      if (is && !was) {
        result.events.push_back(GeofenceEvent{unit, b.id, EventKind::kEnter, now});
        result.membership.insert(key);
      } else if (!is && was) {
        result.events.push_back(GeofenceEvent{unit, b.id, EventKind::kExit, now});
        result.membership.erase(key);
      }
    }
  }
  return result;
}

}  // namespace fireline::geofence
