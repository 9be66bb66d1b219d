#pragma once

// Named polygon boundaries, draw-mode drafting, and ENTER/EXIT detection.
// Point-in-polygon runs in planar (lon, lat) coordinates, which is adequate
// at incident scale.

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "fireline/expected.hpp"
#include "fireline/geo.hpp"

namespace fireline::geofence {

struct BoundaryId {
  std::uint64_t value = 0;
  auto operator<=>(const BoundaryId&) const = default;
};

struct Boundary {
  BoundaryId id;
  std::string name;
  std::vector<GeoPoint> vertices;

  bool operator==(const Boundary&) const = default;
};

struct DraftBoundary {
  std::string name;
  std::vector<GeoPoint> vertices;

  bool operator==(const DraftBoundary&) const = default;
};

DraftBoundary draft_add_vertex(DraftBoundary draft, const GeoPoint& p);
DraftBoundary draft_undo(DraftBoundary draft);
DraftBoundary draft_clear(DraftBoundary draft);

enum class Rejection { kTooFewVertices, kMissingName, kSelfIntersecting };
std::string_view to_string(Rejection r);

// Consumes the draft; on rejection nothing is built.
Expected<Boundary, Rejection> finalize(DraftBoundary draft, BoundaryId id);

// True when consecutive edges only meet at their shared vertex and no two
// non-adjacent edges touch.
bool is_simple_polygon(const std::vector<GeoPoint>& vertices);

// Even-odd ray casting; points on an edge or vertex count as inside.
bool contains(const Boundary& b, const GeoPoint& p);
bool contains(const std::vector<GeoPoint>& polygon, const GeoPoint& p);

enum class EventKind { kEnter, kExit };
std::string_view to_string(EventKind k);

struct GeofenceEvent {
  FirefighterId unit;
  BoundaryId boundary;
  EventKind kind = EventKind::kEnter;
  double at = 0.0;

  bool operator==(const GeofenceEvent&) const = default;
};

// (unit, boundary) pairs currently inside.
using Membership = std::set<std::pair<FirefighterId, BoundaryId>>;

struct UpdateResult {
  std::vector<GeofenceEvent> events;
  Membership membership;
};

// Units mapped to nullopt (no GPS fix) keep their previous membership.
// Memberships of boundaries no longer present are dropped without events.
UpdateResult update(const std::map<FirefighterId, std::optional<GeoPoint>>& positions,
                    const Membership& previous, const std::vector<Boundary>& boundaries, double now);

}  // namespace fireline::geofence
