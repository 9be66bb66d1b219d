#pragma once

#include <compare>
#include <cstdint>
#include <functional>

namespace fireline {

inline constexpr double kEarthRadiusM = 6371000.0;

struct GeoPoint {
  double lat = 0.0;
  double lon = 0.0;

  bool operator==(const GeoPoint&) const = default;
};

bool is_valid(const GeoPoint& p);

// Great-circle distance on a sphere of radius kEarthRadiusM.
double haversine_m(const GeoPoint& a, const GeoPoint& b);

// Point reached by travelling `distance_m` from `from` along `bearing_deg`
// (0 = north, 90 = east) on the same sphere.
GeoPoint destination(const GeoPoint& from, double bearing_deg, double distance_m);

/// Hardcoded per-wearable identity; a helm and a strap sharing one id are the
/// same firefighter.
struct FirefighterId {
  static constexpr std::uint32_t kMax = 9999;

  std::uint32_t value = 0;

  constexpr FirefighterId() = default;
  constexpr explicit FirefighterId(std::uint32_t v) : value(v) {}

  constexpr bool valid() const { return value <= kMax; }
  auto operator<=>(const FirefighterId&) const = default;
};

}  // namespace fireline

template <>
struct std::hash<fireline::FirefighterId> {
  std::size_t operator()(const fireline::FirefighterId& id) const noexcept {
    return std::hash<std::uint32_t>{}(id.value);
  }
};
