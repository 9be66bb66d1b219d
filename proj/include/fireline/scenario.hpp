#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "fireline/geo.hpp"

namespace fireline::sim {

inline constexpr double kDefaultBatteryLifeS = 8.0 * 3600.0;

struct Waypoint {
  double t = 0.0;
  GeoPoint position;
  bool gps_fix = true;
};

struct VitalsPoint {
  double t = 0.0;
  double hr_bpm = 0.0;
  double pulse_bpm = 0.0;
  double spo2_pct = 0.0;
  double body_c = 0.0;
  double ambient_c = 0.0;
};

struct HeadingPoint {
  double t = 0.0;
  double yaw = 0.0;
};

struct UnitScript {
  FirefighterId id;
  std::vector<Waypoint> waypoints;
  std::vector<VitalsPoint> vitals;
  std::vector<HeadingPoint> heading;  // empty means a fixed north heading
  std::vector<double> jerk_events;
  double helm_period_s = 1.0;
  double strap_period_s = 1.0;
};

// Incident-commander actions scripted into a run.
struct BoundaryAction {
  double t = 0.0;
  std::string name;
  std::vector<GeoPoint> vertices;
};

struct RecallAction {
  double t = 0.0;
  FirefighterId id;
};

struct Scenario {
  std::string name;
  GeoPoint origin;
  std::optional<GeoPoint> base;  // base-station radio; defaults to origin
  double duration_s = 0.0;
  double battery_life_s = kDefaultBatteryLifeS;
  std::vector<UnitScript> units;
  std::vector<BoundaryAction> boundaries;
  std::vector<RecallAction> recalls;

  GeoPoint base_position() const { return base.value_or(origin); }
};

// `path` is a JSON-pointer-like location of the offending entry.
class SchemaError : public std::runtime_error {
 public:
  SchemaError(std::string path, const std::string& message)
      : std::runtime_error(path + ": " + message), path_(std::move(path)) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

Scenario parse_scenario(const nlohmann::json& doc);
Scenario parse_scenario(const std::string& text);
Scenario load_scenario(const std::filesystem::path& file);

nlohmann::json to_json(const Scenario& s);

}  // namespace fireline::sim
