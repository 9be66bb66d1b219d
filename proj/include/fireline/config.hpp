#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "fireline/channel.hpp"
#include "fireline/geo.hpp"
#include "fireline/vitals.hpp"

namespace fireline {

struct IncidentConfig {
  std::string address;
  GeoPoint origin;
  std::vector<FirefighterId> roster;
  vitals::Thresholds thresholds;
  channel::ChannelConfig channel;
};

enum class InputMode { kSimulation, kLine };

// Service config file. Origin and roster may be left out; a scenario run
// fills them from the scenario.
struct ServiceConfig {
  InputMode mode = InputMode::kSimulation;
  std::string input = "-";  // line mode: "-" for stdin or a device/file path
  IncidentConfig incident;
  bool has_origin = false;
  bool has_roster = false;
  double recall_grace_s = 2.0;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

ServiceConfig parse_config(const nlohmann::json& doc);
ServiceConfig load_config(const std::filesystem::path& file);

nlohmann::json to_json(const vitals::Thresholds& th);
nlohmann::json to_json(const channel::ChannelConfig& c);
nlohmann::json to_json(const IncidentConfig& c);
IncidentConfig incident_from_json(const nlohmann::json& doc);

}  // namespace fireline
