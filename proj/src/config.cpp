#include "fireline/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace fireline {

namespace {

using nlohmann::json;

void read_number(const json& obj, const char* key, double& out, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) return;
  if (!it->is_number()) throw ConfigError(where + "." + key + ": expected a number");
  out = it->get<double>();
}

vitals::Thresholds thresholds_from(const json& j) {
  vitals::Thresholds th;
  if (!j.is_object()) throw ConfigError("thresholds: expected an object");
  read_number(j, "hr_high_bpm", th.hr_high_bpm, "thresholds");
  read_number(j, "hr_ramp_start_bpm", th.hr_ramp_start_bpm, "thresholds");
  read_number(j, "spo2_low_pct", th.spo2_low_pct, "thresholds");
  read_number(j, "spo2_ramp_floor_pct", th.spo2_ramp_floor_pct, "thresholds");
  read_number(j, "body_warn_c", th.body_warn_c, "thresholds");
  read_number(j, "body_crit_c", th.body_crit_c, "thresholds");
  read_number(j, "ambient_warn_c", th.ambient_warn_c, "thresholds");
  read_number(j, "ambient_crit_c", th.ambient_crit_c, "thresholds");
  read_number(j, "jerk_accel_ms2", th.jerk_accel_ms2, "thresholds");
  read_number(j, "stale_after_s", th.stale_after_s, "thresholds");
  read_number(j, "hysteresis", th.hysteresis, "thresholds");
  if (auto msg = th.validate(); !msg.empty()) throw ConfigError("thresholds: " + msg);
  return th;
}

channel::ChannelConfig channel_from(const json& j) {
  channel::ChannelConfig c;
  if (!j.is_object()) throw ConfigError("channel: expected an object");
  read_number(j, "max_range_m", c.max_range_m, "channel");
  read_number(j, "data_rate_bps", c.data_rate_bps, "channel");
  read_number(j, "random_loss_prob", c.random_loss_prob, "channel");
  read_number(j, "frequency_mhz", c.frequency_mhz, "channel");
  read_number(j, "tx_power_dbm", c.tx_power_dbm, "channel");
  if (auto it = j.find("rng_seed"); it != j.end()) {
    if (!it->is_number_unsigned()) throw ConfigError("channel.rng_seed: expected a non-negative integer");
    c.rng_seed = it->get<std::uint64_t>();
  }
  if (auto msg = c.validate(); !msg.empty()) throw ConfigError("channel: " + msg);
  return c;
}

GeoPoint point_from(const json& j, const std::string& where) {
  if (!j.is_object() || !j.contains("lat") || !j.contains("lon") || !j["lat"].is_number() ||
      !j["lon"].is_number()) {
    throw ConfigError(where + ": expected {lat, lon}");
  }
  GeoPoint p{j["lat"].get<double>(), j["lon"].get<double>()};
  if (!is_valid(p)) throw ConfigError(where + ": coordinates out of range");
  return p;
}

std::vector<FirefighterId> roster_from(const json& j) {
  if (!j.is_array()) throw ConfigError("incident.roster: expected an array");
  std::vector<FirefighterId> out;
  std::set<FirefighterId> seen;
  for (const auto& v : j) {
    if (!v.is_number_unsigned() || v.get<std::uint64_t>() > FirefighterId::kMax) {
      throw ConfigError("incident.roster: ids must be integers in [0, 9999]");
    }
    const FirefighterId id(static_cast<std::uint32_t>(v.get<std::uint64_t>()));
    if (!seen.insert(id).second) throw ConfigError("incident.roster: duplicate id " + std::to_string(id.value));
    out.push_back(id);
  }
  return out;
}

}  // namespace

ServiceConfig parse_config(const json& doc) {
  if (!doc.is_object()) throw ConfigError("config: expected a JSON object");
  ServiceConfig cfg;
  if (auto it = doc.find("mode"); it != doc.end()) {
    const auto mode = it->is_string() ? it->get<std::string>() : std::string();
    if (mode == "simulation") {
      cfg.mode = InputMode::kSimulation;
    } else if (mode == "line") {
      cfg.mode = InputMode::kLine;
    } else {
      throw ConfigError("mode: expected \"simulation\" or \"line\"");
    }
  }
  if (auto it = doc.find("input"); it != doc.end()) {
    if (!it->is_string()) throw ConfigError("input: expected a string");
    cfg.input = it->get<std::string>();
  }
  read_number(doc, "recall_grace_s", cfg.recall_grace_s, "config");
  if (auto it = doc.find("incident"); it != doc.end()) {
    const json& inc = *it;
    if (!inc.is_object()) throw ConfigError("incident: expected an object");
    if (auto a = inc.find("address"); a != inc.end()) {
      if (!a->is_string()) throw ConfigError("incident.address: expected a string");
      cfg.incident.address = a->get<std::string>();
    }
    if (auto o = inc.find("origin"); o != inc.end()) {
      cfg.incident.origin = point_from(*o, "incident.origin");
      cfg.has_origin = true;
    }
    if (auto r = inc.find("roster"); r != inc.end()) {
      cfg.incident.roster = roster_from(*r);
      cfg.has_roster = true;
    }
  }
  if (auto it = doc.find("thresholds"); it != doc.end()) cfg.incident.thresholds = thresholds_from(*it);
  if (auto it = doc.find("channel"); it != doc.end()) cfg.incident.channel = channel_from(*it);
  return cfg;
}

ServiceConfig load_config(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError("cannot open config file " + file.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return parse_config(json::parse(ss.str()));
  } catch (const json::parse_error& e) {
    throw ConfigError(file.string() + ": " + e.what());
  }
}

json to_json(const vitals::Thresholds& th) {
  return {{"hr_high_bpm", th.hr_high_bpm},
          {"hr_ramp_start_bpm", th.hr_ramp_start_bpm},
          {"spo2_low_pct", th.spo2_low_pct},
          {"spo2_ramp_floor_pct", th.spo2_ramp_floor_pct},
          {"body_warn_c", th.body_warn_c},
          {"body_crit_c", th.body_crit_c},
          {"ambient_warn_c", th.ambient_warn_c},
          {"ambient_crit_c", th.ambient_crit_c},
          {"jerk_accel_ms2", th.jerk_accel_ms2},
          {"stale_after_s", th.stale_after_s},
          {"hysteresis", th.hysteresis}};
}

json to_json(const channel::ChannelConfig& c) {
  return {{"max_range_m", c.max_range_m},   {"data_rate_bps", c.data_rate_bps},
          {"random_loss_prob", c.random_loss_prob}, {"rng_seed", c.rng_seed},
          {"frequency_mhz", c.frequency_mhz}, {"tx_power_dbm", c.tx_power_dbm}};
}

json to_json(const IncidentConfig& c) {
  json roster = json::array();
  for (const auto& id : c.roster) roster.push_back(id.value);
  return {{"address", c.address},
          {"origin", {{"lat", c.origin.lat}, {"lon", c.origin.lon}}},
          {"roster", roster},
          {"thresholds", to_json(c.thresholds)},
          {"channel", to_json(c.channel)}};
}

IncidentConfig incident_from_json(const json& doc) {
  IncidentConfig c;
  c.address = doc.value("address", std::string());
  c.origin = point_from(doc.at("origin"), "origin");
  c.roster = roster_from(doc.at("roster"));
  c.thresholds = thresholds_from(doc.at("thresholds"));
  c.channel = channel_from(doc.at("channel"));
  return c;
}

}  // namespace fireline
