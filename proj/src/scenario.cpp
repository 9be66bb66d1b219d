#include "fireline/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "fireline/codec.hpp"

namespace fireline::sim {

namespace {

using nlohmann::json;

const json& require(const json& obj, const std::string& key, const std::string& path) {
  if (!obj.is_object()) throw SchemaError(path, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) throw SchemaError(path + "/" + key, "missing field");
  return *it;
}

double number(const json& v, const std::string& path) {
  if (!v.is_number()) throw SchemaError(path, "expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw SchemaError(path, "expected a finite number");
  return d;
}

double number_field(const json& obj, const std::string& key, const std::string& path) {
  return number(require(obj, key, path), path + "/" + key);
}

double number_or(const json& obj, const std::string& key, double fallback, const std::string& path) {
  auto it = obj.find(key);
  return it == obj.end() ? fallback : number(*it, path + "/" + key);
}

void check_bound(double v, double lo, double hi, const std::string& path) {
  if (v < lo || v > hi) {
    std::ostringstream msg;
    msg << "value " << v << " outside [" << lo << ", " << hi << "]";
    throw SchemaError(path, msg.str());
  }
}

GeoPoint point(const json& v, const std::string& path) {
  GeoPoint p{number_field(v, "lat", path), number_field(v, "lon", path)};
  check_bound(p.lat, -90.0, 90.0, path + "/lat");
  check_bound(p.lon, -180.0, 180.0, path + "/lon");
  return p;
}

const json& array(const json& v, const std::string& path, bool non_empty) {
  if (!v.is_array()) throw SchemaError(path, "expected an array");
  if (non_empty && v.empty()) throw SchemaError(path, "timeline must not be empty");
  return v;
}

// Timelines start at t=0 and strictly increase.
template <typename Point>
void check_timeline(const std::vector<Point>& pts, const std::string& path) {
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const std::string at = path + "/" + std::to_string(i) + "/t";
    if (i == 0 && pts[i].t != 0.0) throw SchemaError(at, "timeline must start at t=0");
    if (i > 0 && !(pts[i].t > pts[i - 1].t)) throw SchemaError(at, "timeline must be strictly increasing");
  }
}

FirefighterId unit_id(const json& v, const std::string& path) {
  if (!v.is_number_integer()) throw SchemaError(path, "expected an integer id");
  const auto raw = v.get<long long>();
  if (raw < 0 || raw > FirefighterId::kMax) throw SchemaError(path, "id outside [0, 9999]");
  return FirefighterId(static_cast<std::uint32_t>(raw));
}

UnitScript parse_unit(const json& u, const std::string& path) {
  UnitScript s;
  s.id = unit_id(require(u, "id", path), path + "/id");
  s.helm_period_s = number_or(u, "helm_period_s", 1.0, path);
  s.strap_period_s = number_or(u, "strap_period_s", 1.0, path);
  if (!(s.helm_period_s > 0.0)) throw SchemaError(path + "/helm_period_s", "period must be > 0");
  if (!(s.strap_period_s > 0.0)) throw SchemaError(path + "/strap_period_s", "period must be > 0");

  const std::string wp_path = path + "/waypoints";
  const json& wps = array(require(u, "waypoints", path), wp_path, true);
  for (std::size_t i = 0; i < wps.size(); ++i) {
    const std::string p = wp_path + "/" + std::to_string(i);
    Waypoint w;
    w.t = number_field(wps[i], "t", p);
    w.position = point(wps[i], p);
    if (auto it = wps[i].find("gps_fix"); it != wps[i].end()) {
      if (!it->is_boolean()) throw SchemaError(p + "/gps_fix", "expected a boolean");
      w.gps_fix = it->get<bool>();
    }
    s.waypoints.push_back(w);
  }
  check_timeline(s.waypoints, wp_path);

  const std::string vp_path = path + "/vitals";
  const json& vps = array(require(u, "vitals", path), vp_path, true);
  for (std::size_t i = 0; i < vps.size(); ++i) {
    const std::string p = vp_path + "/" + std::to_string(i);
    VitalsPoint v;
    v.t = number_field(vps[i], "t", p);
    v.hr_bpm = number_field(vps[i], "hr", p);
    v.pulse_bpm = number_field(vps[i], "pulse", p);
    v.spo2_pct = number_field(vps[i], "spo2", p);
    v.body_c = number_field(vps[i], "body_c", p);
    v.ambient_c = number_field(vps[i], "ambient_c", p);
    check_bound(v.hr_bpm, 0.0, codec::kHeartRateMaxBpm, p + "/hr");
    check_bound(v.pulse_bpm, 0.0, codec::kHeartRateMaxBpm, p + "/pulse");
    check_bound(v.spo2_pct, 0.0, 100.0, p + "/spo2");
    check_bound(v.body_c, codec::kBodyMinC, codec::kBodyMaxC, p + "/body_c");
    check_bound(v.ambient_c, codec::kAmbientMinC, codec::kAmbientMaxC, p + "/ambient_c");
    s.vitals.push_back(v);
  }
  check_timeline(s.vitals, vp_path);

  if (auto it = u.find("heading"); it != u.end()) {
    const std::string hp_path = path + "/heading";
    const json& hps = array(*it, hp_path, true);
    for (std::size_t i = 0; i < hps.size(); ++i) {
      const std::string p = hp_path + "/" + std::to_string(i);
      s.heading.push_back({number_field(hps[i], "t", p), number_field(hps[i], "yaw", p)});
    }
    check_timeline(s.heading, hp_path);
  }

  if (auto it = u.find("jerk_events"); it != u.end()) {
    const std::string jp = path + "/jerk_events";
    const json& js = array(*it, jp, false);
    for (std::size_t i = 0; i < js.size(); ++i) {
      const double t = number(js[i], jp + "/" + std::to_string(i));
      if (t < 0.0) throw SchemaError(jp + "/" + std::to_string(i), "jerk time must be >= 0");
      s.jerk_events.push_back(t);
    }
    std::sort(s.jerk_events.begin(), s.jerk_events.end());
  }
  return s;
}

}  // namespace

Scenario parse_scenario(const json& doc) {
  Scenario sc;
  const std::string root;
  const json& name = require(doc, "name", root);
  if (!name.is_string()) throw SchemaError("/name", "expected a string");
  sc.name = name.get<std::string>();
  sc.origin = point(require(doc, "origin", root), "/origin");
  if (auto it = doc.find("base"); it != doc.end()) sc.base = point(*it, "/base");
  sc.duration_s = number_field(doc, "duration_s", root);
  if (!(sc.duration_s > 0.0)) throw SchemaError("/duration_s", "duration must be > 0");
  sc.battery_life_s = number_or(doc, "battery_life_s", kDefaultBatteryLifeS, root);
  if (!(sc.battery_life_s > 0.0)) throw SchemaError("/battery_life_s", "battery life must be > 0");

  const json& units = array(require(doc, "units", root), "/units", true);
  std::set<FirefighterId> ids;
  for (std::size_t i = 0; i < units.size(); ++i) {
    const std::string p = "/units/" + std::to_string(i);
    UnitScript u = parse_unit(units[i], p);
    if (!ids.insert(u.id).second) throw SchemaError(p + "/id", "duplicate unit id");
    sc.units.push_back(std::move(u));
  }

  if (auto it = doc.find("boundaries"); it != doc.end()) {
    const json& bs = array(*it, "/boundaries", false);
    for (std::size_t i = 0; i < bs.size(); ++i) {
      const std::string p = "/boundaries/" + std::to_string(i);
      BoundaryAction b;
      b.t = number_or(bs[i], "t", 0.0, p);
      const json& nm = require(bs[i], "name", p);
      if (!nm.is_string()) throw SchemaError(p + "/name", "expected a string");
      b.name = nm.get<std::string>();
      const json& vs = array(require(bs[i], "vertices", p), p + "/vertices", false);
      for (std::size_t k = 0; k < vs.size(); ++k) {
        b.vertices.push_back(point(vs[k], p + "/vertices/" + std::to_string(k)));
      }
      sc.boundaries.push_back(std::move(b));
    }
  }

  if (auto it = doc.find("recalls"); it != doc.end()) {
    const json& rs = array(*it, "/recalls", false);
    for (std::size_t i = 0; i < rs.size(); ++i) {
      const std::string p = "/recalls/" + std::to_string(i);
      sc.recalls.push_back({number_field(rs[i], "t", p), unit_id(require(rs[i], "id", p), p + "/id")});
    }
  }
  return sc;
}

Scenario parse_scenario(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw SchemaError("", std::string("not a JSON document: ") + e.what());
  }
  return parse_scenario(doc);
}

Scenario load_scenario(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw SchemaError("", "cannot open scenario file " + file.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str());
}

nlohmann::json to_json(const Scenario& s) {
  json doc;
  doc["name"] = s.name;
  doc["origin"] = {{"lat", s.origin.lat}, {"lon", s.origin.lon}};
  if (s.base) doc["base"] = {{"lat", s.base->lat}, {"lon", s.base->lon}};
  doc["duration_s"] = s.duration_s;
  doc["battery_life_s"] = s.battery_life_s;
  doc["units"] = json::array();
  for (const auto& u : s.units) {
    json ju;
    ju["id"] = u.id.value;
    ju["helm_period_s"] = u.helm_period_s;
    ju["strap_period_s"] = u.strap_period_s;
    ju["waypoints"] = json::array();
    for (const auto& w : u.waypoints) {
      ju["waypoints"].push_back(
          {{"t", w.t}, {"lat", w.position.lat}, {"lon", w.position.lon}, {"gps_fix", w.gps_fix}});
    }
    ju["vitals"] = json::array();
    for (const auto& v : u.vitals) {
      ju["vitals"].push_back({{"t", v.t},
                              {"hr", v.hr_bpm},
                              {"pulse", v.pulse_bpm},
                              {"spo2", v.spo2_pct},
                              {"body_c", v.body_c},
                              {"ambient_c", v.ambient_c}});
    }
    if (!u.heading.empty()) {
      ju["heading"] = json::array();
      for (const auto& h : u.heading) ju["heading"].push_back({{"t", h.t}, {"yaw", h.yaw}});
    }
    ju["jerk_events"] = u.jerk_events;
    doc["units"].push_back(std::move(ju));
  }
  doc["boundaries"] = json::array();
  for (const auto& b : s.boundaries) {
    json vs = json::array();
    for (const auto& v : b.vertices) vs.push_back({{"lat", v.lat}, {"lon", v.lon}});
    doc["boundaries"].push_back({{"t", b.t}, {"name", b.name}, {"vertices", vs}});
  }
  doc["recalls"] = json::array();
  for (const auto& r : s.recalls) doc["recalls"].push_back({{"t", r.t}, {"id", r.id.value}});
  return doc;
}

}  // namespace fireline::sim
