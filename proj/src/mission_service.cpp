#include "fireline/mission_service.hpp"

#include <algorithm>
#include <memory>
#include <stdexcept>
#include <tuple>

namespace fireline::mission {

using nlohmann::json;

namespace {

json point_json(const GeoPoint& p) { return {{"lat", p.lat}, {"lon", p.lon}}; }

std::string_view liveness(const DeviceTrack& d, double now, const vitals::Thresholds& th) {
  if (!d.seen) return "NONE";
  return vitals::staleness(d.last_seen, now, th) == vitals::Liveness::kLive ? "LIVE" : "OFFLINE";
}

}  // namespace

std::string_view to_string(LedState s) {
  switch (s) {
    case LedState::kOff:
      return "OFF";
    case LedState::kRed:
      return "RED";
    case LedState::kPending:
      return "PENDING";
  }
  return "?";
}

double DeviceTrack::loss_estimate() const {
  if (!seen) return 0.0;
  return 1.0 - static_cast<double>(received) / (static_cast<double>(last_seq) + 1.0);
}

double UnitState::loss_estimate() const {
  double expected = 0.0;
  double got = 0.0;
  for (const DeviceTrack* d : {&helm, &strap}) {
    if (!d->seen) continue;
    expected += static_cast<double>(d->last_seq) + 1.0;
    got += static_cast<double>(d->received);
  }
  return expected == 0.0 ? 0.0 : 1.0 - got / expected;
}

std::optional<double> UnitState::last_seen() const {
  std::optional<double> t;
  for (const DeviceTrack* d : {&helm, &strap}) {
    if (d->seen) t = t ? std::max(*t, d->last_seen) : d->last_seen;
  }
  return t;
}

MissionService::MissionService(IncidentConfig config, std::ostream* log_sink, double recall_grace_s,
                               std::size_t recent_window)
    : config_(std::move(config)),
      recall_grace_s_(recall_grace_s),
      recent_window_(recent_window),
      log_(log_sink) {
  if (auto msg = config_.thresholds.validate(); !msg.empty()) throw std::invalid_argument(msg);
  if (auto msg = config_.channel.validate(); !msg.empty()) throw std::invalid_argument(msg);
  for (const auto& id : config_.roster) {
    UnitState u;
    u.id = id;
    u.stress = vitals::compute_stress(u.hr_bpm, u.spo2_pct, u.body_c, config_.thresholds);
    if (!units_.emplace(id, u).second) throw std::invalid_argument("duplicate roster id");
  }
}

void MissionService::set_uplink(Uplink uplink) {
  std::lock_guard lock(mu_);
  uplink_ = std::move(uplink);
}

void MissionService::set_listener(Listener listener) {
  std::lock_guard lock(mu_);
  listener_ = std::move(listener);
}

void MissionService::publish(const char* type, json body) {
  if (!listener_) return;
  body["type"] = type;
  listener_(body);
}

void MissionService::publish_unit(const UnitState& u) {
  publish("unit-update", {{"unit", to_json(u, now_, config_.thresholds)}});
}

const LogRecord& MissionService::append(double at, RecordKind kind, json payload) {
  const LogRecord& r = log_.append(at, kind, std::move(payload));
  switch (kind) {
    case RecordKind::kAlert:
      publish("alert", {{"record", r.to_json()}});
      break;
    case RecordKind::kGeofence:
      publish("geofence-event", {{"record", r.to_json()}});
      break;
    case RecordKind::kCommand:
      publish("command", {{"record", r.to_json()}});
      break;
    case RecordKind::kBoundaryChange:
      publish("boundary-change", {{"record", r.to_json()}});
      break;
    default:
      break;
  }
  return r;
}

void MissionService::open(double at) {
  std::lock_guard lock(mu_);
  now_ = std::max(now_, at);
  append(now_, RecordKind::kSession,
         {{"event", "open"}, {"config", to_json(config_)}, {"recall_grace_s", recall_grace_s_}});
}

void MissionService::close(double at) {
  std::lock_guard lock(mu_);
  advance_locked(at);
  append(now_, RecordKind::kSession, {{"event", "close"}});
  log_.flush();
}

void MissionService::advance(double now) {
  std::lock_guard lock(mu_);
  advance_locked(now);
}

void MissionService::advance_locked(double now) {
  if (now <= now_) return;
  enum class Due { kOffline, kLed };
  std::vector<std::tuple<double, FirefighterId, Due>> due;
  for (const auto& [id, u] : units_) {
    const auto seen = u.last_seen();
    if (!u.offline && seen && now - *seen > config_.thresholds.stale_after_s) {
      due.emplace_back(*seen + config_.thresholds.stale_after_s, id, Due::kOffline);
    }
    if (u.led == LedState::kPending && u.led_pending_until && *u.led_pending_until <= now) {
      due.emplace_back(*u.led_pending_until, id, Due::kLed);
    }
  }
  std::sort(due.begin(), due.end());
  for (const auto& [due_at, id, what] : due) {
    // Rounding in seen + stale can land a hair before the previous clock value.
    const double at = std::max(due_at, now_);
    UnitState& u = units_.at(id);
    if (what == Due::kOffline) {
      u.offline = true;
      u.alerts.set(vitals::AlertKind::kOffline, true);
      append(at, RecordKind::kAlert,
             {{"unit", id.value}, {"alert", "OFFLINE"}, {"value", *u.last_seen()}});
    } else {
      u.led = LedState::kRed;
      u.led_pending_until.reset();
      append(at, RecordKind::kCommand,
             {{"action", "led_assumed_red"}, {"unit", id.value}, {"confirmed", false}});
    }
    publish_unit(u);
  }
  now_ = now;
}

UnitState& MissionService::unit_for(FirefighterId id, bool& created) {
  auto it = units_.find(id);
  created = it == units_.end();
  if (created) {
    UnitState u;
    u.id = id;
    u.registered = false;
    u.stress = vitals::compute_stress(u.hr_bpm, u.spo2_pct, u.body_c, config_.thresholds);
    it = units_.emplace(id, u).first;
  }
  return it->second;
}

void MissionService::emit_alerts(const std::vector<vitals::AlertEvent>& events) {
  for (const auto& e : events) {
    append(e.at, RecordKind::kAlert,
           {{"unit", e.unit.value}, {"alert", vitals::to_string(e.kind)}, {"value", e.value}});
  }
}

void MissionService::run_geofence(const std::map<FirefighterId, std::optional<GeoPoint>>& positions) {
  auto result = geofence::update(positions, membership_, boundaries_, now_);
  membership_ = std::move(result.membership);
  for (const auto& e : result.events) {
    const auto b = std::find_if(boundaries_.begin(), boundaries_.end(),
                                [&](const geofence::Boundary& x) { return x.id == e.boundary; });
    append(e.at, RecordKind::kGeofence,
           {{"unit", e.unit.value},
            {"boundary", e.boundary.value},
            {"name", b != boundaries_.end() ? b->name : std::string()},
            {"event", geofence::to_string(e.kind)}});
  }
}

std::vector<LogRecord> MissionService::ingest(std::string_view line, double at) {
  std::lock_guard lock(mu_);
  const std::uint64_t first = log_.last_seq();
  advance_locked(at);
  const double t = now_;

  auto decoded = codec::decode(line);
  if (!decoded) {
    append(t, RecordKind::kDecodeError,
           {{"line", std::string(line)},
            {"error", codec::to_string(decoded.error().kind)},
            {"message", decoded.error().message}});
    return log_.since(first);
  }

  const auto accept = [&](UnitState& u, DeviceTrack& track, std::uint64_t seq, const char* device,
                          bool created) -> bool {
    json payload = {{"line", std::string(line)}, {"device", device}, {"unit", u.id.value}};
    if (track.seen && seq <= track.last_seq) {
      payload["status"] = "stale_seq";
      append(t, RecordKind::kFrame, std::move(payload));
      return false;
    }
    payload["status"] = "accepted";
    if (!u.registered) payload["unregistered"] = true;
    if (created) payload["warning"] = "unit not in roster; tracking dynamically";
    append(t, RecordKind::kFrame, std::move(payload));

    track.seen = true;
    track.last_seen = t;
    track.last_seq = seq;
    ++track.received;
    if (u.offline) {
      u.offline = false;
      u.alerts.set(vitals::AlertKind::kOffline, false);
      emit_alerts({vitals::AlertEvent{u.id, vitals::AlertKind::kBackOnline, t, t}});
    }
    return true;
  };

  struct Visitor {
    MissionService& self;
    const decltype(accept)& accept_frame;
    std::string_view line;
    double t;

    void operator()(const codec::HelmFrame& f) {
      bool created = false;
      UnitState& u = self.unit_for(f.id, created);
      if (!accept_frame(u, u.helm, f.seq, "helm", created)) return;
      u.heading_deg = vitals::heading_from_yaw(f.yaw);
      u.ambient_c = f.ambient_c;
      u.gps_fix = f.gps_fix;
      if (f.gps_fix || !u.has_position) {
        u.position = f.position;
        u.has_position = true;
      }
      if (f.gps_fix) u.last_fix_at = t;
      auto ev = vitals::evaluate(u.id, u.alerts, vitals::Sample::from(f), t, self.config_.thresholds);
      u.alerts = ev.state;
      self.emit_alerts(ev.events);
      std::map<FirefighterId, std::optional<GeoPoint>> pos;
      pos[u.id] = f.gps_fix ? std::optional<GeoPoint>(f.position) : std::nullopt;
      self.run_geofence(pos);
      self.publish_unit(u);
    }

    void operator()(const codec::StrapFrame& f) {
      bool created = false;
      UnitState& u = self.unit_for(f.id, created);
      if (!accept_frame(u, u.strap, f.seq, "strap", created)) return;
      u.hr_bpm = f.hr_bpm;
      u.pulse_bpm = f.pulse_bpm;
      u.spo2_pct = f.spo2_pct;
      u.body_c = f.body_c;
      u.stress = vitals::compute_stress(u.hr_bpm, u.spo2_pct, u.body_c, self.config_.thresholds);
      auto ev = vitals::evaluate(u.id, u.alerts, vitals::Sample::from(f), t, self.config_.thresholds);
      u.alerts = ev.state;
      self.emit_alerts(ev.events);
      self.publish_unit(u);
    }

    void operator()(const codec::CommandFrame& f) {
      self.append(t, RecordKind::kFrame,
                  {{"line", std::string(line)}, {"device", "command"}, {"unit", f.target.value},
                   {"status", "ignored"}});
    }
  };
  std::visit(Visitor{*this, accept, line, t}, *decoded);
  return log_.since(first);
}

Expected<codec::CommandFrame, CommandError> MissionService::send_recall(FirefighterId id) {
  std::lock_guard lock(mu_);
  auto it = units_.find(id);
  if (it == units_.end()) return unexpected(CommandError::kUnknownUnit);
  UnitState& u = it->second;

  const codec::CommandFrame cmd{id, codec::Command::kLedRed};
  const std::string line = codec::encode(cmd);
  u.led = LedState::kPending;
  u.led_pending_until = now_ + codec::airtime(line, config_.channel.data_rate_bps) + recall_grace_s_;
  append(now_, RecordKind::kCommand,
         {{"action", "recall"}, {"unit", id.value}, {"command", "LED_RED"}, {"line", line},
          {"confirmed", false}});
  if (uplink_) uplink_(line, now_);
  publish_unit(u);
  return cmd;
}

Expected<geofence::Boundary, geofence::Rejection> MissionService::add_boundary(
    geofence::DraftBoundary draft) {
  std::lock_guard lock(mu_);
  json attempted = {{"name", draft.name}, {"vertices", json::array()}};
  for (const auto& v : draft.vertices) attempted["vertices"].push_back(point_json(v));

  auto result = geofence::finalize(std::move(draft), geofence::BoundaryId{next_boundary_id_});
  if (!result) {
    append(now_, RecordKind::kBoundaryChange,
           {{"action", "rejected"}, {"reason", geofence::to_string(result.error())}, {"draft", attempted}});
    return result;
  }
  ++next_boundary_id_;
  boundaries_.push_back(*result);
  append(now_, RecordKind::kBoundaryChange, {{"action", "create"}, {"boundary", to_json(*result)}});

  std::map<FirefighterId, std::optional<GeoPoint>> positions;
  for (const auto& [uid, u] : units_) {
    if (u.has_position && u.gps_fix) positions[uid] = u.position;
  }
  run_geofence(positions);
  return result;
}

bool MissionService::delete_boundary(geofence::BoundaryId id) {
  std::lock_guard lock(mu_);
  auto it = std::find_if(boundaries_.begin(), boundaries_.end(),
                         [&](const geofence::Boundary& b) { return b.id == id; });
  if (it == boundaries_.end()) return false;
  boundaries_.erase(it);
  std::erase_if(membership_, [&](const auto& m) { return m.second == id; });
  append(now_, RecordKind::kBoundaryChange, {{"action", "delete"}, {"id", id.value}});
  return true;
}

std::vector<geofence::Boundary> MissionService::boundaries() const {
  std::lock_guard lock(mu_);
  return boundaries_;
}

void MissionService::set_battery(FirefighterId id, double pct) {
  std::lock_guard lock(mu_);
  auto it = units_.find(id);
  if (it != units_.end()) it->second.battery_pct = pct;
}

Snapshot MissionService::snapshot() const {
  std::lock_guard lock(mu_);
  Snapshot s;
  s.now = now_;
  s.last_seq = log_.last_seq();
  for (const auto& [id, u] : units_) s.units.push_back(u);
  s.boundaries = boundaries_;
  const auto& recs = log_.records();
  const std::size_t from = recs.size() > recent_window_ ? recs.size() - recent_window_ : 0;
  s.recent.assign(recs.begin() + static_cast<std::ptrdiff_t>(from), recs.end());
  s.config = config_;
  return s;
}

std::optional<UnitState> MissionService::unit(FirefighterId id) const {
  std::lock_guard lock(mu_);
  auto it = units_.find(id);
  if (it == units_.end()) return std::nullopt;
  return it->second;
}

std::vector<LogRecord> MissionService::log_since(std::uint64_t seq) const {
  std::lock_guard lock(mu_);
  return log_.since(seq);
}

std::vector<LogRecord> MissionService::log_records() const {
  std::lock_guard lock(mu_);
  return log_.records();
}

IncidentConfig MissionService::config() const {
  std::lock_guard lock(mu_);
  return config_;
}

double MissionService::now() const {
  std::lock_guard lock(mu_);
  return now_;
}

void MissionService::flush() {
  std::lock_guard lock(mu_);
  log_.flush();
}

json to_json(const UnitState& u, double now, const vitals::Thresholds& th) {
  json alerts = json::array();
  for (auto k : u.alerts.active_kinds()) alerts.push_back(vitals::to_string(k));
  json j = {
      {"id", u.id.value},
      {"registered", u.registered},
      {"has_position", u.has_position},
      {"position", point_json(u.position)},
      {"gps_fix", u.gps_fix},
      {"last_fix_at", u.last_fix_at ? json(*u.last_fix_at) : json(nullptr)},
      {"heading_deg", u.heading_deg},
      {"ambient_c", u.ambient_c},
      {"hr_bpm", u.hr_bpm},
      {"pulse_bpm", u.pulse_bpm},
      {"spo2_pct", u.spo2_pct},
      {"body_c", u.body_c},
      {"stress",
       {{"hr_component", u.stress.hr_component},
        {"spo2_component", u.stress.spo2_component},
        {"temp_component", u.stress.temp_component},
        {"total", u.stress.total}}},
      {"battery_pct", u.battery_pct ? json(*u.battery_pct) : json(nullptr)},
      {"led", to_string(u.led)},
      {"active_alerts", alerts},
      {"helm", {{"status", liveness(u.helm, now, th)},
                {"last_seen", u.helm.seen ? json(u.helm.last_seen) : json(nullptr)},
                {"last_seq", u.helm.last_seq},
                {"received", u.helm.received},
                {"loss_estimate", u.helm.loss_estimate()}}},
      {"strap", {{"status", liveness(u.strap, now, th)},
                 {"last_seen", u.strap.seen ? json(u.strap.last_seen) : json(nullptr)},
                 {"last_seq", u.strap.last_seq},
                 {"received", u.strap.received},
                 {"loss_estimate", u.strap.loss_estimate()}}},
      {"offline", u.offline},
      {"loss_estimate", u.loss_estimate()},
  };
  return j;
}

json to_json(const geofence::Boundary& b) {
  json vs = json::array();
  for (const auto& v : b.vertices) vs.push_back(point_json(v));
  return {{"id", b.id.value}, {"name", b.name}, {"vertices", vs}};
}

json to_json(const Snapshot& s) {
  json units = json::array();
  for (const auto& u : s.units) units.push_back(to_json(u, s.now, s.config.thresholds));
  json bounds = json::array();
  for (const auto& b : s.boundaries) bounds.push_back(to_json(b));
  json recent = json::array();
  for (const auto& r : s.recent) recent.push_back(r.to_json());
  return {{"now", s.now}, {"last_seq", s.last_seq}, {"units", units}, {"boundaries", bounds},
          {"recent", recent}};
}

namespace {

geofence::DraftBoundary draft_from(const json& b) {
  geofence::DraftBoundary d;
  d.name = b.at("name").get<std::string>();
  for (const auto& v : b.at("vertices")) d.vertices.push_back({v.at("lat").get<double>(), v.at("lon").get<double>()});
  return d;
}

}  // namespace

std::vector<LogRecord> replay(const std::vector<LogRecord>& records) {
  std::unique_ptr<MissionService> svc;
  const auto need = [&]() -> MissionService& {
    if (!svc) throw std::runtime_error("log does not start with a SESSION open record");
    return *svc;
  };
  for (const auto& r : records) {
    switch (r.kind) {
      case RecordKind::kSession:
        if (r.payload.at("event") == "open") {
          if (svc) throw std::runtime_error("log contains more than one session");
          svc = std::make_unique<MissionService>(incident_from_json(r.payload.at("config")), nullptr,
                                                 r.payload.value("recall_grace_s", 2.0));
          svc->open(r.at);
        } else {
          need().close(r.at);
        }
        break;
      case RecordKind::kFrame:
      case RecordKind::kDecodeError:
        need().ingest(r.payload.at("line").get<std::string>(), r.at);
        break;
      case RecordKind::kCommand:
        if (r.payload.value("action", "") == "recall") {
          need().advance(r.at);
          need().send_recall(FirefighterId(r.payload.at("unit").get<std::uint32_t>()));
        }
        break;
      case RecordKind::kBoundaryChange: {
        const auto action = r.payload.value("action", "");
        need().advance(r.at);
        if (action == "create") {
          need().add_boundary(draft_from(r.payload.at("boundary")));
        } else if (action == "rejected") {
          need().add_boundary(draft_from(r.payload.at("draft")));
        } else if (action == "delete") {
          need().delete_boundary(geofence::BoundaryId{r.payload.at("id").get<std::uint64_t>()});
        }
        break;
      }
      case RecordKind::kAlert:
      case RecordKind::kGeofence:
        break;
    }
  }
  return need().log_records();
}

std::vector<std::string> event_timeline(const std::vector<LogRecord>& records) {
  std::vector<std::string> out;
  for (const auto& r : records) {
    if (r.kind != RecordKind::kAlert && r.kind != RecordKind::kGeofence) continue;
    json j = {{"at", r.at}, {"kind", to_string(r.kind)}, {"payload", r.payload}};
    out.push_back(j.dump());
  }
  return out;
}

}  // namespace fireline::mission
