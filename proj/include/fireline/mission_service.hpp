#pragma once

// Base-station backend: decodes delivered lines, pairs helm and strap
// halves by firefighter id, raises alerts and geofence events, keeps the
// accountability log, and sends recall commands.
//
// One writer thread drives ingest/advance; other threads may call the
// query and command methods, which take the same lock and only copy.

#include <cstdint>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "fireline/codec.hpp"
#include "fireline/config.hpp"
#include "fireline/event_log.hpp"
#include "fireline/expected.hpp"
#include "fireline/geofence.hpp"
#include "fireline/vitals.hpp"

namespace fireline::mission {

enum class LedState { kOff, kRed, kPending };
std::string_view to_string(LedState s);

struct DeviceTrack {
  bool seen = false;
  double last_seen = 0.0;
  std::uint64_t last_seq = 0;
  std::uint64_t received = 0;

  // 1 - received / (max_seq + 1); sequence numbers only move forward, so
  // last_seq is the max.
  double loss_estimate() const;
};

struct UnitState {
  FirefighterId id;
  bool registered = true;

  bool has_position = false;
  GeoPoint position;
  bool gps_fix = false;
  std::optional<double> last_fix_at;

  double heading_deg = 0.0;
  double ambient_c = 0.0;
  int hr_bpm = 0;
  int pulse_bpm = 0;
  double spo2_pct = 100.0;
  double body_c = 0.0;
  vitals::StressBreakdown stress;

  std::optional<double> battery_pct;
  LedState led = LedState::kOff;
  std::optional<double> led_pending_until;

  vitals::AlertState alerts;
  DeviceTrack helm;
  DeviceTrack strap;
  bool offline = false;

  double loss_estimate() const;
  // Latest activity over both devices; nullopt before the first frame.
  std::optional<double> last_seen() const;
};

struct Snapshot {
  double now = 0.0;
  std::uint64_t last_seq = 0;
  std::vector<UnitState> units;
  std::vector<geofence::Boundary> boundaries;
  std::vector<LogRecord> recent;
  IncidentConfig config;
};

enum class CommandError { kUnknownUnit };

class MissionService {
 public:
  using Uplink = std::function<void(const std::string& line, double at)>;
  // Receives stream messages ({"type": ...}) in log order.
  using Listener = std::function<void(const nlohmann::json& message)>;

  explicit MissionService(IncidentConfig config, std::ostream* log_sink = nullptr,
                          double recall_grace_s = 2.0, std::size_t recent_window = 200);

  void set_uplink(Uplink uplink);
  void set_listener(Listener listener);

  // Writes the SESSION open record carrying the incident config.
  void open(double at);
  // Writes the SESSION close record after advancing to `at`.
  void close(double at);

  // Moves the service clock forward, resolving link timeouts and pending LEDs.
  void advance(double now);

  std::vector<LogRecord> ingest(std::string_view line, double at);

  Expected<codec::CommandFrame, CommandError> send_recall(FirefighterId id);

  Expected<geofence::Boundary, geofence::Rejection> add_boundary(geofence::DraftBoundary draft);
  bool delete_boundary(geofence::BoundaryId id);
  std::vector<geofence::Boundary> boundaries() const;

  // Simulator side channel; not logged.
  void set_battery(FirefighterId id, double pct);

  Snapshot snapshot() const;
  std::optional<UnitState> unit(FirefighterId id) const;
  std::vector<LogRecord> log_since(std::uint64_t seq) const;
  std::vector<LogRecord> log_records() const;
  IncidentConfig config() const;
  double now() const;
  void flush();

 private:
  UnitState& unit_for(FirefighterId id, bool& created);
  const LogRecord& append(double at, RecordKind kind, nlohmann::json payload);
  void advance_locked(double now);
  void emit_alerts(const std::vector<vitals::AlertEvent>& events);
  void run_geofence(const std::map<FirefighterId, std::optional<GeoPoint>>& positions);
  void publish(const char* type, nlohmann::json body);
  void publish_unit(const UnitState& u);

  mutable std::mutex mu_;
  IncidentConfig config_;
  double recall_grace_s_;
  std::size_t recent_window_;
  EventLog log_;
  std::map<FirefighterId, UnitState> units_;
  std::vector<geofence::Boundary> boundaries_;
  geofence::Membership membership_;
  std::uint64_t next_boundary_id_ = 1;
  double now_ = 0.0;
  Uplink uplink_;
  Listener listener_;
};

nlohmann::json to_json(const UnitState& u, double now, const vitals::Thresholds& th);
nlohmann::json to_json(const geofence::Boundary& b);
nlohmann::json to_json(const Snapshot& s);

// Rebuilds a service from the inputs recorded in `records` (SESSION, FRAME,
// DECODE_ERROR, recall COMMAND, BOUNDARY_CHANGE) and returns the log it
// produces. Derived records in the input are ignored.
std::vector<LogRecord> replay(const std::vector<LogRecord>& records);

// ALERT and GEOFENCE records rendered as "<at> <kind> <payload>" lines.
std::vector<std::string> event_timeline(const std::vector<LogRecord>& records);

}  // namespace fireline::mission
