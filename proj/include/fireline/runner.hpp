#pragma once

// Simulation driver tying wearables, the channel, and the mission service
// together, plus the log replay and range-probe tools built on them.

#include <atomic>
#include <cstdint>
#include <deque>
#include <memory>
#include <mutex>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "fireline/channel.hpp"
#include "fireline/config.hpp"
#include "fireline/mission_service.hpp"
#include "fireline/scenario.hpp"
#include "fireline/wearable_sim.hpp"

namespace fireline::runner {

inline const channel::NodeId kBaseNode = "base";

struct RunOptions {
  std::optional<std::uint64_t> seed;  // overrides channel.rng_seed
  double speed = 0.0;                 // sim seconds per wall second; 0 = unpaced
  std::ostream* log_sink = nullptr;
};

struct UnitReport {
  std::uint32_t id = 0;
  std::optional<std::uint64_t> helm_tx;  // known only for live runs
  std::optional<std::uint64_t> strap_tx;
  std::uint64_t helm_rx = 0;
  std::uint64_t strap_rx = 0;
  double loss = 0.0;
  double stress_total = 0.0;
  std::string led;  // wearable LED for runs, service view for replays
};

struct TimelineEntry {
  double at = 0.0;
  std::uint32_t unit = 0;
  std::string what;  // alert kind, or "ENTER <name>" / "EXIT <name>"
  std::optional<double> value;
};

struct RunReport {
  std::string source;
  double end_time = 0.0;
  std::vector<UnitReport> units;
  std::vector<TimelineEntry> alerts;
  std::vector<TimelineEntry> geofence;
  std::vector<std::string> warnings;
};

nlohmann::json to_json(const RunReport& r);
std::string render_table(const RunReport& r);

// Builds the service-side view (receive counts, seq-based loss, timelines)
// from log records alone.
RunReport report_from_log(const std::vector<mission::LogRecord>& records);

struct RunResult {
  RunReport report;
  std::vector<mission::LogRecord> records;
  std::vector<sim::WearableState> wearables;
};

class ScenarioRunner {
 public:
  ScenarioRunner(sim::Scenario scenario, const ServiceConfig& config, RunOptions options = {});

  mission::MissionService& service() { return *service_; }
  const sim::WearableSim& wearables() const { return sim_; }

  RunResult run();
  void request_stop() { stop_ = true; }

 private:
  struct QueuedCommand {
    std::string line;
    double at;
  };

  void submit_commands();
  void route(const channel::Delivery& d);

  sim::Scenario scenario_;
  RunOptions options_;
  IncidentConfig incident_;
  channel::Channel channel_;
  sim::WearableSim sim_;
  std::unique_ptr<mission::MissionService> service_;
  std::mutex uplink_mu_;
  std::deque<QueuedCommand> uplink_;
  double base_busy_until_ = 0.0;
  std::atomic<bool> stop_{false};
  std::vector<std::string> warnings_;
};

RunResult run_scenario(const sim::Scenario& scenario, const ServiceConfig& config, RunOptions options = {});

struct ReplayOutcome {
  RunReport report;
  std::vector<mission::LogRecord> records;
  bool timeline_matches = false;
};

ReplayOutcome replay_log(const std::vector<mission::LogRecord>& records);

struct RangeProbeRow {
  double distance_m = 0.0;
  int sent = 0;
  int delivered = 0;
  double delivery_rate = 0.0;
};

// One wearable at each distance due north of the base sends `frames` helm
// frames one second apart.
std::vector<RangeProbeRow> range_probe(const channel::ChannelConfig& config, double from_m, double to_m,
                                       double step_m, int frames = 5,
                                       GeoPoint base = {40.0, -88.0});

nlohmann::json to_json(const std::vector<RangeProbeRow>& rows);
std::string render_table(const std::vector<RangeProbeRow>& rows);

}  // namespace fireline::runner
