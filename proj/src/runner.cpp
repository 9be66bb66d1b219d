#include "fireline/runner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <sstream>
#include <thread>

#include "fireline/codec.hpp"

namespace fireline::runner {

using nlohmann::json;
using mission::LogRecord;
using mission::RecordKind;

namespace {

IncidentConfig incident_for(const sim::Scenario& sc, const ServiceConfig& cfg, const RunOptions& opt) {
  IncidentConfig inc = cfg.incident;
  if (inc.address.empty()) inc.address = sc.name;
  if (!cfg.has_origin) inc.origin = sc.origin;
  if (!cfg.has_roster) {
    inc.roster.clear();
    for (const auto& u : sc.units) inc.roster.push_back(u.id);
  }
  if (opt.seed) inc.channel.rng_seed = *opt.seed;
  return inc;
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string pad(std::string s, std::size_t w, bool right = false) {
  if (s.size() >= w) return s;
  const std::string fill(w - s.size(), ' ');
  return right ? fill + s : s + fill;
}

std::string render_rows(const std::vector<std::string>& header,
                        const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> width(header.size());
  for (std::size_t c = 0; c < header.size(); ++c) {
    width[c] = header[c].size();
    for (const auto& r : rows) width[c] = std::max(width[c], r[c].size());
  }
  std::ostringstream out;
  const auto line = [&](const std::vector<std::string>& r) {
    for (std::size_t c = 0; c < r.size(); ++c) {
      if (c) out << "  ";
      out << pad(r[c], width[c], c > 0);
    }
    out << '\n';
  };
  line(header);
  std::vector<std::string> rule;
  for (auto w : width) rule.push_back(std::string(w, '-'));
  line(rule);
  for (const auto& r : rows) line(r);
  return out.str();
}

}  // namespace

ScenarioRunner::ScenarioRunner(sim::Scenario scenario, const ServiceConfig& config, RunOptions options)
    : scenario_(std::move(scenario)),
      options_(options),
      incident_(incident_for(scenario_, config, options_)),
      channel_(incident_.channel),
      sim_(scenario_, incident_.channel.data_rate_bps),
      service_(std::make_unique<mission::MissionService>(incident_, options_.log_sink, config.recall_grace_s)) {
  channel_.add_node({kBaseNode, scenario_.base_position(), channel::Role::kBase});
  for (const auto& u : scenario_.units) {
    const GeoPoint p = sim_.actual_position(u.id, 0.0);
    channel_.add_node({sim::helm_node(u.id), p, channel::Role::kWearable});
    channel_.add_node({sim::strap_node(u.id), p, channel::Role::kWearable});
  }
  service_->set_uplink([this](const std::string& line, double at) {
    std::lock_guard lock(uplink_mu_);
    uplink_.push_back({line, at});
  });
}

void ScenarioRunner::submit_commands() {
  std::deque<QueuedCommand> batch;
  {
    std::lock_guard lock(uplink_mu_);
    batch.swap(uplink_);
  }
  for (auto& cmd : batch) {
    const double start = std::max({cmd.at, channel_.now(), base_busy_until_});
    auto tx = channel_.make_transmission(kBaseNode, std::move(cmd.line), start);
    base_busy_until_ = tx.end();
    if (auto err = channel_.submit(std::move(tx))) warnings_.push_back("command could not be queued on the channel");
  }
}

void ScenarioRunner::route(const channel::Delivery& d) {
  if (d.receiver == kBaseNode) {
    service_->ingest(d.line, d.at);
    return;
  }
  // Only helms carry the LED; they act on commands addressed to their id.
  if (!d.receiver.starts_with("helm-")) return;
  auto frame = codec::decode(d.line);
  if (!frame) return;
  if (const auto* cmd = std::get_if<codec::CommandFrame>(&*frame)) {
    if (sim::helm_node(cmd->target) == d.receiver) sim_.deliver_command(*cmd);
  }
}

RunResult ScenarioRunner::run() {
  using Clock = std::chrono::steady_clock;
  const auto wall_start = Clock::now();
  const double duration = scenario_.duration_s;

  struct Action {
    double t;
    int order;
    std::size_t index;
    bool is_boundary;
  };
  std::vector<Action> actions;
  for (std::size_t i = 0; i < scenario_.boundaries.size(); ++i) {
    actions.push_back({scenario_.boundaries[i].t, 0, i, true});
  }
  for (std::size_t i = 0; i < scenario_.recalls.size(); ++i) {
    actions.push_back({scenario_.recalls[i].t, 1, i, false});
  }
  std::stable_sort(actions.begin(), actions.end(),
                   [](const Action& a, const Action& b) { return std::tie(a.t, a.order) < std::tie(b.t, b.order); });
  std::size_t next_action = 0;

  service_->open(0.0);
  while (true) {
    double t = std::min(sim_.next_due(), duration);
    if (next_action < actions.size()) t = std::min(t, actions[next_action].t);
    t = std::max(t, channel_.now());

    if (options_.speed > 0.0) {
      const auto target = wall_start + std::chrono::duration_cast<Clock::duration>(
                                           std::chrono::duration<double>(t / options_.speed));
      while (!stop_ && Clock::now() < target) {
        std::this_thread::sleep_for(std::min<Clock::duration>(target - Clock::now(), std::chrono::milliseconds(50)));
        submit_commands();
      }
    }

    for (const auto& d : channel_.step(t)) route(d);
    if (t >= duration || stop_) break;

    service_->advance(t);
    while (next_action < actions.size() && actions[next_action].t <= t) {
      const Action& a = actions[next_action++];
      if (a.is_boundary) {
        const auto& b = scenario_.boundaries[a.index];
        auto res = service_->add_boundary({b.name, b.vertices});
        if (!res) {
          warnings_.push_back("scripted boundary '" + b.name +
                              "' rejected: " + std::string(geofence::to_string(res.error())));
        }
      } else {
        const auto& r = scenario_.recalls[a.index];
        if (!service_->send_recall(r.id)) {
          warnings_.push_back("scripted recall for unknown unit " + std::to_string(r.id.value));
        }
      }
    }

    for (const auto& u : scenario_.units) {
      const GeoPoint p = sim_.actual_position(u.id, t);
      channel_.move(sim::helm_node(u.id), p);
      channel_.move(sim::strap_node(u.id), p);
    }
    for (auto& tx : sim_.tick(t)) {
      if (auto err = channel_.submit(std::move(tx))) warnings_.push_back("wearable transmission rejected");
    }
    for (const auto& st : sim_.states()) service_->set_battery(st.id, st.battery_pct);
    submit_commands();
  }
  const double end = stop_ ? channel_.now() : duration;
  service_->close(end);

  RunResult result;
  result.records = service_->log_records();
  result.wearables = sim_.states();
  result.report = report_from_log(result.records);
  result.report.source = scenario_.name;
  result.report.warnings = warnings_;
  for (auto& ur : result.report.units) {
    const FirefighterId id(ur.id);
    const auto it = std::find_if(result.wearables.begin(), result.wearables.end(),
                                 [&](const sim::WearableState& w) { return w.id == id; });
    if (it == result.wearables.end()) continue;
    ur.helm_tx = it->helm_seq;
    ur.strap_tx = it->strap_seq;
    const double sent = static_cast<double>(it->helm_seq + it->strap_seq);
    ur.loss = sent == 0.0 ? 0.0 : 1.0 - static_cast<double>(ur.helm_rx + ur.strap_rx) / sent;
    ur.led = it->led == sim::Led::kRed ? "RED" : "OFF";
  }
  return result;
}

RunResult run_scenario(const sim::Scenario& scenario, const ServiceConfig& config, RunOptions options) {
  ScenarioRunner runner(scenario, config, options);
  return runner.run();
}

RunReport report_from_log(const std::vector<LogRecord>& records) {
  struct Acc {
    std::uint64_t helm_rx = 0, strap_rx = 0, helm_max = 0, strap_max = 0;
    bool helm_seen = false, strap_seen = false;
    double stress = 0.0;
    std::string led = "OFF";
  };
  std::map<std::uint32_t, Acc> acc;
  vitals::Thresholds th;
  RunReport rep;

  for (const auto& r : records) {
    rep.end_time = std::max(rep.end_time, r.at);
    switch (r.kind) {
      case RecordKind::kSession:
        if (r.payload.value("event", "") == "open") {
          const auto inc = incident_from_json(r.payload.at("config"));
          th = inc.thresholds;
          rep.source = inc.address;
          for (const auto& id : inc.roster) acc[id.value];
        }
        break;
      case RecordKind::kFrame: {
        if (r.payload.value("status", "") != "accepted") break;
        auto frame = codec::decode(r.payload.at("line").get<std::string>());
        if (!frame) break;
        if (const auto* h = std::get_if<codec::HelmFrame>(&*frame)) {
          auto& a = acc[h->id.value];
          ++a.helm_rx;
          a.helm_seen = true;
          a.helm_max = std::max(a.helm_max, h->seq);
        } else if (const auto* s = std::get_if<codec::StrapFrame>(&*frame)) {
          auto& a = acc[s->id.value];
          ++a.strap_rx;
          a.strap_seen = true;
          a.strap_max = std::max(a.strap_max, s->seq);
          a.stress = vitals::compute_stress(s->hr_bpm, s->spo2_pct, s->body_c, th).total;
        }
        break;
      }
      case RecordKind::kAlert: {
        const std::uint32_t unit = r.payload.at("unit").get<std::uint32_t>();
        rep.alerts.push_back({r.at, unit, r.payload.at("alert").get<std::string>(),
                              r.payload.at("value").get<double>()});
        break;
      }
      case RecordKind::kGeofence: {
        const std::uint32_t unit = r.payload.at("unit").get<std::uint32_t>();
        rep.geofence.push_back({r.at, unit,
                                r.payload.at("event").get<std::string>() + " " +
                                    r.payload.at("name").get<std::string>(),
                                std::nullopt});
        break;
      }
      case RecordKind::kCommand: {
        const auto action = r.payload.value("action", "");
        auto& a = acc[r.payload.at("unit").get<std::uint32_t>()];
        if (action == "recall") a.led = "PENDING";
        if (action == "led_assumed_red") a.led = "RED";
        break;
      }
      default:
        break;
    }
  }

  for (const auto& [id, a] : acc) {
    UnitReport u;
    u.id = id;
    u.helm_rx = a.helm_rx;
    u.strap_rx = a.strap_rx;
    double expected = 0.0;
    if (a.helm_seen) expected += static_cast<double>(a.helm_max) + 1.0;
    if (a.strap_seen) expected += static_cast<double>(a.strap_max) + 1.0;
    u.loss = expected == 0.0 ? 1.0 : 1.0 - static_cast<double>(a.helm_rx + a.strap_rx) / expected;
    u.stress_total = a.stress;
    u.led = a.led;
    rep.units.push_back(u);
  }
  return rep;
}

ReplayOutcome replay_log(const std::vector<LogRecord>& records) {
  ReplayOutcome out;
  out.records = mission::replay(records);
  out.report = report_from_log(out.records);
  out.timeline_matches = mission::event_timeline(records) == mission::event_timeline(out.records);
  return out;
}

json to_json(const RunReport& r) {
  json units = json::array();
  for (const auto& u : r.units) {
    json j = {{"id", u.id},      {"helm_rx", u.helm_rx},           {"strap_rx", u.strap_rx},
              {"loss", u.loss},  {"stress_total", u.stress_total}, {"led", u.led}};
    j["helm_tx"] = u.helm_tx ? json(*u.helm_tx) : json(nullptr);
    j["strap_tx"] = u.strap_tx ? json(*u.strap_tx) : json(nullptr);
    units.push_back(j);
  }
  const auto timeline = [](const std::vector<TimelineEntry>& es) {
    json arr = json::array();
    for (const auto& e : es) {
      json j = {{"at", e.at}, {"unit", e.unit}, {"event", e.what}};
      if (e.value) j["value"] = *e.value;
      arr.push_back(j);
    }
    return arr;
  };
  return {{"source", r.source},           {"end_time", r.end_time},
          {"units", units},               {"alerts", timeline(r.alerts)},
          {"geofence", timeline(r.geofence)}, {"warnings", r.warnings}};
}

std::string render_table(const RunReport& r) {
  std::ostringstream out;
  out << "run: " << r.source << "  (sim end " << fmt("%.3f", r.end_time) << " s)\n\n";

  std::vector<std::vector<std::string>> rows;
  for (const auto& u : r.units) {
    rows.push_back({std::to_string(u.id), u.helm_tx ? std::to_string(*u.helm_tx) : "-",
                    std::to_string(u.helm_rx), u.strap_tx ? std::to_string(*u.strap_tx) : "-",
                    std::to_string(u.strap_rx), fmt("%.3f", u.loss), fmt("%.1f", u.stress_total), u.led});
  }
  out << render_rows({"unit", "helm_tx", "helm_rx", "strap_tx", "strap_rx", "loss", "stress", "led"}, rows);

  out << "\nalerts\n";
  rows.clear();
  for (const auto& e : r.alerts) {
    rows.push_back({fmt("%.3f", e.at), std::to_string(e.unit), e.what, e.value ? fmt("%.2f", *e.value) : ""});
  }
  out << render_rows({"at_s", "unit", "alert", "value"}, rows);

  out << "\ngeofence\n";
  rows.clear();
  for (const auto& e : r.geofence) rows.push_back({fmt("%.3f", e.at), std::to_string(e.unit), e.what});
  out << render_rows({"at_s", "unit", "event"}, rows);

  for (const auto& w : r.warnings) out << "warning: " << w << '\n';
  return out.str();
}

std::vector<RangeProbeRow> range_probe(const channel::ChannelConfig& config, double from_m, double to_m,
                                       double step_m, int frames, GeoPoint base) {
  if (!(step_m > 0.0)) throw std::invalid_argument("step must be > 0");
  if (to_m < from_m) throw std::invalid_argument("sweep end precedes start");
  if (frames <= 0) throw std::invalid_argument("frames must be > 0");

  std::vector<RangeProbeRow> rows;
  const auto steps = static_cast<long>(std::floor((to_m - from_m) / step_m + 1e-9));
  for (long i = 0; i <= steps; ++i) {
    const double d = from_m + static_cast<double>(i) * step_m;
    channel::Channel ch(config);
    ch.add_node({kBaseNode, base, channel::Role::kBase});
    ch.add_node({"probe", destination(base, 0.0, d), channel::Role::kWearable});

    RangeProbeRow row{d, frames, 0, 0.0};
    for (int k = 0; k < frames; ++k) {
      codec::HelmFrame f;
      f.seq = static_cast<std::uint64_t>(k);
      f.gps_fix = true;
      f.position = ch.node("probe").position;
      ch.submit(ch.make_transmission("probe", codec::encode(f), static_cast<double>(k)));
    }
    for (const auto& del : ch.step(static_cast<double>(frames) + 1.0)) {
      if (del.receiver == kBaseNode) ++row.delivered;
    }
    row.delivery_rate = static_cast<double>(row.delivered) / frames;
    rows.push_back(row);
  }
  return rows;
}

json to_json(const std::vector<RangeProbeRow>& rows) {
  json arr = json::array();
  for (const auto& r : rows) {
    arr.push_back({{"distance_m", r.distance_m}, {"sent", r.sent}, {"delivered", r.delivered},
                   {"delivery_rate", r.delivery_rate}});
  }
  return arr;
}

std::string render_table(const std::vector<RangeProbeRow>& rows) {
  std::vector<std::vector<std::string>> out;
  for (const auto& r : rows) {
    out.push_back({fmt("%.1f", r.distance_m), std::to_string(r.sent), std::to_string(r.delivered),
                   fmt("%.3f", r.delivery_rate)});
  }
  return render_rows({"distance_m", "sent", "delivered", "delivery_rate"}, out);
}

}  // namespace fireline::runner
