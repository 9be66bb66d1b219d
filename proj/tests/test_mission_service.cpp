#include <doctest.h>

#include <algorithm>
#include <atomic>
#include <map>
#include <random>
#include <sstream>
#include <thread>

#include "fireline/codec.hpp"
#include "fireline/mission_service.hpp"
#include "generators.hpp"

using namespace fireline;
using namespace fireline::mission;
using nlohmann::json;

namespace {

IncidentConfig incident() {
  IncidentConfig c;
  c.address = "1 Test Rd";
  c.origin = {40.0, -88.0};
  c.roster = {FirefighterId(1), FirefighterId(2)};
  return c;
}

std::string helm(std::uint32_t id, std::uint64_t seq, GeoPoint p = {40.0, -88.0}, bool fix = true,
                 double ambient = 25.0) {
  codec::HelmFrame f;
  f.id = FirefighterId(id);
  f.seq = seq;
  f.gps_fix = fix;
  f.position = p;
  f.ambient_c = ambient;
  f.yaw = 45.0;
  return codec::encode(f);
}

std::string strap(std::uint32_t id, std::uint64_t seq, int hr = 90, double spo2 = 98.0, double body = 37.0) {
  return codec::encode(codec::StrapFrame{FirefighterId(id), seq, hr, hr, spo2, body});
}

std::vector<LogRecord> of_kind(const std::vector<LogRecord>& rs, RecordKind k) {
  std::vector<LogRecord> out;
  std::copy_if(rs.begin(), rs.end(), std::back_inserter(out), [&](auto& r) { return r.kind == k; });
  return out;
}

const std::vector<GeoPoint> kSquare{{39.999, -88.001}, {39.999, -87.999}, {40.001, -87.999}, {40.001, -88.001}};

}  // namespace

TEST_CASE("helm and strap pair by id") {
  MissionService svc(incident());
  svc.ingest(helm(1, 0), 1.0);
  svc.ingest(strap(1, 0, 120), 1.5);
  svc.ingest(strap(2, 0, 70), 1.6);
  const auto snap = svc.snapshot();
  REQUIRE(snap.units.size() == 2);
  const auto u1 = *svc.unit(FirefighterId(1));
  CHECK(u1.has_position);
  CHECK(u1.heading_deg == 45.0);
  CHECK(u1.hr_bpm == 120);
  CHECK(u1.helm.seen);
  CHECK(u1.strap.seen);
  const auto u2 = *svc.unit(FirefighterId(2));
  CHECK(u2.hr_bpm == 70);
  CHECK_FALSE(u2.helm.seen);
}

TEST_CASE("critical body temperature appends an alert") {
  MissionService svc(incident());
  const auto recs = svc.ingest(strap(1, 0, 90, 98.0, 40.5), 3.0);
  const auto alerts = of_kind(recs, RecordKind::kAlert);
  REQUIRE(alerts.size() == 2);
  CHECK(alerts[0].payload["alert"] == "BODY_TEMP_WARN");
  CHECK(alerts[1].payload["alert"] == "BODY_TEMP_CRIT");
  CHECK(alerts[1].payload["unit"] == 1);
  CHECK(alerts[1].payload["value"] == 40.5);
  CHECK(alerts[1].at == 3.0);
  CHECK(svc.unit(FirefighterId(1))->alerts.active(vitals::AlertKind::kBodyTempCrit));
}

TEST_CASE("garbage lines are logged and change nothing") {
  MissionService svc(incident());
  svc.ingest(strap(1, 0), 1.0);
  const auto before = json(to_json(svc.snapshot())["units"]).dump();
  const auto recs = svc.ingest("###", 2.0);
  REQUIRE(recs.size() == 1);
  CHECK(recs[0].kind == RecordKind::kDecodeError);
  CHECK(recs[0].payload["line"] == "###");
  CHECK(recs[0].payload["error"] == "MalformedFrame");
  CHECK(json(to_json(svc.snapshot())["units"]).dump() == before);
}

TEST_CASE("stale and duplicate sequence numbers are dropped") {
  MissionService svc(incident());
  svc.ingest(strap(1, 5, 100), 1.0);
  auto recs = svc.ingest(strap(1, 5, 170), 2.0);
  CHECK(recs.at(0).payload["status"] == "stale_seq");
  recs = svc.ingest(strap(1, 3, 170), 3.0);
  CHECK(recs.at(0).payload["status"] == "stale_seq");
  const auto u = *svc.unit(FirefighterId(1));
  CHECK(u.hr_bpm == 100);
  CHECK(u.strap.last_seq == 5);
  CHECK(u.strap.last_seen == 1.0);
}

TEST_CASE("unknown ids create unregistered units") {
  MissionService svc(incident());
  const auto recs = svc.ingest(helm(77, 0), 1.0);
  CHECK(recs.at(0).payload["status"] == "accepted");
  CHECK(recs.at(0).payload.contains("warning"));
  const auto u = svc.unit(FirefighterId(77));
  REQUIRE(u.has_value());
  CHECK_FALSE(u->registered);
  CHECK(svc.unit(FirefighterId(1))->registered);
}

TEST_CASE("command frames heard on the air are logged but ignored") {
  MissionService svc(incident());
  const auto recs = svc.ingest("C,1,LED_RED", 1.0);
  REQUIRE(recs.size() == 1);
  CHECK(recs[0].payload["status"] == "ignored");
}

TEST_CASE("recall") {
  MissionService svc(incident(), nullptr, 2.0);
  std::vector<std::pair<std::string, double>> sent;
  svc.set_uplink([&](const std::string& line, double at) { sent.emplace_back(line, at); });
  svc.advance(10.0);
  CHECK(svc.send_recall(FirefighterId(9)).error() == CommandError::kUnknownUnit);
  CHECK(sent.empty());

  auto cmd = svc.send_recall(FirefighterId(1));
  REQUIRE(cmd.has_value());
  CHECK(cmd->target == FirefighterId(1));
  REQUIRE(sent.size() == 1);
  CHECK(sent[0] == std::pair<std::string, double>{"C,1,LED_RED", 10.0});
  CHECK(svc.unit(FirefighterId(1))->led == LedState::kPending);
  const auto cmds = of_kind(svc.log_records(), RecordKind::kCommand);
  REQUIRE(cmds.size() == 1);
  CHECK(cmds[0].payload["action"] == "recall");
  CHECK(cmds[0].payload["confirmed"] == false);

  const double air = codec::airtime("C,1,LED_RED", 50000.0);
  svc.advance(10.0 + air + 1.9);
  CHECK(svc.unit(FirefighterId(1))->led == LedState::kPending);
  svc.advance(13.0);
  CHECK(svc.unit(FirefighterId(1))->led == LedState::kRed);
  const auto after = of_kind(svc.log_records(), RecordKind::kCommand);
  REQUIRE(after.size() == 2);
  CHECK(after[1].payload["action"] == "led_assumed_red");
  CHECK(after[1].at == doctest::Approx(12.0 + air));
}

TEST_CASE("offline when both devices fall silent, back online on the next frame") {
  MissionService svc(incident());
  svc.ingest(helm(1, 0), 1.0);
  svc.ingest(strap(1, 0), 4.0);
  svc.advance(12.0);
  CHECK_FALSE(svc.unit(FirefighterId(1))->offline);
  svc.advance(20.0);
  const auto u = *svc.unit(FirefighterId(1));
  CHECK(u.offline);
  auto alerts = of_kind(svc.log_records(), RecordKind::kAlert);
  REQUIRE(alerts.size() == 1);
  CHECK(alerts[0].payload["alert"] == "OFFLINE");
  CHECK(alerts[0].at == 14.0);
  svc.advance(40.0);
  CHECK(of_kind(svc.log_records(), RecordKind::kAlert).size() == 1);

  svc.ingest(strap(1, 1), 41.0);
  alerts = of_kind(svc.log_records(), RecordKind::kAlert);
  REQUIRE(alerts.size() == 2);
  CHECK(alerts[1].payload["alert"] == "BACK_ONLINE");
  CHECK_FALSE(svc.unit(FirefighterId(1))->offline);
  const auto j = to_json(*svc.unit(FirefighterId(1)), 41.0, {});
  CHECK(j["helm"]["status"] == "OFFLINE");
  CHECK(j["strap"]["status"] == "LIVE");
}

TEST_CASE("loss estimate matches a brute-force count") {
  MissionService svc(incident());
  std::mt19937_64 rng(61);
  std::set<std::uint64_t> helm_got, strap_got;
  double t = 0.0;
  for (std::uint64_t seq = 0; seq < 500; ++seq) {
    t += 0.1;
    if (rng() % 4 != 0) {
      svc.ingest(helm(1, seq), t);
      helm_got.insert(seq);
    }
    if (rng() % 3 != 0) {
      svc.ingest(strap(1, seq), t);
      strap_got.insert(seq);
    }
  }
  const auto u = *svc.unit(FirefighterId(1));
  const double helm_expected = 1.0 - double(helm_got.size()) / double(*helm_got.rbegin() + 1);
  const double strap_expected = 1.0 - double(strap_got.size()) / double(*strap_got.rbegin() + 1);
  CHECK(u.helm.loss_estimate() == doctest::Approx(helm_expected));
  CHECK(u.strap.loss_estimate() == doctest::Approx(strap_expected));
  CHECK(u.loss_estimate() == doctest::Approx(1.0 - double(helm_got.size() + strap_got.size()) /
                                                       double(*helm_got.rbegin() + *strap_got.rbegin() + 2)));
}

TEST_CASE("boundaries") {
  MissionService svc(incident());
  svc.ingest(helm(1, 0, {40.0, -88.0}), 1.0);
  svc.ingest(helm(2, 0, {41.0, -88.0}), 1.0);
  CHECK(svc.add_boundary({"", kSquare}).error() == geofence::Rejection::kMissingName);
  CHECK(svc.add_boundary({"a", {kSquare[0], kSquare[1]}}).error() == geofence::Rejection::kTooFewVertices);
  auto b = svc.add_boundary({"yard", kSquare});
  REQUIRE(b.has_value());
  auto geo = of_kind(svc.log_records(), RecordKind::kGeofence);
  REQUIRE(geo.size() == 1);
  CHECK(geo[0].payload["unit"] == 1);
  CHECK(geo[0].payload["event"] == "ENTER");
  CHECK(geo[0].payload["name"] == "yard");

  svc.ingest(helm(1, 1, {40.0, -88.0}, false), 2.0);
  svc.ingest(helm(1, 2, {45.0, -88.0}, false), 3.0);
  CHECK(of_kind(svc.log_records(), RecordKind::kGeofence).size() == 1);
  svc.ingest(helm(1, 3, {45.0, -88.0}, true), 4.0);
  geo = of_kind(svc.log_records(), RecordKind::kGeofence);
  REQUIRE(geo.size() == 2);
  CHECK(geo[1].payload["event"] == "EXIT");

  CHECK(svc.delete_boundary(b->id));
  CHECK_FALSE(svc.delete_boundary(b->id));
  CHECK(svc.boundaries().empty());
  const auto changes = of_kind(svc.log_records(), RecordKind::kBoundaryChange);
  REQUIRE(changes.size() == 4);
  CHECK(changes[0].payload["action"] == "rejected");
  CHECK(changes[2].payload["action"] == "create");
  CHECK(changes[3].payload["action"] == "delete");
}

TEST_CASE("every ingested line produces at least one record") {
  MissionService svc(incident());
  std::mt19937_64 rng(67);
  for (int i = 0; i < 2000; ++i) {
    std::string line = codec::encode(testing::random_frame(rng));
    if (rng() % 4 == 0) line[rng() % line.size()] = '#';
    const auto before = svc.snapshot().last_seq;
    const auto recs = svc.ingest(line, i * 0.01);
    CHECK_FALSE(recs.empty());
    CHECK(svc.snapshot().last_seq == before + recs.size());
  }
  const auto all = svc.log_records();
  for (std::size_t i = 1; i < all.size(); ++i) {
    CHECK(all[i].seq == all[i - 1].seq + 1);
    CHECK(all[i].at >= all[i - 1].at);
  }
}

TEST_CASE("snapshot stress is consistent under concurrent ingestion") {
  MissionService svc(incident());
  std::atomic<bool> done{false};
  std::thread writer([&] {
    std::mt19937_64 rng(71);
    for (std::uint64_t seq = 0; seq < 5000; ++seq) {
      const int hr = 60 + static_cast<int>(rng() % 140);
      const double spo2 = 80.0 + static_cast<double>(rng() % 200) / 10.0;
      const double body = 36.0 + static_cast<double>(rng() % 600) / 100.0;
      svc.ingest(strap(1 + static_cast<std::uint32_t>(seq % 2), seq, hr, spo2, body), seq * 0.01);
    }
    done = true;
  });
  int checked = 0;
  while (!done || checked == 0) {
    const auto snap = svc.snapshot();
    for (const auto& u : snap.units) {
      CHECK(u.stress == vitals::compute_stress(u.hr_bpm, u.spo2_pct, u.body_c, snap.config.thresholds));
    }
    ++checked;
  }
  writer.join();
}

TEST_CASE("log lines are valid json and round-trip") {
  std::ostringstream sink;
  MissionService svc(incident(), &sink);
  svc.open(0.0);
  svc.ingest(helm(1, 0), 1.0);
  svc.ingest("bad \xff line", 1.5);
  svc.close(2.0);
  const auto parsed = parse_log(sink.str());
  CHECK(parsed.size() == svc.log_records().size());
  for (std::size_t i = 0; i < parsed.size(); ++i) CHECK(parsed[i] == svc.log_records()[i]);
  std::istringstream lines(sink.str());
  std::string line;
  while (std::getline(lines, line)) {
    const auto j = json::parse(line);
    CHECK(j.contains("seq"));
    CHECK(j.contains("at"));
    CHECK(j.contains("kind"));
    CHECK(j.contains("payload"));
  }
}

TEST_CASE("event log rejects time going backwards") {
  EventLog log;
  log.append(2.0, RecordKind::kSession, json::object());
  CHECK_THROWS(log.append(1.0, RecordKind::kSession, json::object()));
  CHECK(log.since(0).size() == 1);
  CHECK(log.since(1).empty());
}

TEST_CASE("replay regenerates alerts and geofence events") {
  std::ostringstream sink;
  MissionService svc(incident(), &sink);
  svc.open(0.0);
  double t = 0.0;
  std::uint64_t seq = 0;
  auto feed = [&](GeoPoint p, int hr, double body) {
    t += 0.5;
    svc.ingest(helm(1, seq, p, true, 20 + hr / 2.0), t);
    svc.ingest(strap(1, seq, hr, 96.0, body), t + 0.1);
    ++seq;
  };
  for (int i = 0; i < 20; ++i) feed({40.002, -88.0}, 100 + i * 3, 37.0 + i * 0.2);
  svc.add_boundary({"yard", kSquare});
  for (int i = 0; i < 20; ++i) feed({40.0, -88.0 + i * 0.0001}, 160 - i * 4, 41.0 - i * 0.2);
  svc.ingest("junk", t);
  svc.send_recall(FirefighterId(2));
  svc.advance(t + 30.0);
  for (int i = 0; i < 5; ++i) feed({40.0, -88.0}, 90, 37.0);
  svc.close(t + 1.0);

  const auto original = parse_log(sink.str());
  const auto again = replay(original);
  CHECK(event_timeline(again) == event_timeline(original));
  CHECK_FALSE(event_timeline(original).empty());
  REQUIRE(again.size() == original.size());
  for (std::size_t i = 0; i < again.size(); ++i) CHECK(again[i].to_line() == original[i].to_line());
}

TEST_CASE("replay requires a session record") {
  MissionService svc(incident());
  svc.ingest(helm(1, 0), 1.0);
  CHECK_THROWS(replay(svc.log_records()));
}

TEST_CASE("listener receives typed messages") {
  MissionService svc(incident());
  std::vector<std::string> types;
  svc.set_listener([&](const json& m) { types.push_back(m["type"]); });
  svc.ingest(strap(1, 0, 155), 1.0);
  svc.send_recall(FirefighterId(1));
  svc.add_boundary({"yard", kSquare});
  auto has = [&](const char* t) { return std::find(types.begin(), types.end(), t) != types.end(); };
  CHECK(has("unit-update"));
  CHECK(has("alert"));
  CHECK(has("command"));
  CHECK(has("boundary-change"));
}
