#include <doctest.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <random>
#include <vector>

#include "fireline/vitals.hpp"
#include "oracles.hpp"

using namespace fireline;
using namespace fireline::vitals;

namespace {

const FirefighterId kUnit{1};

Sample hr(double v) {
  Sample s;
  s.hr_bpm = v;
  return s;
}
Sample spo2(double v) {
  Sample s;
  s.spo2_pct = v;
  return s;
}
Sample body(double v) {
  Sample s;
  s.body_c = v;
  return s;
}

// Feeds a sequence through evaluate and returns the indices where `kind` fired.
std::vector<std::size_t> fire_indices(const std::vector<double>& xs, Sample (*make)(double), AlertKind kind) {
  AlertState state;
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    auto ev = evaluate(kUnit, state, make(xs[i]), static_cast<double>(i));
    for (const auto& e : ev.events) {
      if (e.kind == kind) out.push_back(i);
    }
    state = ev.state;
  }
  return out;
}

bool fires(AlertKind kind, const Sample& s) {
  const auto ev = evaluate(kUnit, {}, s, 0.0);
  return std::any_of(ev.events.begin(), ev.events.end(), [&](const AlertEvent& e) { return e.kind == kind; });
}

}  // namespace

TEST_CASE("stress at hand-computed points") {
  struct Point {
    double hr, spo2, body;
    double h, s, t;
  };
  // Components worked by hand from 40*clamp((hr-100)/50), 30*clamp((95-spo2)/10),
  // 30*clamp((body-38)/2).
  const std::array<Point, 12> points{{
      {100, 100, 36.5, 0, 0, 0},
      {200, 80, 41, 40, 30, 30},
      {125, 100, 37, 20, 0, 0},
      {100, 90, 37, 0, 15, 0},
      {100, 100, 39, 0, 0, 15},
      {150, 96, 37, 40, 0, 0},
      {125, 90, 39, 20, 15, 15},
      {150, 85, 40, 40, 30, 30},
      {90, 99, 35, 0, 0, 0},
      {110, 93, 38.5, 8, 6, 7.5},
      {140, 95, 38, 32, 0, 0},
      {100, 87.5, 39.5, 0, 22.5, 22.5},
  }};
  for (const auto& p : points) {
    const auto b = compute_stress(p.hr, p.spo2, p.body);
    CAPTURE(p.hr);
    CAPTURE(p.spo2);
    CAPTURE(p.body);
    CHECK(b.hr_component == doctest::Approx(p.h).epsilon(1e-12));
    CHECK(b.spo2_component == doctest::Approx(p.s).epsilon(1e-12));
    CHECK(b.temp_component == doctest::Approx(p.t).epsilon(1e-12));
    CHECK(b.total == doctest::Approx(p.h + p.s + p.t).epsilon(1e-12));
  }
}

TEST_CASE("stress is bounded and monotone") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> h(0, 300), s(0, 100), t(30, 45), step(0, 5);
  for (int i = 0; i < 5000; ++i) {
    const double a = h(rng), b = s(rng), c = t(rng), d = step(rng);
    const double base = compute_stress(a, b, c).total;
    CHECK(base >= 0.0);
    CHECK(base <= 100.0);
    CHECK(compute_stress(a + d, b, c).total >= base);
    CHECK(compute_stress(a, b - d, c).total >= base);
    CHECK(compute_stress(a, b, c + d).total >= base);
  }
}

TEST_CASE("threshold table") {
  CHECK(fires(AlertKind::kHighHr, hr(150)));
  CHECK_FALSE(fires(AlertKind::kHighHr, hr(149)));
  CHECK(fires(AlertKind::kLowSpo2, spo2(94)));
  CHECK_FALSE(fires(AlertKind::kLowSpo2, spo2(95)));
  CHECK(fires(AlertKind::kBodyTempWarn, body(38.0)));
  CHECK_FALSE(fires(AlertKind::kBodyTempWarn, body(37.99)));
  CHECK(fires(AlertKind::kBodyTempCrit, body(40.0)));
  CHECK_FALSE(fires(AlertKind::kBodyTempCrit, body(39.99)));
  Sample amb;
  amb.ambient_c = 60.0;
  CHECK(fires(AlertKind::kAmbientWarn, amb));
  CHECK_FALSE(fires(AlertKind::kAmbientCrit, amb));
  amb.ambient_c = 120.0;
  CHECK(fires(AlertKind::kAmbientCrit, amb));
}

TEST_CASE("edge-triggered heart rate") {
  CHECK(fire_indices({148, 150, 151}, hr, AlertKind::kHighHr) == std::vector<std::size_t>{1});
  CHECK(fire_indices(std::vector<double>(100, 160), hr, AlertKind::kHighHr) == std::vector<std::size_t>{0});
  // 149 is inside the hysteresis band, so the alert stays latched.
  CHECK(fire_indices({150, 149, 150}, hr, AlertKind::kHighHr) == std::vector<std::size_t>{0});
  CHECK(fire_indices({150, 148, 150}, hr, AlertKind::kHighHr) == std::vector<std::size_t>{0, 2});
}

TEST_CASE("body temperature warn then crit") {
  auto first = evaluate(kUnit, {}, body(39.5), 0.0);
  REQUIRE(first.events.size() == 1);
  CHECK(first.events[0].kind == AlertKind::kBodyTempWarn);
  auto second = evaluate(kUnit, first.state, body(40.1), 1.0);
  REQUIRE(second.events.size() == 1);
  CHECK(second.events[0].kind == AlertKind::kBodyTempCrit);
  CHECK(second.events[0].value == 40.1);
  CHECK(second.state.active(AlertKind::kBodyTempWarn));
  CHECK(second.state.active(AlertKind::kBodyTempCrit));
}

TEST_CASE("missing fields leave their latches alone") {
  AlertState s;
  s.set(AlertKind::kHighHr, true);
  const auto ev = evaluate(kUnit, s, body(36.0), 0.0);
  CHECK(ev.events.empty());
  CHECK(ev.state.active(AlertKind::kHighHr));
}

TEST_CASE("events match a per-sample crossing scan") {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<double> h, s, b;
    double hv = 140, sv = 97, bv = 38;
    for (int i = 0; i < 200; ++i) {
      hv = std::clamp(hv + static_cast<int>(rng() % 5) - 2.0, 120.0, 180.0);
      sv = std::clamp(sv + (static_cast<int>(rng() % 11) - 5) / 10.0, 88.0, 100.0);
      bv = std::clamp(bv + (static_cast<int>(rng() % 21) - 10) / 100.0, 36.0, 42.0);
      h.push_back(hv);
      s.push_back(sv);
      b.push_back(bv);
    }
    CHECK(fire_indices(h, hr, AlertKind::kHighHr) == oracle::upward_crossings(h, 150, 1));
    CHECK(fire_indices(s, spo2, AlertKind::kLowSpo2) == oracle::downward_crossings(s, 95, 1));
    CHECK(fire_indices(b, body, AlertKind::kBodyTempWarn) == oracle::upward_crossings(b, 38, 1));
    CHECK(fire_indices(b, body, AlertKind::kBodyTempCrit) == oracle::upward_crossings(b, 40, 1));
  }
}

TEST_CASE("jerk detection") {
  CHECK_FALSE(detect_jerk({0, 0, 0}));
  CHECK(detect_jerk({35, 0, 0}));
  CHECK(std::sqrt(3.0 * 17 * 17) == doctest::Approx(29.44).epsilon(1e-3));
  CHECK(detect_jerk({17, 17, 17}));
  CHECK_FALSE(detect_jerk({16.9, 16.9, 16.9}));
}

TEST_CASE("jerk detection is rotation invariant") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(-40, 40), ang(0, 6.283185307179586);
  for (int i = 0; i < 5000; ++i) {
    const codec::Vec3 v{u(rng), u(rng), u(rng)};
    const double m = magnitude(v);
    if (std::fabs(m - 29.4) < 1e-6) continue;
    const double a = ang(rng), b = ang(rng);
    // Rotate about z by a, then about x by b.
    const codec::Vec3 r1{v.x * std::cos(a) - v.y * std::sin(a), v.x * std::sin(a) + v.y * std::cos(a), v.z};
    const codec::Vec3 r2{r1.x, r1.y * std::cos(b) - r1.z * std::sin(b), r1.y * std::sin(b) + r1.z * std::cos(b)};
    CHECK(detect_jerk(v) == detect_jerk(r2));
  }
}

TEST_CASE("heading from yaw") {
  CHECK(heading_from_yaw(0) == 0);
  CHECK(heading_from_yaw(450) == 90);
  CHECK(heading_from_yaw(-90) == 270);
  CHECK(heading_from_yaw(360) == 0);
  CHECK_FALSE(std::signbit(heading_from_yaw(-0.0)));
  CHECK_FALSE(std::signbit(heading_from_yaw(-360.0)));
  for (int k = -20; k <= 20; ++k) {
    for (double x : {0.0, 12.5, 90.25, 359.75, 180.0}) {
      CHECK(heading_from_yaw(x + 360.0 * k) == heading_from_yaw(x));
    }
  }
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1e4, 1e4);
  for (int i = 0; i < 1000; ++i) {
    const double h = heading_from_yaw(u(rng));
    CHECK(h >= 0.0);
    CHECK(h < 360.0);
  }
}

TEST_CASE("staleness") {
  CHECK(staleness(0.0, 10.0) == Liveness::kLive);
  CHECK(staleness(0.0, 10.001) == Liveness::kOffline);
  CHECK(staleness(5.0, 5.0) == Liveness::kLive);
}

TEST_CASE("alert kind names round-trip") {
  for (std::size_t i = 0; i < kAlertKindCount; ++i) {
    const auto k = static_cast<AlertKind>(i);
    CHECK(alert_kind_from_string(to_string(k)) == k);
  }
  CHECK_FALSE(alert_kind_from_string("NOPE").has_value());
  CHECK(to_string(AlertKind::kBodyTempCrit) == "BODY_TEMP_CRIT");
  CHECK(is_critical(AlertKind::kOffline));
  CHECK_FALSE(is_critical(AlertKind::kHighHr));
}

TEST_CASE("threshold validation") {
  Thresholds t;
  CHECK(t.validate().empty());
  t.body_crit_c = 37.0;
  CHECK_FALSE(t.validate().empty());
}
