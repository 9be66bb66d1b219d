#include "fireline/vitals.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace fireline::vitals {

namespace {

double ramp(double numerator, double denominator) {
  return std::clamp(numerator / denominator, 0.0, 1.0);
}

constexpr std::array<std::string_view, kAlertKindCount> kNames = {
    "HIGH_HR",      "LOW_SPO2", "BODY_TEMP_WARN", "BODY_TEMP_CRIT", "AMBIENT_WARN",
    "AMBIENT_CRIT", "JERK",     "OFFLINE",        "BACK_ONLINE",
};

// Upper-threshold latch: trips at value >= trip, releases below trip - band.
bool latch_high(bool was, double value, double trip, double band) {
  return was ? value >= trip - band : value >= trip;
}

// Lower-threshold latch: trips at value < trip, releases above trip + band.
bool latch_low(bool was, double value, double trip, double band) {
  return was ? value <= trip + band : value < trip;
}

}  // namespace

std::string Thresholds::validate() const {
  if (!(hr_ramp_start_bpm < hr_high_bpm)) return "hr_ramp_start_bpm must be < hr_high_bpm";
  if (!(spo2_ramp_floor_pct < spo2_low_pct)) return "spo2_ramp_floor_pct must be < spo2_low_pct";
  if (!(body_warn_c < body_crit_c)) return "body_warn_c must be < body_crit_c";
  if (!(ambient_warn_c < ambient_crit_c)) return "ambient_warn_c must be < ambient_crit_c";
  if (!(jerk_accel_ms2 > 0.0)) return "jerk_accel_ms2 must be > 0";
  if (!(stale_after_s > 0.0)) return "stale_after_s must be > 0";
  if (!(hysteresis >= 0.0)) return "hysteresis must be >= 0";
  return {};
}

StressBreakdown compute_stress(double hr_bpm, double spo2_pct, double body_c, const Thresholds& th) {
  StressBreakdown s;
  s.hr_component = kHrWeight * ramp(hr_bpm - th.hr_ramp_start_bpm, th.hr_high_bpm - th.hr_ramp_start_bpm);
  s.spo2_component = kSpo2Weight * ramp(th.spo2_low_pct - spo2_pct, th.spo2_low_pct - th.spo2_ramp_floor_pct);
  s.temp_component = kTempWeight * ramp(body_c - th.body_warn_c, th.body_crit_c - th.body_warn_c);
  s.total = s.hr_component + s.spo2_component + s.temp_component;
  return s;
}

std::string_view to_string(AlertKind kind) { return kNames[static_cast<std::size_t>(kind)]; }

std::optional<AlertKind> alert_kind_from_string(std::string_view s) {
  for (std::size_t i = 0; i < kNames.size(); ++i) {
    if (kNames[i] == s) return static_cast<AlertKind>(i);
  }
  return std::nullopt;
}

bool is_critical(AlertKind kind) {
  return kind == AlertKind::kBodyTempCrit || kind == AlertKind::kAmbientCrit || kind == AlertKind::kOffline;
}

std::vector<AlertKind> AlertState::active_kinds() const {
  std::vector<AlertKind> out;
  for (std::size_t i = 0; i < kAlertKindCount; ++i) {
    if (bits_.test(i)) out.push_back(static_cast<AlertKind>(i));
  }
  return out;
}

Sample Sample::from(const codec::HelmFrame& f) {
  Sample s;
  s.ambient_c = f.ambient_c;
  s.lin_accel = f.lin_accel;
  return s;
}

Sample Sample::from(const codec::StrapFrame& f) {
  Sample s;
  s.hr_bpm = f.hr_bpm;
  s.spo2_pct = f.spo2_pct;
  s.body_c = f.body_c;
  return s;
}

Evaluation evaluate(FirefighterId unit, const AlertState& before, const Sample& sample, double at,
                    const Thresholds& th) {
  Evaluation ev{{}, before};
  const auto apply = [&](AlertKind kind, bool now_active, double value) {
    const bool was = before.active(kind);
    if (now_active && !was) ev.events.push_back(AlertEvent{unit, kind, at, value});
    ev.state.set(kind, now_active);
  };
  const double band = th.hysteresis;

  if (sample.hr_bpm) {
    const double v = *sample.hr_bpm;
    apply(AlertKind::kHighHr, latch_high(before.active(AlertKind::kHighHr), v, th.hr_high_bpm, band), v);
  }
  if (sample.spo2_pct) {
    const double v = *sample.spo2_pct;
    apply(AlertKind::kLowSpo2, latch_low(before.active(AlertKind::kLowSpo2), v, th.spo2_low_pct, band), v);
  }
  if (sample.body_c) {
    const double v = *sample.body_c;
    apply(AlertKind::kBodyTempWarn,
          latch_high(before.active(AlertKind::kBodyTempWarn), v, th.body_warn_c, band), v);
    apply(AlertKind::kBodyTempCrit,
          latch_high(before.active(AlertKind::kBodyTempCrit), v, th.body_crit_c, band), v);
  }
  if (sample.ambient_c) {
    const double v = *sample.ambient_c;
    apply(AlertKind::kAmbientWarn,
          latch_high(before.active(AlertKind::kAmbientWarn), v, th.ambient_warn_c, band), v);
    apply(AlertKind::kAmbientCrit,
          latch_high(before.active(AlertKind::kAmbientCrit), v, th.ambient_crit_c, band), v);
  }
  if (sample.lin_accel) {
    apply(AlertKind::kJerk, detect_jerk(*sample.lin_accel, th), magnitude(*sample.lin_accel));
  }
  return ev;
}

double magnitude(const codec::Vec3& v) { return std::sqrt(v.x * v.x + v.y * v.y + v.z * v.z); }

bool detect_jerk(const codec::Vec3& lin_accel, const Thresholds& th) {
  return magnitude(lin_accel) >= th.jerk_accel_ms2;
}

double heading_from_yaw(double yaw_deg) {
  double h = std::fmod(yaw_deg, 360.0);
  if (h < 0.0) h += 360.0;
  if (h >= 360.0) h -= 360.0;
  return h == 0.0 ? 0.0 : h;  // folds -0.0
}

Liveness staleness(double last_seen, double now, const Thresholds& th) {
  return now - last_seen > th.stale_after_s ? Liveness::kOffline : Liveness::kLive;
}

}  // namespace fireline::vitals
