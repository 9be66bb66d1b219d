#pragma once

// Stress scoring, edge-triggered threshold alerts, jerk detection, heading
// normalization, and link staleness. Everything here is pure; `evaluate`
// takes the caller's previous alert state and returns the next one.

#include <bitset>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fireline/codec.hpp"
#include "fireline/geo.hpp"

namespace fireline::vitals {

struct Thresholds {
  double hr_high_bpm = 150.0;
  double hr_ramp_start_bpm = 100.0;
  double spo2_low_pct = 95.0;
  double spo2_ramp_floor_pct = 85.0;
  double body_warn_c = 38.0;
  double body_crit_c = 40.0;
  double ambient_warn_c = 60.0;
  double ambient_crit_c = 120.0;
  double jerk_accel_ms2 = 29.4;  // 3 g
  double stale_after_s = 10.0;
  // Width of the band a value must leave before an active alert clears.
  double hysteresis = 1.0;

  // Empty string when the ordering constraints hold.
  std::string validate() const;
};

// Reference values kept for documentation. The age-based rule needs an age
// the system does not know, so the fixed hr_high_bpm is used instead. The
// breathing-air oxygen bounds apply to supply air, which no wearable measures.
inline constexpr double kMaxHeartRateIntercept = 220.0;
inline constexpr double kBreathingAirO2MinPct = 19.5;
inline constexpr double kBreathingAirO2MaxPct = 23.5;

inline constexpr double kHrWeight = 40.0;
inline constexpr double kSpo2Weight = 30.0;
inline constexpr double kTempWeight = 30.0;

struct StressBreakdown {
  double hr_component = 0.0;
  double spo2_component = 0.0;
  double temp_component = 0.0;
  double total = 0.0;

  bool operator==(const StressBreakdown&) const = default;
};

StressBreakdown compute_stress(double hr_bpm, double spo2_pct, double body_c,
                               const Thresholds& th = {});

enum class AlertKind {
  kHighHr,
  kLowSpo2,
  kBodyTempWarn,
  kBodyTempCrit,
  kAmbientWarn,
  kAmbientCrit,
  kJerk,
  kOffline,
  kBackOnline,
};
inline constexpr std::size_t kAlertKindCount = 9;

std::string_view to_string(AlertKind kind);
std::optional<AlertKind> alert_kind_from_string(std::string_view s);
bool is_critical(AlertKind kind);

struct AlertEvent {
  FirefighterId unit;
  AlertKind kind = AlertKind::kHighHr;
  double at = 0.0;
  double value = 0.0;

  bool operator==(const AlertEvent&) const = default;
};

// Which edge-triggered conditions are currently latched for one unit.
class AlertState {
 public:
  bool active(AlertKind k) const { return bits_.test(static_cast<std::size_t>(k)); }
  void set(AlertKind k, bool on) { bits_.set(static_cast<std::size_t>(k), on); }
  std::vector<AlertKind> active_kinds() const;

  bool operator==(const AlertState&) const = default;

 private:
  std::bitset<kAlertKindCount> bits_;
};

// Values carried by one incoming frame. Absent fields leave their alerts untouched.
struct Sample {
  std::optional<double> hr_bpm;
  std::optional<double> spo2_pct;
  std::optional<double> body_c;
  std::optional<double> ambient_c;
  std::optional<codec::Vec3> lin_accel;

  static Sample from(const codec::HelmFrame& f);
  static Sample from(const codec::StrapFrame& f);
};

struct Evaluation {
  std::vector<AlertEvent> events;
  AlertState state;
};

Evaluation evaluate(FirefighterId unit, const AlertState& before, const Sample& sample, double at,
                    const Thresholds& th = {});

double magnitude(const codec::Vec3& v);
bool detect_jerk(const codec::Vec3& lin_accel, const Thresholds& th = {});

// Any real yaw folded into [0,360); 0 = north, 90 = east.
double heading_from_yaw(double yaw_deg);

enum class Liveness { kLive, kOffline };

Liveness staleness(double last_seen, double now, const Thresholds& th = {});

}  // namespace fireline::vitals
