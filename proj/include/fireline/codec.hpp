#pragma once

// One-row CSV wire frames exchanged between wearables and the base station.
//
//   helm:    H,<id>,<seq>,<gps_fix:0|1>,<lat>,<lon>,<ambient_c>,<yaw>,<pitch>,<roll>,<ax>,<ay>,<az>
//   strap:   S,<id>,<seq>,<hr>,<pulse>,<spo2>,<body_c>
//   command: C,<id>,LED_RED
//
// lat/lon carry 6 decimals, spo2 carries 1, every other real field carries 2.

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <variant>

#include "fireline/expected.hpp"
#include "fireline/geo.hpp"

namespace fireline::codec {

inline constexpr double kAmbientMinC = -50.0;
inline constexpr double kAmbientMaxC = 350.0;
// MLX90614 object-temperature range.
inline constexpr double kBodyMinC = -70.0;
inline constexpr double kBodyMaxC = 380.0;
inline constexpr int kHeartRateMaxBpm = 300;

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  bool operator==(const Vec3&) const = default;
};

struct HelmFrame {
  FirefighterId id;
  std::uint64_t seq = 0;
  bool gps_fix = false;
  // Last known fix when gps_fix is false.
  GeoPoint position;
  double ambient_c = 0.0;
  double yaw = 0.0;
  double pitch = 0.0;
  double roll = 0.0;
  Vec3 lin_accel;  // m/s^2, gravity removed

  bool operator==(const HelmFrame&) const = default;
};

struct StrapFrame {
  FirefighterId id;
  std::uint64_t seq = 0;
  int hr_bpm = 0;
  int pulse_bpm = 0;
  double spo2_pct = 0.0;
  double body_c = 0.0;

  bool operator==(const StrapFrame&) const = default;
};

enum class Command { kLedRed };

struct CommandFrame {
  FirefighterId target;
  Command command = Command::kLedRed;

  bool operator==(const CommandFrame&) const = default;
};

using Frame = std::variant<HelmFrame, StrapFrame, CommandFrame>;

enum class DecodeErrorKind { kMalformedFrame, kRangeViolation };

struct DecodeError {
  DecodeErrorKind kind;
  std::string line;
  std::string message;
};

std::string_view to_string(DecodeErrorKind kind);
std::string_view to_string(Command command);

// Type-invariant checks; an empty string means valid.
std::string check(const HelmFrame& f);
std::string check(const StrapFrame& f);
std::string check(const CommandFrame& f);
std::string check(const Frame& f);

std::string encode(const Frame& frame);

Expected<Frame, DecodeError> decode(std::string_view line);

// Channel occupancy of one line: (bytes + terminator) * 8 / rate.
double airtime(std::string_view line, double data_rate_bps);

FirefighterId frame_id(const Frame& frame);

}  // namespace fireline::codec
