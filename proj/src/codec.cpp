#include "fireline/codec.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <system_error>
#include <vector>

namespace fireline::codec {

namespace {

// Fixed-point rendering; a value that rounds to zero is printed unsigned so
// that 0.0 and -0.0 encode identically.
std::string fixed(double v, int decimals) {
  char buf[64];
  const int n = std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  std::string s(buf, static_cast<std::size_t>(n));
  if (!s.empty() && s.front() == '-' && s.find_first_not_of("0.", 1) == std::string::npos) {
    s.erase(0, 1);
  }
  return s;
}

std::string fixed_yaw(double yaw) {
  std::string s = fixed(yaw, 2);
  if (s == "360.00") s = "0.00";
  return s;
}

bool in_range(double v, double lo, double hi) { return std::isfinite(v) && v >= lo && v <= hi; }

std::vector<std::string_view> split(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = s.find(',', start);
    if (comma == std::string_view::npos) {
      out.push_back(s.substr(start));
      return out;
    }
    out.push_back(s.substr(start, comma - start));
    start = comma + 1;
  }
}

template <typename Int>
bool parse_int(std::string_view field, Int& out) {
  if (field.empty()) return false;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), out);
  return ec == std::errc() && ptr == field.data() + field.size();
}

bool parse_real(std::string_view field, double& out) {
  if (field.empty()) return false;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), out,
                                         std::chars_format::fixed);
  return ec == std::errc() && ptr == field.data() + field.size() && std::isfinite(out);
}

class Parser {
 public:
  explicit Parser(std::string_view line) : line_(line) {}

  Unexpected<DecodeError> malformed(std::string msg) const {
    return unexpected(DecodeError{DecodeErrorKind::kMalformedFrame, std::string(line_), std::move(msg)});
  }
  Unexpected<DecodeError> range(std::string msg) const {
    return unexpected(DecodeError{DecodeErrorKind::kRangeViolation, std::string(line_), std::move(msg)});
  }

 private:
  std::string_view line_;
};

struct FieldReader {
  const std::vector<std::string_view>& fields;
  std::string error;

  template <typename Int>
  Int integer(std::size_t i, const char* name) {
    Int v{};
    if (error.empty() && !parse_int(fields[i], v)) {
      error = std::string("unparsable integer field '") + name + "'";
    }
    return v;
  }

  double real(std::size_t i, const char* name) {
    double v = 0.0;
    if (error.empty() && !parse_real(fields[i], v)) {
      error = std::string("unparsable number field '") + name + "'";
    }
    return v;
  }
};

}  // namespace

std::string_view to_string(DecodeErrorKind kind) {
  switch (kind) {
    case DecodeErrorKind::kMalformedFrame:
      return "MalformedFrame";
    case DecodeErrorKind::kRangeViolation:
      return "RangeViolation";
  }
  return "?";
}

std::string_view to_string(Command command) {
  switch (command) {
    case Command::kLedRed:
      return "LED_RED";
  }
  return "?";
}

std::string check(const HelmFrame& f) {
  if (!f.id.valid()) return "id out of range";
  if (!is_valid(f.position)) return "position out of range";
  if (!in_range(f.ambient_c, kAmbientMinC, kAmbientMaxC)) return "ambient_c out of thermistor range";
  if (!std::isfinite(f.yaw) || f.yaw < 0.0 || f.yaw >= 360.0) return "yaw not in [0,360)";
  if (!in_range(f.pitch, -90.0, 90.0)) return "pitch not in [-90,90]";
  if (!in_range(f.roll, -180.0, 180.0)) return "roll not in [-180,180]";
  if (!std::isfinite(f.lin_accel.x) || !std::isfinite(f.lin_accel.y) || !std::isfinite(f.lin_accel.z)) {
    return "lin_accel not finite";
  }
  return {};
}

std::string check(const StrapFrame& f) {
  if (!f.id.valid()) return "id out of range";
  if (f.hr_bpm < 0 || f.hr_bpm > kHeartRateMaxBpm) return "hr out of range";
  if (f.pulse_bpm < 0) return "pulse negative";
  if (!in_range(f.spo2_pct, 0.0, 100.0)) return "spo2 not in [0,100]";
  if (!in_range(f.body_c, kBodyMinC, kBodyMaxC)) return "body_c out of sensor range";
  return {};
}

std::string check(const CommandFrame& f) {
  if (!f.target.valid()) return "id out of range";
  return {};
}

std::string check(const Frame& f) {
  return std::visit([](const auto& v) { return check(v); }, f);
}

std::string encode(const Frame& frame) {
  struct Encoder {
    std::string operator()(const HelmFrame& f) const {
      std::string s = "H,";
      s += std::to_string(f.id.value);
      s += ',';
      s += std::to_string(f.seq);
      s += f.gps_fix ? ",1," : ",0,";
      s += fixed(f.position.lat, 6) + ',' + fixed(f.position.lon, 6) + ',';
      s += fixed(f.ambient_c, 2) + ',';
      s += fixed_yaw(f.yaw) + ',' + fixed(f.pitch, 2) + ',' + fixed(f.roll, 2) + ',';
      s += fixed(f.lin_accel.x, 2) + ',' + fixed(f.lin_accel.y, 2) + ',' + fixed(f.lin_accel.z, 2);
      return s;
    }
    std::string operator()(const StrapFrame& f) const {
      std::string s = "S,";
      s += std::to_string(f.id.value) + ',' + std::to_string(f.seq) + ',';
      s += std::to_string(f.hr_bpm) + ',' + std::to_string(f.pulse_bpm) + ',';
      s += fixed(f.spo2_pct, 1) + ',' + fixed(f.body_c, 2);
      return s;
    }
    std::string operator()(const CommandFrame& f) const {
      return "C," + std::to_string(f.target.value) + ',' + std::string(to_string(f.command));
    }
  };
  return std::visit(Encoder{}, frame);
}

Expected<Frame, DecodeError> decode(std::string_view line) {
  const Parser p(line);
  std::string_view body = line;
  while (!body.empty() && (body.back() == '\r' || body.back() == '\n' || body.back() == ' ' ||
                           body.back() == '\t')) {
    body.remove_suffix(1);
  }
  if (body.empty()) return p.malformed("empty line");
  if (body.find('\n') != std::string_view::npos) return p.malformed("embedded newline");

  const auto fields = split(body);
  FieldReader r{fields, {}};

  if (fields[0] == "H") {
    if (fields.size() != 13) return p.malformed("helm frame needs 13 fields");
    HelmFrame f;
    f.id = FirefighterId(r.integer<std::uint32_t>(1, "id"));
    f.seq = r.integer<std::uint64_t>(2, "seq");
    if (r.error.empty() && fields[3] != "0" && fields[3] != "1") r.error = "gps_fix must be 0 or 1";
    f.gps_fix = fields[3] == "1";
    f.position.lat = r.real(4, "lat");
    f.position.lon = r.real(5, "lon");
    f.ambient_c = r.real(6, "ambient_c");
    f.yaw = r.real(7, "yaw");
    f.pitch = r.real(8, "pitch");
    f.roll = r.real(9, "roll");
    f.lin_accel = {r.real(10, "ax"), r.real(11, "ay"), r.real(12, "az")};
    if (!r.error.empty()) return p.malformed(r.error);
    if (auto msg = check(f); !msg.empty()) return p.range(msg);
    return Frame{f};
  }
  if (fields[0] == "S") {
    if (fields.size() != 7) return p.malformed("strap frame needs 7 fields");
    StrapFrame f;
    f.id = FirefighterId(r.integer<std::uint32_t>(1, "id"));
    f.seq = r.integer<std::uint64_t>(2, "seq");
    f.hr_bpm = r.integer<int>(3, "hr");
    f.pulse_bpm = r.integer<int>(4, "pulse");
    f.spo2_pct = r.real(5, "spo2");
    f.body_c = r.real(6, "body_c");
    if (!r.error.empty()) return p.malformed(r.error);
    if (auto msg = check(f); !msg.empty()) return p.range(msg);
    return Frame{f};
  }
  if (fields[0] == "C") {
    if (fields.size() != 3) return p.malformed("command frame needs 3 fields");
    CommandFrame f;
    f.target = FirefighterId(r.integer<std::uint32_t>(1, "id"));
    if (!r.error.empty()) return p.malformed(r.error);
    if (fields[2] != "LED_RED") return p.malformed("unknown command");
    if (auto msg = check(f); !msg.empty()) return p.range(msg);
    return Frame{f};
  }
  return p.malformed("unknown frame tag");
}

double airtime(std::string_view line, double data_rate_bps) {
  return static_cast<double>(line.size() + 1) * 8.0 / data_rate_bps;
}

FirefighterId frame_id(const Frame& frame) {
  struct Id {
    FirefighterId operator()(const HelmFrame& f) const { return f.id; }
    FirefighterId operator()(const StrapFrame& f) const { return f.id; }
    FirefighterId operator()(const CommandFrame& f) const { return f.target; }
  };
  return std::visit(Id{}, frame);
}

}  // namespace fireline::codec
