#pragma once

// Append-only accountability log. One JSON object per line:
//   {"seq":N,"at":T,"kind":"FRAME","payload":{...}}
// seq strictly increases; at never decreases.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace fireline::mission {

enum class RecordKind { kFrame, kAlert, kGeofence, kCommand, kDecodeError, kBoundaryChange, kSession };

std::string_view to_string(RecordKind kind);
std::optional<RecordKind> record_kind_from_string(std::string_view s);

struct LogRecord {
  std::uint64_t seq = 0;
  double at = 0.0;
  RecordKind kind = RecordKind::kFrame;
  nlohmann::json payload;

  nlohmann::json to_json() const;
  // Serialized without a trailing newline; invalid UTF-8 is replaced.
  std::string to_line() const;
  static LogRecord from_line(std::string_view line);

  bool operator==(const LogRecord& o) const { return to_line() == o.to_line(); }
};

class EventLog {
 public:
  EventLog() = default;
  // Every appended record is also written, newline-terminated, to `sink`.
  explicit EventLog(std::ostream* sink) : sink_(sink) {}

  const LogRecord& append(double at, RecordKind kind, nlohmann::json payload);

  const std::vector<LogRecord>& records() const { return records_; }
  std::vector<LogRecord> since(std::uint64_t seq) const;
  std::uint64_t last_seq() const { return records_.empty() ? 0 : records_.back().seq; }
  void flush();

 private:
  std::ostream* sink_ = nullptr;
  std::vector<LogRecord> records_;
};

std::vector<LogRecord> read_log(const std::filesystem::path& file);
std::vector<LogRecord> parse_log(std::string_view text);

}  // namespace fireline::mission
