#include "fireline/event_log.hpp"

#include <array>
#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace fireline::mission {

namespace {
constexpr std::array<std::string_view, 7> kKindNames = {
    "FRAME", "ALERT", "GEOFENCE", "COMMAND", "DECODE_ERROR", "BOUNDARY_CHANGE", "SESSION",
};
}  // namespace

std::string_view to_string(RecordKind kind) { return kKindNames[static_cast<std::size_t>(kind)]; }

std::optional<RecordKind> record_kind_from_string(std::string_view s) {
  for (std::size_t i = 0; i < kKindNames.size(); ++i) {
    if (kKindNames[i] == s) return static_cast<RecordKind>(i);
  }
  return std::nullopt;
}

nlohmann::json LogRecord::to_json() const {
  return {{"seq", seq}, {"at", at}, {"kind", to_string(kind)}, {"payload", payload}};
}

std::string LogRecord::to_line() const {
  return to_json().dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
}

LogRecord LogRecord::from_line(std::string_view line) {
  const auto doc = nlohmann::json::parse(line);
  LogRecord r;
  r.seq = doc.at("seq").get<std::uint64_t>();
  r.at = doc.at("at").get<double>();
  const auto kind = record_kind_from_string(doc.at("kind").get<std::string>());
  if (!kind) throw std::runtime_error("unknown log record kind");
  r.kind = *kind;
  r.payload = doc.at("payload");
  return r;
}

const LogRecord& EventLog::append(double at, RecordKind kind, nlohmann::json payload) {
  if (!records_.empty() && at < records_.back().at) {
    throw std::logic_error("log records must be appended in time order");
  }
  LogRecord r{last_seq() + 1, at, kind, std::move(payload)};
  if (sink_ != nullptr) *sink_ << r.to_line() << '\n';
  records_.push_back(std::move(r));
  return records_.back();
}

std::vector<LogRecord> EventLog::since(std::uint64_t seq) const {
  std::vector<LogRecord> out;
  // seq is 1-based and dense, so it doubles as an index.
  for (std::size_t i = static_cast<std::size_t>(std::min<std::uint64_t>(seq, records_.size()));
       i < records_.size(); ++i) {
    out.push_back(records_[i]);
  }
  return out;
}

void EventLog::flush() {
  if (sink_ != nullptr) sink_->flush();
}

std::vector<LogRecord> parse_log(std::string_view text) {
  std::vector<LogRecord> out;
  std::size_t start = 0;
  std::size_t lineno = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    const std::string_view line = text.substr(start, end - start);
    ++lineno;
    if (!line.empty()) {
      try {
        out.push_back(LogRecord::from_line(line));
      } catch (const std::exception& e) {
        throw std::runtime_error("log line " + std::to_string(lineno) + ": " + e.what());
      }
    }
    start = end + 1;
  }
  return out;
}

std::vector<LogRecord> read_log(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open log file " + file.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_log(ss.str());
}

}  // namespace fireline::mission
