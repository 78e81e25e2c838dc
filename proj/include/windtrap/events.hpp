#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <mutex>
#include <string>
#include <vector>

namespace windtrap {

enum class Severity { Info, Warning, Alarm };

/// One structured event. Serialized as a single logfmt-style line:
///   2026-08-10T12:00:00.000123Z sev=info src=modbus kind=modbus_write fc=15 peer=...
struct EventRecord {
    uint64_t ts_us = 0;  // wall clock, microseconds since epoch; filled by the sink
    std::string source;
    Severity severity = Severity::Info;
    std::string kind;
    std::vector<std::pair<std::string, std::string>> attrs;
};

std::string format_iso8601_us(uint64_t ts_us);

/// Append-only line sink. Single writer lock keeps per-source ordering; timestamps
/// are coerced monotone across the whole file. Every line is flushed on write.
class EventLog {
public:
    EventLog() = default;
    explicit EventLog(const std::string& path);
    ~EventLog();

    bool open(const std::string& path);
    void close();
    bool is_open() const;

    void emit(EventRecord rec);
    void emit(std::string source, std::string kind,
              std::vector<std::pair<std::string, std::string>> attrs = {},
              Severity sev = Severity::Info);

    uint64_t lines_written() const;
    uint64_t lines_dropped() const;

private:
    mutable std::mutex mu_;
    std::ofstream out_;
    uint64_t last_ts_us_ = 0;
    uint64_t written_ = 0;
    uint64_t dropped_ = 0;
};

/// Parses one serialized event line back into kind/attrs. Used by the report
/// generator; returns false on lines that do not look like event records.
struct ParsedEvent {
    std::string timestamp;
    std::string source;
    std::string severity;
    std::string kind;
    std::map<std::string, std::string> attrs;
};
bool parse_event_line(const std::string& line, ParsedEvent& out);

}  // namespace windtrap
