#include "windtrap/events.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>

namespace windtrap {

namespace {

const char* severity_name(Severity s) {
    switch (s) {
        case Severity::Info: return "info";
        case Severity::Warning: return "warning";
        case Severity::Alarm: return "alarm";
    }
    return "info";
}

bool needs_quoting(const std::string& v) {
    if (v.empty()) return true;
    for (char c : v) {
        if (c == ' ' || c == '"' || c == '=' || c == '\n' || c == '\t') return true;
    }
    return false;
}

std::string quote_value(const std::string& v) {
    if (!needs_quoting(v)) return v;
    std::string out = "\"";
    for (char c : v) {
        if (c == '"' || c == '\\') out.push_back('\\');
        if (c == '\n') { out += "\\n"; continue; }
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

uint64_t wall_clock_us() {
    using namespace std::chrono;
    return duration_cast<microseconds>(system_clock::now().time_since_epoch()).count();
}

}  // namespace

std::string format_iso8601_us(uint64_t ts_us) {
    std::time_t secs = static_cast<std::time_t>(ts_us / 1000000);
    unsigned us = static_cast<unsigned>(ts_us % 1000000);
    std::tm tm{};
    gmtime_r(&secs, &tm);
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02d.%06uZ",
                  tm.tm_year + 1900, tm.tm_mon + 1, tm.tm_mday,
                  tm.tm_hour, tm.tm_min, tm.tm_sec, us);
    return buf;
}

EventLog::EventLog(const std::string& path) { open(path); }

EventLog::~EventLog() { close(); }

bool EventLog::open(const std::string& path) {
    std::lock_guard lk(mu_);
    out_.open(path, std::ios::out | std::ios::trunc);
    return out_.is_open();
}

void EventLog::close() {
    std::lock_guard lk(mu_);
    if (out_.is_open()) out_.close();
}

bool EventLog::is_open() const {
    std::lock_guard lk(mu_);
    return out_.is_open();
}

void EventLog::emit(EventRecord rec) {
    std::lock_guard lk(mu_);
    if (!out_.is_open()) {
        ++dropped_;
        return;
    }
    if (rec.ts_us == 0) rec.ts_us = wall_clock_us();
    if (rec.ts_us <= last_ts_us_) rec.ts_us = last_ts_us_ + 1;
    last_ts_us_ = rec.ts_us;

    out_ << format_iso8601_us(rec.ts_us)
         << " sev=" << severity_name(rec.severity)
         << " src=" << quote_value(rec.source)
         << " kind=" << quote_value(rec.kind);
    for (const auto& [k, v] : rec.attrs) {
        out_ << ' ' << k << '=' << quote_value(v);
    }
    out_ << '\n';
    out_.flush();
    ++written_;
}

void EventLog::emit(std::string source, std::string kind,
                    std::vector<std::pair<std::string, std::string>> attrs, Severity sev) {
    EventRecord rec;
    rec.source = std::move(source);
    rec.kind = std::move(kind);
    rec.attrs = std::move(attrs);
    rec.severity = sev;
    emit(std::move(rec));
}

uint64_t EventLog::lines_written() const {
    std::lock_guard lk(mu_);
    return written_;
}

uint64_t EventLog::lines_dropped() const {
    std::lock_guard lk(mu_);
    return dropped_;
}

namespace {

// Reads one token of the form key=value or key="quoted value" starting at i.
bool read_token(const std::string& line, size_t& i, std::string& key, std::string& val) {
    while (i < line.size() && line[i] == ' ') ++i;
    if (i >= line.size()) return false;
    size_t eq = line.find('=', i);
    if (eq == std::string::npos) return false;
    key = line.substr(i, eq - i);
    i = eq + 1;
    val.clear();
    if (i < line.size() && line[i] == '"') {
        ++i;
        while (i < line.size() && line[i] != '"') {
            if (line[i] == '\\' && i + 1 < line.size()) {
                ++i;
                val.push_back(line[i] == 'n' ? '\n' : line[i]);
            } else {
                val.push_back(line[i]);
            }
            ++i;
        }
        if (i < line.size()) ++i;  // closing quote
    } else {
        while (i < line.size() && line[i] != ' ') {
            val.push_back(line[i]);
            ++i;
        }
    }
    return true;
}

}  // namespace

bool parse_event_line(const std::string& line, ParsedEvent& out) {
    size_t sp = line.find(' ');
    if (sp == std::string::npos || sp < 20) return false;
    out.timestamp = line.substr(0, sp);
    out.attrs.clear();
    size_t i = sp;
    std::string key, val;
    bool have_kind = false;
    while (read_token(line, i, key, val)) {
        if (key == "sev") out.severity = val;
        else if (key == "src") out.source = val;
        else if (key == "kind") { out.kind = val; have_kind = true; }
        else out.attrs[key] = val;
    }
    return have_kind;
}

}  // namespace windtrap
