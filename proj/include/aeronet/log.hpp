// Structured, replayable event log. One JSON object per line, fixed key
// order, fixed-precision numbers. Attribute values are stored as canonical
// JSON scalar tokens frozen at record time, so flushing and replaying a log
// is lossless byte-for-byte and metrics recomputed from a file equal the
// in-run report exactly.
#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "aeronet/errors.hpp"
#include "aeronet/sim.hpp"

namespace aeronet {

enum class Category { kGps, kMavlink, kPacket, kRadio, kMode, kMission, kError };

std::string_view category_name(Category c);
std::optional<Category> category_from_name(std::string_view name);

// One key/value attribute; `raw` is a ready-to-emit JSON scalar token
// (number, quoted string, true/false).
struct Attr {
  std::string key;
  std::string raw;

  static Attr num(std::string key, long long v);
  static Attr num(std::string key, unsigned long long v);
  static Attr num(std::string key, int v) { return num(key, static_cast<long long>(v)); }
  static Attr num(std::string key, long v) { return num(key, static_cast<long long>(v)); }
  static Attr num(std::string key, unsigned v) {
    return num(key, static_cast<unsigned long long>(v));
  }
  static Attr num(std::string key, unsigned long v) {
    return num(key, static_cast<unsigned long long>(v));
  }
  // Fixed-point decimal with `decimals` fractional digits; -0 normalizes to 0.
  static Attr fixed(std::string key, double v, int decimals);
  static Attr str(std::string key, std::string_view v);
  static Attr boolean(std::string key, bool v);
};

struct EventRecord {
  SimMs t_ms = 0;
  int node = 0;
  std::uint64_t seq = 0;
  Category cat = Category::kError;
  std::vector<Attr> attrs;

  std::string line() const;

  const std::string* find(std::string_view key) const;
  // Parsed accessors; return fallback when the key is absent.
  double num(std::string_view key, double fallback = 0.0) const;
  long long integer(std::string_view key, long long fallback = 0) const;
  std::string text(std::string_view key, std::string_view fallback = "") const;
  bool has(std::string_view key) const { return find(key) != nullptr; }
};

// Header metadata shared by a log and the reports computed from it.
struct LogHeader {
  int schema = 1;
  std::string scenario;
  std::uint64_t seed = 0;
  SimMs duration_ms = 0;

  std::string line() const;
};

class EventLog {
 public:
  EventLog(std::string scenario_name, std::uint64_t seed, SimMs duration_ms);

  // Appends a record; throws OrderingError when t regresses.
  const EventRecord& record(SimMs t_ms, int node, Category cat, std::vector<Attr> attrs);

  const LogHeader& header() const { return header_; }
  const std::vector<EventRecord>& records() const { return records_; }

  // Live tap over appended records, the in-process stand-in for streaming a
  // telemetry feed to a ground station.
  void set_subscriber(std::function<void(const EventRecord&)> fn) {
    subscriber_ = std::move(fn);
  }

  std::string to_string() const;
  void flush_to(std::ostream& out) const;

 private:
  LogHeader header_;
  std::vector<EventRecord> records_;
  std::function<void(const EventRecord&)> subscriber_;
  SimMs last_t_ = -1;
  std::uint64_t next_seq_ = 1;
};

struct ReplayData {
  LogHeader header;
  std::vector<EventRecord> records;
};

// Parse a flushed log; throws LogParseError with the 1-based line number.
ReplayData replay_string(const std::string& text);
ReplayData replay_file(const std::string& path);

// Formatting helpers shared with the metrics renderer.
std::string format_ms_as_seconds(SimMs ms);          // 12010 -> "12.010"
std::string format_fixed(double v, int decimals);    // canonical %.Nf, -0 -> 0
std::string json_escape(std::string_view s);

}  // namespace aeronet
