#include "aeronet/log.hpp"

#include <cctype>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <ostream>
#include <sstream>

namespace aeronet {

std::string_view category_name(Category c) {
  switch (c) {
    case Category::kGps: return "gps";
    case Category::kMavlink: return "mavlink";
    case Category::kPacket: return "packet";
    case Category::kRadio: return "radio";
    case Category::kMode: return "mode";
    case Category::kMission: return "mission";
    case Category::kError: return "error";
  }
  return "error";
}

std::optional<Category> category_from_name(std::string_view name) {
  if (name == "gps") return Category::kGps;
  if (name == "mavlink") return Category::kMavlink;
  if (name == "packet") return Category::kPacket;
  if (name == "radio") return Category::kRadio;
  if (name == "mode") return Category::kMode;
  if (name == "mission") return Category::kMission;
  if (name == "error") return Category::kError;
  return std::nullopt;
}

std::string format_fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
  std::string s = buf;
  // Normalize negative zero so equal values always format identically.
  if (s[0] == '-' && s.find_first_not_of("-0.") == std::string::npos) {
    s.erase(0, 1);
  }
  return s;
}

std::string format_ms_as_seconds(SimMs ms) {
  char buf[40];
  const char* sign = ms < 0 ? "-" : "";
  const SimMs a = ms < 0 ? -ms : ms;
  std::snprintf(buf, sizeof(buf), "%s%" PRId64 ".%03" PRId64, sign, a / 1000, a % 1000);
  return buf;
}

std::string json_escape(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof(buf), "\\u%04x", c);
          out += buf;
        } else {
          out += c;
        }
    }
  }
  return out;
}

Attr Attr::num(std::string key, long long v) { return Attr{std::move(key), std::to_string(v)}; }

Attr Attr::num(std::string key, unsigned long long v) {
  return Attr{std::move(key), std::to_string(v)};
}

Attr Attr::fixed(std::string key, double v, int decimals) {
  return Attr{std::move(key), format_fixed(v, decimals)};
}

Attr Attr::str(std::string key, std::string_view v) {
  return Attr{std::move(key), "\"" + json_escape(v) + "\""};
}

Attr Attr::boolean(std::string key, bool v) { return Attr{std::move(key), v ? "true" : "false"}; }

namespace {

std::string unescape_body(std::string_view body) {
  std::string out;
  out.reserve(body.size());
  for (std::size_t i = 0; i < body.size(); ++i) {
    char c = body[i];
    if (c == '\\' && i + 1 < body.size()) {
      char n = body[++i];
      switch (n) {
        case 'n': out += '\n'; break;
        case 'r': out += '\r'; break;
        case 't': out += '\t'; break;
        default: out += n;
      }
    } else {
      out += c;
    }
  }
  return out;
}

}  // namespace

const std::string* EventRecord::find(std::string_view key) const {
  for (const auto& a : attrs) {
    if (a.key == key) return &a.raw;
  }
  return nullptr;
}

double EventRecord::num(std::string_view key, double fallback) const {
  const std::string* raw = find(key);
  if (!raw) return fallback;
  return std::strtod(raw->c_str(), nullptr);
}

long long EventRecord::integer(std::string_view key, long long fallback) const {
  const std::string* raw = find(key);
  if (!raw) return fallback;
  return std::strtoll(raw->c_str(), nullptr, 10);
}

std::string EventRecord::text(std::string_view key, std::string_view fallback) const {
  const std::string* raw = find(key);
  if (!raw) return std::string(fallback);
  if (raw->size() >= 2 && raw->front() == '"' && raw->back() == '"') {
    return unescape_body(std::string_view(*raw).substr(1, raw->size() - 2));
  }
  return *raw;
}

std::string EventRecord::line() const {
  std::string out = "{\"t\":";
  out += format_ms_as_seconds(t_ms);
  out += ",\"node\":";
  out += std::to_string(node);
  out += ",\"seq\":";
  out += std::to_string(seq);
  out += ",\"cat\":\"";
  out += category_name(cat);
  out += '"';
  for (const auto& a : attrs) {
    out += ",\"";
    out += a.key;
    out += "\":";
    out += a.raw;
  }
  out += '}';
  return out;
}

std::string LogHeader::line() const {
  std::string out = "{\"schema\":";
  out += std::to_string(schema);
  out += ",\"scenario\":\"";
  out += json_escape(scenario);
  out += "\",\"seed\":";
  out += std::to_string(seed);
  out += ",\"duration_s\":";
  out += format_ms_as_seconds(duration_ms);
  out += '}';
  return out;
}

EventLog::EventLog(std::string scenario_name, std::uint64_t seed, SimMs duration_ms) {
  header_.scenario = std::move(scenario_name);
  header_.seed = seed;
  header_.duration_ms = duration_ms;
}

const EventRecord& EventLog::record(SimMs t_ms, int node, Category cat, std::vector<Attr> attrs) {
  if (t_ms < last_t_) {
    throw OrderingError("event time regression: t=" + std::to_string(t_ms) +
                        " after t=" + std::to_string(last_t_));
  }
  last_t_ = t_ms;
  EventRecord rec;
  rec.t_ms = t_ms;
  rec.node = node;
  rec.seq = next_seq_++;
  rec.cat = cat;
  rec.attrs = std::move(attrs);
  records_.push_back(std::move(rec));
  if (subscriber_) subscriber_(records_.back());
  return records_.back();
}

std::string EventLog::to_string() const {
  std::string out = header_.line();
  out += '\n';
  for (const auto& r : records_) {
    out += r.line();
    out += '\n';
  }
  return out;
}

void EventLog::flush_to(std::ostream& out) const { out << to_string(); }

namespace {

// Minimal parser for the flat one-level JSON objects this log emits. Values
// are kept as raw tokens so a parsed record re-serializes byte-identically.
struct FlatParser {
  std::string_view s;
  std::size_t pos = 0;
  std::size_t line_no;

  explicit FlatParser(std::string_view text, std::size_t line) : s(text), line_no(line) {}

  [[noreturn]] void fail(const std::string& what) { throw LogParseError(line_no, what); }

  void expect(char c) {
    if (pos >= s.size() || s[pos] != c) {
      fail(std::string("expected '") + c + "'");
    }
    ++pos;
  }

  std::string parse_string_token() {
    const std::size_t start = pos;
    expect('"');
    while (pos < s.size() && s[pos] != '"') {
      if (s[pos] == '\\') ++pos;
      ++pos;
    }
    if (pos >= s.size()) fail("unterminated string");
    ++pos;
    return std::string(s.substr(start, pos - start));
  }

  std::string parse_value_token() {
    if (pos >= s.size()) fail("missing value");
    if (s[pos] == '"') return parse_string_token();
    const std::size_t start = pos;
    while (pos < s.size() && s[pos] != ',' && s[pos] != '}') ++pos;
    if (pos == start) fail("empty value");
    std::string token(s.substr(start, pos - start));
    // Accept numbers and JSON literals only; nested structures never occur.
    if (token != "true" && token != "false" && token != "null") {
      char* end = nullptr;
      std::strtod(token.c_str(), &end);
      if (end != token.c_str() + token.size()) fail("malformed value '" + token + "'");
    }
    return token;
  }

  std::vector<Attr> parse_object() {
    std::vector<Attr> attrs;
    expect('{');
    if (pos < s.size() && s[pos] == '}') {
      ++pos;
      return attrs;
    }
    while (true) {
      std::string key_token = parse_string_token();
      expect(':');
      std::string value = parse_value_token();
      attrs.push_back(Attr{key_token.substr(1, key_token.size() - 2), std::move(value)});
      if (pos >= s.size()) fail("unterminated object");
      if (s[pos] == ',') {
        ++pos;
        continue;
      }
      expect('}');
      break;
    }
    if (pos != s.size()) fail("trailing bytes after object");
    return attrs;
  }
};

SimMs parse_seconds_to_ms(const std::string& token, std::size_t line_no) {
  // Times are emitted as seconds with exactly three decimals.
  const auto dot = token.find('.');
  char* end = nullptr;
  const long long whole = std::strtoll(token.c_str(), &end, 10);
  if (dot == std::string::npos || token.size() - dot - 1 != 3) {
    throw LogParseError(line_no, "time not in s.mmm form: " + token);
  }
  const long long frac = std::strtoll(token.c_str() + dot + 1, &end, 10);
  const bool negative = token[0] == '-';
  const long long abs_whole = whole < 0 ? -whole : whole;
  const long long ms = abs_whole * 1000 + frac;
  return negative ? -ms : ms;
}

std::string take_attr(std::vector<Attr>& attrs, std::string_view key, std::size_t line_no) {
  for (std::size_t i = 0; i < attrs.size(); ++i) {
    if (attrs[i].key == key) {
      std::string raw = attrs[i].raw;
      attrs.erase(attrs.begin() + static_cast<std::ptrdiff_t>(i));
      return raw;
    }
  }
  throw LogParseError(line_no, "missing field '" + std::string(key) + "'");
}

std::string unquote(const std::string& raw, std::size_t line_no) {
  if (raw.size() < 2 || raw.front() != '"' || raw.back() != '"') {
    throw LogParseError(line_no, "expected string, got " + raw);
  }
  return unescape_body(std::string_view(raw).substr(1, raw.size() - 2));
}

}  // namespace

ReplayData replay_string(const std::string& text) {
  ReplayData out;
  std::size_t line_no = 0;
  std::size_t start = 0;
  bool have_header = false;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string::npos) end = text.size();
    std::string_view line(text.data() + start, end - start);
    start = end + 1;
    ++line_no;
    if (line.empty()) continue;

    FlatParser parser(line, line_no);
    std::vector<Attr> attrs = parser.parse_object();
    if (!have_header) {
      out.header.schema = static_cast<int>(
          std::strtoll(take_attr(attrs, "schema", line_no).c_str(), nullptr, 10));
      out.header.scenario = unquote(take_attr(attrs, "scenario", line_no), line_no);
      out.header.seed = std::strtoull(take_attr(attrs, "seed", line_no).c_str(), nullptr, 10);
      out.header.duration_ms = parse_seconds_to_ms(take_attr(attrs, "duration_s", line_no), line_no);
      have_header = true;
      continue;
    }

    EventRecord rec;
    rec.t_ms = parse_seconds_to_ms(take_attr(attrs, "t", line_no), line_no);
    rec.node = static_cast<int>(
        std::strtoll(take_attr(attrs, "node", line_no).c_str(), nullptr, 10));
    rec.seq = std::strtoull(take_attr(attrs, "seq", line_no).c_str(), nullptr, 10);
    const std::string cat_name = unquote(take_attr(attrs, "cat", line_no), line_no);
    auto cat = category_from_name(cat_name);
    if (!cat) throw LogParseError(line_no, "unknown category '" + cat_name + "'");
    rec.cat = *cat;
    rec.attrs = std::move(attrs);
    out.records.push_back(std::move(rec));
  }
  if (!have_header) throw LogParseError(1, "missing log header");
  return out;
}

ReplayData replay_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SimError("cannot open log file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return replay_string(buf.str());
}

}  // namespace aeronet
