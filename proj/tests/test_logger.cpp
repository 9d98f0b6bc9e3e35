#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "aeronet/log.hpp"

using namespace aeronet;

TEST_CASE("gps record carries position, speed and heading") {
  EventLog log("t", 1, 60000);
  log.record(12010, 3, Category::kGps,
             {Attr::fixed("lat", 43.0000123, 7), Attr::fixed("lon", -78.75, 7),
              Attr::fixed("alt", 10.0, 2), Attr::fixed("speed", 5.0, 2),
              Attr::fixed("heading", 90.0, 1), Attr::fixed("odo", 15.25, 3)});
  const std::string line = log.records()[0].line();
  CHECK(line ==
        R"({"t":12.010,"node":3,"seq":1,"cat":"gps","lat":43.0000123,"lon":-78.7500000,)"
        R"("alt":10.00,"speed":5.00,"heading":90.0,"odo":15.250})");
}

TEST_CASE("packet record carries all six id fields") {
  EventLog log("t", 1, 60000);
  log.record(5, 1, Category::kPacket,
             {Attr::str("ev", "deliver"), Attr::num("pid", 7), Attr::num("src", 1),
              Attr::num("dst", 3), Attr::num("snd", 2), Attr::num("rcv", 3),
              Attr::num("prio", 0), Attr::num("size", 52)});
  const auto& rec = log.records()[0];
  for (const char* key : {"pid", "src", "dst", "snd", "rcv", "prio"}) CHECK(rec.has(key));
}

TEST_CASE("time regression is an ordering error") {
  EventLog log("t", 1, 60000);
  log.record(100, 1, Category::kMode, {Attr::str("ev", "arm")});
  CHECK_THROWS_AS(log.record(99, 1, Category::kMode, {}), OrderingError);
  CHECK_NOTHROW(log.record(100, 2, Category::kMode, {}));
}

TEST_CASE("flush and replay round-trip losslessly") {
  EventLog log("demo", 77, 30000);
  for (int i = 0; i < 50; ++i) {
    log.record(i * 7, i % 4, Category::kRadio,
               {Attr::fixed("rssi", -60.0 - i, 2), Attr::fixed("snr", 30.0 - i, 2),
                Attr::str("outcome", i % 3 ? "delivered" : "crc_fail"),
                Attr::num("freq", 2450000000LL), Attr::fixed("gain", 0.0, 1)});
  }
  const std::string text = log.to_string();
  const ReplayData replayed = replay_string(text);
  CHECK(replayed.header.scenario == "demo");
  CHECK(replayed.header.seed == 77);
  CHECK(replayed.header.duration_ms == 30000);
  REQUIRE(replayed.records.size() == 50);

  // Re-serialize: byte identical.
  std::string round = replayed.header.line() + "\n";
  for (const auto& r : replayed.records) round += r.line() + "\n";
  CHECK(round == text);
}

TEST_CASE("malformed line reports its line number") {
  EventLog log("demo", 1, 1000);
  log.record(1, 1, Category::kMode, {Attr::str("ev", "arm")});
  log.record(2, 1, Category::kMode, {Attr::str("ev", "disarm")});
  std::string text = log.to_string();
  text += "{\"t\":3.00";  // truncated final line
  try {
    replay_string(text);
    FAIL("expected LogParseError");
  } catch (const LogParseError& e) {
    CHECK(e.line == 4);
  }
}

TEST_CASE("negative zero normalizes") {
  CHECK(format_fixed(-0.0001, 2) == "0.00");
  CHECK(format_fixed(-0.5, 2) == "-0.50");
}

TEST_CASE("subscriber sees records live, in order") {
  EventLog log("t", 1, 1000);
  std::vector<std::uint64_t> seen;
  log.set_subscriber([&](const EventRecord& rec) { seen.push_back(rec.seq); });
  log.record(1, 1, Category::kMode, {Attr::str("ev", "a")});
  log.record(2, 1, Category::kMode, {Attr::str("ev", "b")});
  CHECK(seen == std::vector<std::uint64_t>{1, 2});
}

TEST_CASE("numeric accessors parse frozen tokens") {
  EventLog log("t", 1, 1000);
  const auto& rec = log.record(1500, 1, Category::kPacket,
                               {Attr::num("pid", 12), Attr::fixed("delay", 1.25, 3)});
  CHECK(rec.integer("pid") == 12);
  CHECK(rec.num("delay") == doctest::Approx(1.25));
  CHECK(rec.t_ms == 1500);
}
