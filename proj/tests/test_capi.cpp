// Exercises the shared-library surface the CLI is built on.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "aeronet.h"

namespace {

const std::string kScenarioDir = AERONET_SCENARIO_DIR;

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void collect_line(void* user, const char* line) {
  static_cast<std::vector<std::string>*>(user)->push_back(line);
}

}  // namespace

TEST_CASE("load, run, persist, recompute: reports match byte for byte") {
  aeronet_scenario* scenario = nullptr;
  REQUIRE(aeronet_scenario_load((kScenarioDir + "/reference_mission.json").c_str(),
                                &scenario) == AERONET_OK);
  CHECK(std::string(aeronet_scenario_name(scenario)) == "reference-mission");
  CHECK(aeronet_scenario_seed(scenario) == 42);

  const std::string events_path = "capi_events.log";
  aeronet_report* report = nullptr;
  REQUIRE(aeronet_run(scenario, nullptr, events_path.c_str(), &report) == AERONET_OK);

  char* rendered = nullptr;
  REQUIRE(aeronet_report_render(report, &rendered) == AERONET_OK);
  REQUIRE(rendered != nullptr);
  const std::string run_metrics = rendered;
  aeronet_string_free(rendered);

  aeronet_report* recomputed = nullptr;
  REQUIRE(aeronet_report_from_log(events_path.c_str(), &recomputed) == AERONET_OK);
  char* rendered2 = nullptr;
  REQUIRE(aeronet_report_render(recomputed, &rendered2) == AERONET_OK);
  CHECK(run_metrics == rendered2);
  aeronet_string_free(rendered2);

  char* summary = nullptr;
  REQUIRE(aeronet_report_summary(report, &summary) == AERONET_OK);
  CHECK(std::strstr(summary, "reference-mission") != nullptr);
  aeronet_string_free(summary);

  aeronet_report_free(report);
  aeronet_report_free(recomputed);
  aeronet_scenario_free(scenario);
}

TEST_CASE("two runs with the same seed write identical logs") {
  aeronet_scenario* scenario = nullptr;
  REQUIRE(aeronet_scenario_load((kScenarioDir + "/reference_mission.json").c_str(),
                                &scenario) == AERONET_OK);
  aeronet_report* r1 = nullptr;
  aeronet_report* r2 = nullptr;
  REQUIRE(aeronet_run(scenario, nullptr, "capi_a.log", &r1) == AERONET_OK);
  REQUIRE(aeronet_run(scenario, nullptr, "capi_b.log", &r2) == AERONET_OK);
  CHECK(slurp("capi_a.log") == slurp("capi_b.log"));
  aeronet_report_free(r1);
  aeronet_report_free(r2);

  // A seed override changes the byte stream.
  const uint64_t other_seed = 43;
  aeronet_report* r3 = nullptr;
  REQUIRE(aeronet_run(scenario, &other_seed, "capi_c.log", &r3) == AERONET_OK);
  CHECK(slurp("capi_a.log") != slurp("capi_c.log"));
  aeronet_report_free(r3);
  aeronet_scenario_free(scenario);
}

TEST_CASE("invalid scenario reports every violation through last_error") {
  const char* bad = R"({
    "schema_version": 1, "name": "bad", "duration_s": 5, "seed": 1, "mac": "csma",
    "spectral": { "mode": "contested", "jammers": [] },
    "nodes": [
      { "id": 1, "kind": "ground", "allegiance": "cooperative", "role": "follower",
        "start": { "lat": 43.0, "lon": -78.78, "alt": 2 },
        "radio": { "tx_power_dbm": 10, "frequency_hz": 2450000000, "bitrate_bps": 250000, "rx_gain_db": 0 } },
      { "id": 1, "kind": "ground", "allegiance": "cooperative", "role": "follower",
        "start": { "lat": 43.0, "lon": -78.78, "alt": 2 },
        "radio": { "tx_power_dbm": 10, "frequency_hz": 2450000000, "bitrate_bps": 250000, "rx_gain_db": 0 } }
    ],
    "plans": {}, "traffic": []
  })";
  aeronet_scenario* scenario = nullptr;
  CHECK(aeronet_scenario_load_json(bad, &scenario) == AERONET_EINVAL);
  CHECK(scenario == nullptr);
  const std::string err = aeronet_last_error();
  CHECK(err.find("duplicate node id 1") != std::string::npos);
  CHECK(err.find("contested mode requires at least one jammer") != std::string::npos);
}

TEST_CASE("replay streams records and honors the category filter") {
  aeronet_scenario* scenario = nullptr;
  REQUIRE(aeronet_scenario_load((kScenarioDir + "/reference_mission.json").c_str(),
                                &scenario) == AERONET_OK);
  aeronet_report* report = nullptr;
  REQUIRE(aeronet_run(scenario, nullptr, "capi_replay.log", &report) == AERONET_OK);
  aeronet_report_free(report);
  aeronet_scenario_free(scenario);

  std::vector<std::string> all;
  REQUIRE(aeronet_replay("capi_replay.log", nullptr, collect_line, &all) == AERONET_OK);
  CHECK(all.size() > 50);

  std::vector<std::string> mission_only;
  REQUIRE(aeronet_replay("capi_replay.log", "mission", collect_line, &mission_only) ==
          AERONET_OK);
  CHECK(mission_only.size() >= 3);  // the three stages at minimum
  CHECK(mission_only.size() < all.size());
  for (const auto& line : mission_only) {
    CHECK(line.find("\"cat\":\"mission\"") != std::string::npos);
  }

  CHECK(aeronet_replay("capi_replay.log", "nonsense", collect_line, &all) == AERONET_EINVAL);
}

TEST_CASE("missing file is an io error") {
  aeronet_scenario* scenario = nullptr;
  CHECK(aeronet_scenario_load("no_such_file.json", &scenario) == AERONET_EIO);
  aeronet_report* report = nullptr;
  CHECK(aeronet_report_from_log("no_such_file.log", &report) == AERONET_EIO);
}

TEST_CASE("empty log yields a zeroed report") {
  {
    std::ofstream out("capi_empty.log", std::ios::binary);
    out << R"({"schema":1,"scenario":"empty","seed":9,"duration_s":60.000})" << "\n";
  }
  aeronet_report* report = nullptr;
  REQUIRE(aeronet_report_from_log("capi_empty.log", &report) == AERONET_OK);
  char* text = nullptr;
  REQUIRE(aeronet_report_render(report, &text) == AERONET_OK);
  const std::string body = text;
  CHECK(body.find("\"classes\": {}") != std::string::npos);
  CHECK(body.find("\"mission_completion_s\": 0.000") != std::string::npos);
  aeronet_string_free(text);
  aeronet_report_free(report);
}

TEST_CASE("corrupted log line is flagged with its line number") {
  {
    std::ofstream out("capi_bad.log", std::ios::binary);
    out << R"({"schema":1,"scenario":"x","seed":1,"duration_s":1.000})" << "\n";
    out << R"({"t":0.100,"node":1,"seq":1,"cat":"mode","ev":"arm"})" << "\n";
    out << "garbage line\n";
  }
  aeronet_report* report = nullptr;
  CHECK(aeronet_report_from_log("capi_bad.log", &report) == AERONET_EINVAL);
  CHECK(std::string(aeronet_last_error()).find("line 3") != std::string::npos);
}

TEST_CASE("version string is present") {
  CHECK(std::strlen(aeronet_version()) > 0);
}
