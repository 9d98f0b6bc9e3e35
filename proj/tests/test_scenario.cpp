#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <string>

#include "aeronet/scenario.hpp"

using namespace aeronet;

namespace {

const std::string kScenarioDir = AERONET_SCENARIO_DIR;

std::string minimal_two_node(const std::string& extra_node_fields = "",
                             const std::string& traffic = "[]",
                             const std::string& spectral =
                                 R"({ "mode": "open", "jammers": [] })") {
  return std::string(R"({
    "schema_version": 1,
    "name": "minimal",
    "duration_s": 5,
    "seed": 1,
    "mac": "csma",
    "spectral": )") +
         spectral + R"(,
    "nodes": [
      { "id": 1, "kind": "ground", "allegiance": "cooperative", "role": "follower",
        "start": { "lat": 43.0, "lon": -78.78, "alt": 2 },
        "radio": { "tx_power_dbm": 10, "frequency_hz": 2450000000, "bitrate_bps": 250000, "rx_gain_db": 0 })" +
         extra_node_fields + R"( },
      { "id": 2, "kind": "ground", "allegiance": "cooperative", "role": "follower",
        "start": { "lat": 43.0001, "lon": -78.78, "alt": 2 },
        "radio": { "tx_power_dbm": 10, "frequency_hz": 2450000000, "bitrate_bps": 250000, "rx_gain_db": 0 } }
    ],
    "plans": {},
    "traffic": )" +
         traffic + "\n}";
}

std::vector<std::string> violations_of(const std::string& json_text) {
  try {
    load_scenario_json(json_text);
  } catch (const ScenarioValidationError& e) {
    return e.violations;
  }
  return {};
}

bool any_contains(const std::vector<std::string>& violations, const std::string& needle) {
  for (const auto& v : violations) {
    if (v.find(needle) != std::string::npos) return true;
  }
  return false;
}

}  // namespace

TEST_CASE("minimal two-node open scenario is valid") {
  const ScenarioSpec spec = load_scenario_json(minimal_two_node());
  CHECK(spec.name == "minimal");
  CHECK(spec.nodes.size() == 2);
  CHECK(spec.mac == MacMode::kCsma);
}

TEST_CASE("duplicate node id is reported by id") {
  std::string text = minimal_two_node();
  const auto pos = text.find("\"id\": 2");
  text.replace(pos, 7, "\"id\": 1");
  const auto violations = violations_of(text);
  REQUIRE_FALSE(violations.empty());
  CHECK(any_contains(violations, "duplicate node id 1"));
}

TEST_CASE("contested mode without jammers violates the schema") {
  const auto violations =
      violations_of(minimal_two_node("", "[]", R"({ "mode": "contested", "jammers": [] })"));
  CHECK(any_contains(violations, "contested mode requires at least one jammer"));
}

TEST_CASE("open mode with a jammer violates the schema") {
  const auto violations = violations_of(minimal_two_node(
      "", "[]",
      R"({ "mode": "open", "jammers": [ { "position": {"lat": 43.0, "lon": -78.78, "alt": 2},
          "power_dbm": 20, "frequency_hz": 2450000000, "behavior": "passive" } ] })"));
  CHECK(any_contains(violations, "open mode requires zero jammers"));
}

TEST_CASE("unknown fields are errors, not warnings") {
  const auto violations = violations_of(minimal_two_node(", \"color\": \"red\""));
  CHECK(any_contains(violations, "unknown field 'color'"));
}

TEST_CASE("dangling flow endpoints are named") {
  const auto violations = violations_of(minimal_two_node(
      "",
      R"([ { "source": 1, "destination": 9, "bytes": 10, "period_s": 1, "priority": 1, "deadline_s": 1 } ])"));
  CHECK(any_contains(violations, "traffic[0].destination"));
}

TEST_CASE("all violations are collected in one pass") {
  std::string text = minimal_two_node(
      ", \"color\": \"red\"",
      R"([ { "source": 9, "destination": 8, "bytes": 4000, "period_s": 1, "priority": 7, "deadline_s": 1 } ])");
  const auto violations = violations_of(text);
  CHECK(violations.size() >= 4);  // unknown key, two endpoints, bytes, priority
}

TEST_CASE("plans are rejected on ground nodes and unknown nodes") {
  std::string text = minimal_two_node();
  const auto pos = text.find("\"plans\": {}");
  text.replace(pos, 11,
               R"("plans": { "1": { "type": "reference" }, "9": { "type": "reference" } })");
  const auto violations = violations_of(text);
  CHECK(any_contains(violations, "plans.1"));
  CHECK(any_contains(violations, "cooperative air nodes"));
  CHECK(any_contains(violations, "plans.9"));
  CHECK(any_contains(violations, "no such node"));
}

TEST_CASE("tour deadlines must be non-decreasing") {
  std::string text = minimal_two_node();
  std::string plan = R"("plans": { "1": { "type": "tour", "tasks": [
    { "target": {"lat": 43.0, "lon": -78.78, "alt": 5}, "deadline_s": 30 },
    { "target": {"lat": 43.0, "lon": -78.78, "alt": 5}, "deadline_s": 10 } ] } })";
  std::string node_fix = text;
  const auto kind_pos = node_fix.find("\"kind\": \"ground\"");
  node_fix.replace(kind_pos, 16, "\"kind\": \"air\"");
  const auto pos = node_fix.find("\"plans\": {}");
  node_fix.replace(pos, 11, plan);
  CHECK(any_contains(violations_of(node_fix), "non-decreasing"));
}

TEST_CASE("radio frequency outside the tuning range is rejected") {
  std::string text = minimal_two_node();
  const auto pos = text.find("2450000000");
  text.replace(pos, 10, "10000000");  // 10 MHz
  CHECK(any_contains(violations_of(text), "tuning range"));
}

TEST_CASE("same spec and seed twice produce identical reports and logs") {
  const ScenarioSpec spec =
      load_scenario_file(kScenarioDir + "/reference_mission.json");
  const RunResult a = run_scenario(spec);
  const RunResult b = run_scenario(spec);
  CHECK(a.events_text == b.events_text);
  CHECK(render_metrics(a.report) == render_metrics(b.report));
}

TEST_CASE("seed override changes the log header") {
  const ScenarioSpec spec =
      load_scenario_file(kScenarioDir + "/reference_mission.json");
  const RunResult a = run_scenario(spec, 999);
  const ReplayData replayed = replay_string(a.events_text);
  CHECK(replayed.header.seed == 999);
}

TEST_CASE("reference mission run shows stages and landing in the log") {
  const ScenarioSpec spec =
      load_scenario_file(kScenarioDir + "/reference_mission.json");
  const RunResult result = run_scenario(spec);
  const ReplayData replayed = replay_string(result.events_text);

  std::vector<std::string> stages;
  bool landed = false;
  for (const auto& rec : replayed.records) {
    if (rec.cat == Category::kMission && rec.text("ev") == "stage") {
      stages.push_back(rec.text("stage"));
    }
    if (rec.cat == Category::kMode && rec.text("mode") == "disarmed" &&
        rec.text("reason") == "landed") {
      landed = true;
    }
  }
  CHECK(stages == std::vector<std::string>{"start", "loiter", "stop"});
  CHECK(landed);
  CHECK(result.report.mission_completion_s > 25.0);
  CHECK(result.report.mission_completion_s < 35.0);
}

TEST_CASE("flooding on a lossless connected line delivers everything") {
  const ScenarioSpec spec = load_scenario_file(kScenarioDir + "/line5_flooding.json");
  const RunResult result = run_scenario(spec);
  const auto& cls = result.report.classes.at(kPriorityData);
  CHECK(cls.offered == 20);
  CHECK(cls.delivered == 20);
  CHECK(cls.loss_ratio == 0.0);
}

TEST_CASE("metrics: 10 sends with 8 deliveries is loss ratio 0.2") {
  EventLog log("synthetic", 1, 10000);
  for (int i = 1; i <= 10; ++i) {
    log.record(i * 100, 1, Category::kPacket,
               {Attr::str("ev", "send"), Attr::num("pid", i), Attr::num("src", 1),
                Attr::num("dst", 2), Attr::num("snd", 1), Attr::num("rcv", 255),
                Attr::num("prio", 0), Attr::num("size", 52), Attr::num("ttl", 8),
                Attr::num("deadline_ms", 500)});
  }
  for (int i = 1; i <= 8; ++i) {
    log.record(2000 + i * 100, 2, Category::kPacket,
               {Attr::str("ev", "deliver"), Attr::num("pid", i), Attr::num("src", 1),
                Attr::num("dst", 2), Attr::num("snd", 1), Attr::num("rcv", 2),
                Attr::num("prio", 0), Attr::num("size", 52), Attr::num("ttl", 8),
                Attr::num("deadline_ms", 500), Attr::boolean("expired", true)});
  }
  log.record(10000, 0, Category::kMission, {Attr::str("ev", "run_end")});

  const MetricsReport report = compute_metrics(ReplayData{log.header(), log.records()});
  const auto& cls = report.classes.at(0);
  CHECK(cls.offered == 10);
  CHECK(cls.delivered == 8);
  CHECK(cls.lost == 2);
  CHECK(cls.loss_ratio == doctest::Approx(0.2));
}

TEST_CASE("metrics: delivery 1.0 s after send against a 0.5 s deadline is a miss") {
  EventLog log("synthetic", 1, 10000);
  log.record(4000, 1, Category::kPacket,
             {Attr::str("ev", "send"), Attr::num("pid", 1), Attr::num("src", 1),
              Attr::num("dst", 2), Attr::num("snd", 1), Attr::num("rcv", 255),
              Attr::num("prio", 1), Attr::num("size", 120), Attr::num("ttl", 8),
              Attr::num("deadline_ms", 500)});
  log.record(5000, 2, Category::kPacket,
             {Attr::str("ev", "deliver"), Attr::num("pid", 1), Attr::num("src", 1),
              Attr::num("dst", 2), Attr::num("snd", 1), Attr::num("rcv", 2),
              Attr::num("prio", 1), Attr::num("size", 120), Attr::num("ttl", 8),
              Attr::num("deadline_ms", 500), Attr::boolean("expired", true)});
  log.record(10000, 0, Category::kMission, {Attr::str("ev", "run_end")});

  const MetricsReport report = compute_metrics(ReplayData{log.header(), log.records()});
  const auto& cls = report.classes.at(1);
  CHECK(cls.delivered == 1);
  CHECK(cls.deadline_miss_ratio == doctest::Approx(1.0));
  CHECK(cls.mean_delay_s == doctest::Approx(1.0));
}

TEST_CASE("straight flight distance from the odometer is within half a meter") {
  // 100 m tour leg: distance_m reflects the per-tick displacement sum.
  const std::string text = R"({
    "schema_version": 1, "name": "leg", "duration_s": 60, "seed": 3, "mac": "csma",
    "spectral": { "mode": "open", "jammers": [] },
    "nodes": [ { "id": 1, "kind": "air", "allegiance": "cooperative", "role": "follower",
      "start": { "lat": 43.0, "lon": -78.78, "alt": 0 },
      "radio": { "tx_power_dbm": 10, "frequency_hz": 2450000000, "bitrate_bps": 250000, "rx_gain_db": 0 } } ],
    "plans": { "1": { "type": "tour", "takeoff_alt_m": 10, "tasks": [
      { "target": { "lat": 43.00089932, "lon": -78.78, "alt": 10 },
        "deadline_s": 50, "loiter_s": 0, "payload_bytes": 0, "report_to": 0 } ] } },
    "traffic": []
  })";
  const RunResult result = run_scenario(load_scenario_json(text));
  REQUIRE(result.report.distance_m.count(1));
  // 10 m climb + 100 m leg (landing starts at the 2 m acceptance radius)
  // + 10 m descent.
  CHECK(result.report.distance_m.at(1) > 117.0);
  CHECK(result.report.distance_m.at(1) < 120.5);
  REQUIRE_FALSE(result.report.tasks.empty());
  CHECK(result.report.tasks[0].met);
  CHECK(result.report.mission_completion_s >=
        result.report.tasks[0].completed_s);  // completion after the last task
}

TEST_CASE("compute_metrics from the persisted log equals the in-run report") {
  const ScenarioSpec spec = load_scenario_file(kScenarioDir + "/line5_flooding.json");
  const RunResult result = run_scenario(spec);
  const ReplayData replayed = replay_string(result.events_text);
  const MetricsReport recomputed = compute_metrics(replayed);
  CHECK(render_metrics(recomputed) == render_metrics(result.report));
}

TEST_CASE("truncated log without the terminator is a partial-log error") {
  const ScenarioSpec spec = load_scenario_file(kScenarioDir + "/reference_mission.json");
  RunResult result = run_scenario(spec);
  ReplayData replayed = replay_string(result.events_text);
  replayed.records.pop_back();  // drop the run_end terminator
  CHECK_THROWS_AS(compute_metrics(replayed), PartialLogError);
}

TEST_CASE("two touring drones report arrivals to a ground leader") {
  const std::string text = R"({
    "schema_version": 1, "name": "pair-tour", "duration_s": 60, "seed": 21, "mac": "csma",
    "spectral": { "mode": "open", "jammers": [] },
    "nodes": [
      { "id": 1, "kind": "air", "allegiance": "cooperative", "role": "follower",
        "start": { "lat": 43.0, "lon": -78.78, "alt": 0 },
        "radio": { "tx_power_dbm": 10, "frequency_hz": 2450000000, "bitrate_bps": 250000, "rx_gain_db": 0 } },
      { "id": 2, "kind": "air", "allegiance": "cooperative", "role": "follower",
        "start": { "lat": 43.0002, "lon": -78.78, "alt": 0 },
        "radio": { "tx_power_dbm": 10, "frequency_hz": 2450000000, "bitrate_bps": 250000, "rx_gain_db": 0 } },
      { "id": 3, "kind": "ground", "allegiance": "cooperative", "role": "leader",
        "start": { "lat": 43.0001, "lon": -78.78, "alt": 2 },
        "radio": { "tx_power_dbm": 10, "frequency_hz": 2450000000, "bitrate_bps": 250000, "rx_gain_db": 0 } }
    ],
    "plans": {
      "1": { "type": "tour", "takeoff_alt_m": 10, "tasks": [
        { "target": { "lat": 43.0004, "lon": -78.78, "alt": 10 },
          "deadline_s": 40, "loiter_s": 2, "payload_bytes": 64, "report_to": 3 } ] },
      "2": { "type": "tour", "takeoff_alt_m": 15, "tasks": [
        { "target": { "lat": 42.9998, "lon": -78.78, "alt": 15 },
          "deadline_s": 40, "loiter_s": 2, "payload_bytes": 64, "report_to": 3 } ] }
    },
    "traffic": []
  })";
  const RunResult result = run_scenario(load_scenario_json(text));

  int completions = 0;
  int reports_at_leader = 0;
  for (const auto& rec : replay_string(result.events_text).records) {
    if (rec.cat == Category::kMission && rec.text("ev") == "plan_complete") ++completions;
    if (rec.cat == Category::kPacket && rec.text("ev") == "deliver" && rec.node == 3) {
      ++reports_at_leader;
    }
  }
  CHECK(completions == 2);
  CHECK(reports_at_leader == 2);
  REQUIRE(result.report.tasks.size() == 2);
  for (const auto& task : result.report.tasks) CHECK(task.met);
  CHECK(result.report.distance_m.size() == 2);
}

TEST_CASE("removing the jammer never decreases delivery ratios") {
  // Two isolated pairs exchanging ttl-1 unicast under TDMA, jammer between.
  auto build = [](bool jammed) {
    std::string spectral =
        jammed ? R"({ "mode": "contested", "jammers": [ { "position": { "lat": 43.0009, "lon": -78.78, "alt": 2 },
                   "power_dbm": 5, "frequency_hz": 2450000000, "behavior": "passive" } ] })"
               : R"({ "mode": "open", "jammers": [] })";
    return std::string(R"({
      "schema_version": 1, "name": "mono", "duration_s": 30, "seed": 77, "mac": "tdma",
      "spectral": )") +
           spectral + R"(,
      "nodes": [
        { "id": 1, "kind": "ground", "allegiance": "cooperative", "role": "follower",
          "start": { "lat": 43.0, "lon": -78.78, "alt": 2 },
          "radio": { "tx_power_dbm": 10, "frequency_hz": 2450000000, "bitrate_bps": 250000, "rx_gain_db": 0 } },
        { "id": 2, "kind": "ground", "allegiance": "cooperative", "role": "follower",
          "start": { "lat": 43.0008, "lon": -78.78, "alt": 2 },
          "radio": { "tx_power_dbm": 10, "frequency_hz": 2450000000, "bitrate_bps": 250000, "rx_gain_db": 0 } },
        { "id": 3, "kind": "ground", "allegiance": "cooperative", "role": "follower",
          "start": { "lat": 43.0010, "lon": -78.78, "alt": 2 },
          "radio": { "tx_power_dbm": 10, "frequency_hz": 2450000000, "bitrate_bps": 250000, "rx_gain_db": 0 } },
        { "id": 4, "kind": "ground", "allegiance": "cooperative", "role": "follower",
          "start": { "lat": 43.0018, "lon": -78.78, "alt": 2 },
          "radio": { "tx_power_dbm": 10, "frequency_hz": 2450000000, "bitrate_bps": 250000, "rx_gain_db": 0 } }
      ],
      "plans": {},
      "traffic": [
        { "source": 1, "destination": 2, "bytes": 64, "period_s": 0.5, "priority": 1, "deadline_s": 2, "start_s": 1, "ttl": 1, "count": 0 },
        { "source": 3, "destination": 4, "bytes": 64, "period_s": 0.5, "priority": 1, "deadline_s": 2, "start_s": 1.1, "ttl": 1, "count": 0 }
      ]
    })";
  };
  const RunResult jammed = run_scenario(load_scenario_json(build(true)));
  const RunResult open = run_scenario(load_scenario_json(build(false)));
  for (const auto& [priority, cls] : jammed.report.classes) {
    const auto& open_cls = open.report.classes.at(priority);
    CHECK(open_cls.offered == cls.offered);
    CHECK(open_cls.delivered >= cls.delivered);
  }
}
