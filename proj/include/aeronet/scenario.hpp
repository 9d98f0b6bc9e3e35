// Benchmark scenario loading, validation, execution and the per-run world
// wiring (links, autopilots, ACUs, agents, network stacks, channel, traffic
// sources, jammers, trackers, samplers).
#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "aeronet/agent.hpp"
#include "aeronet/mac_phy.hpp"
#include "aeronet/metrics.hpp"

namespace aeronet {

enum class NodeKind { kAir, kGround };
enum class Allegiance { kCooperative, kNoncooperative };
enum class NodeRole { kLeader, kFollower, kFerry };
enum class SpectralMode { kOpen, kCongested, kContested };

struct NodeSpec {
  int id = 0;
  NodeKind kind = NodeKind::kAir;
  Allegiance allegiance = Allegiance::kCooperative;
  NodeRole role = NodeRole::kFollower;
  GeoPoint start;
  RadioConfig radio;
  double endurance_s = 1560.0;
};

struct FlowSpec {
  int source = 0;
  int destination = 0;
  std::uint32_t bytes = 0;
  double period_s = 1.0;
  int priority = kPriorityData;
  double deadline_s = 1.0;
  double start_s = 1.0;
  int ttl = kDefaultTtl;
  std::uint64_t count = 0;  // 0 = unlimited
};

struct PlanSpec {
  MissionKind kind = MissionKind::kReference;
  double takeoff_alt_m = 10.0;
  double loiter_time_s = 20.0;
  std::vector<MissionTask> tasks;
  std::optional<FerryPlanCfg> ferry;
};

struct ScenarioSpec {
  int schema_version = 1;
  std::string name;
  double duration_s = 60.0;
  std::uint64_t seed = 1;
  MacMode mac = MacMode::kCsma;
  ChannelParams channel;
  SpectralMode spectral_mode = SpectralMode::kOpen;
  std::vector<JammerConfig> jammers;
  std::vector<NodeSpec> nodes;
  std::map<int, PlanSpec> plans;  // node id -> plan
  std::vector<FlowSpec> traffic;

  const NodeSpec* node(int id) const;
};

// Strict parse + validation: either a fully valid spec or the complete list
// of violations (ScenarioValidationError), never a partial result.
ScenarioSpec load_scenario_json(const std::string& text);
ScenarioSpec load_scenario_file(const std::string& path);

struct RunResult {
  MetricsReport report;
  std::string events_text;  // full log, header line included
};

// Executes the scenario for its configured duration. Deterministic for a
// fixed (spec, seed): two runs produce byte-identical event logs.
RunResult run_scenario(const ScenarioSpec& spec,
                       std::optional<std::uint64_t> seed_override = std::nullopt);

}  // namespace aeronet
