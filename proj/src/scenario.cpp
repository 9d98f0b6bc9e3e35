#include "aeronet/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <memory>
#include <sstream>

#include <json.hpp>

namespace aeronet {

using nlohmann::json;

const NodeSpec* ScenarioSpec::node(int id) const {
  for (const auto& n : nodes) {
    if (n.id == id) return &n;
  }
  return nullptr;
}

namespace {

// ---------------------------------------------------------------------------
// Parsing & validation. Violations accumulate; nothing partial escapes.
// ---------------------------------------------------------------------------

struct Validator {
  std::vector<std::string> violations;

  void fail(const std::string& where, const std::string& what) {
    violations.push_back(where + ": " + what);
  }

  void check_keys(const json& obj, const std::string& where,
                  std::initializer_list<const char*> allowed) {
    for (const auto& [key, value] : obj.items()) {
      (void)value;
      if (std::find_if(allowed.begin(), allowed.end(),
                       [&key](const char* k) { return key == k; }) == allowed.end()) {
        fail(where, "unknown field '" + key + "'");
      }
    }
  }

  double number(const json& obj, const std::string& where, const char* key, double fallback,
                bool required = false) {
    if (!obj.contains(key)) {
      if (required) fail(where, std::string("missing field '") + key + "'");
      return fallback;
    }
    if (!obj[key].is_number()) {
      fail(where, std::string("field '") + key + "' must be a number");
      return fallback;
    }
    return obj[key].get<double>();
  }

  std::string text(const json& obj, const std::string& where, const char* key,
                   const std::string& fallback, bool required = false) {
    if (!obj.contains(key)) {
      if (required) fail(where, std::string("missing field '") + key + "'");
      return fallback;
    }
    if (!obj[key].is_string()) {
      fail(where, std::string("field '") + key + "' must be a string");
      return fallback;
    }
    return obj[key].get<std::string>();
  }

  GeoPoint point(const json& obj, const std::string& where) {
    GeoPoint p;
    if (!obj.is_object()) {
      fail(where, "must be an object with lat/lon/alt");
      return p;
    }
    check_keys(obj, where, {"lat", "lon", "alt"});
    p.latitude = number(obj, where, "lat", 0.0, true);
    p.longitude = number(obj, where, "lon", 0.0, true);
    p.altitude = number(obj, where, "alt", 0.0, true);
    if (std::abs(p.latitude) > 90.0) fail(where, "lat out of range");
    if (std::abs(p.longitude) > 180.0) fail(where, "lon out of range");
    if (p.altitude < 0.0) fail(where, "alt must be >= 0");
    return p;
  }
};

RadioConfig parse_radio(Validator& v, const json& obj, const std::string& where) {
  RadioConfig radio;
  if (!obj.is_object()) {
    v.fail(where, "radio must be an object");
    return radio;
  }
  v.check_keys(obj, where, {"tx_power_dbm", "frequency_hz", "bitrate_bps", "rx_gain_db"});
  radio.tx_power_dbm = v.number(obj, where, "tx_power_dbm", 10.0);
  radio.carrier_frequency_hz = v.number(obj, where, "frequency_hz", 2.45e9, true);
  radio.bitrate_bps = v.number(obj, where, "bitrate_bps", 250000.0);
  radio.rx_gain_db = v.number(obj, where, "rx_gain_db", 0.0);
  if (radio.carrier_frequency_hz < kMinCarrierHz || radio.carrier_frequency_hz > kMaxCarrierHz) {
    v.fail(where, "frequency_hz outside the 70 MHz - 6 GHz tuning range");
  }
  if (radio.bitrate_bps <= 0) v.fail(where, "bitrate_bps must be > 0");
  return radio;
}

ScenarioSpec parse_and_validate(const json& root) {
  Validator v;
  ScenarioSpec spec;

  if (!root.is_object()) {
    throw ScenarioValidationError({"document: scenario must be a JSON object"});
  }
  v.check_keys(root, "scenario",
               {"schema_version", "name", "duration_s", "seed", "mac", "channel", "spectral",
                "nodes", "plans", "traffic"});

  spec.schema_version = static_cast<int>(v.number(root, "scenario", "schema_version", 0, true));
  if (spec.schema_version != 1) v.fail("schema_version", "must be 1");
  spec.name = v.text(root, "scenario", "name", "", true);
  if (spec.name.empty()) v.fail("name", "must be a non-empty string");
  spec.duration_s = v.number(root, "scenario", "duration_s", 0.0, true);
  if (spec.duration_s <= 0) v.fail("duration_s", "must be > 0");
  if (root.contains("seed")) {
    if (root["seed"].is_number_unsigned()) {
      spec.seed = root["seed"].get<std::uint64_t>();
    } else {
      v.fail("seed", "must be a non-negative integer");
    }
  } else {
    v.fail("seed", "missing field 'seed'");
  }

  const std::string mac = v.text(root, "scenario", "mac", "csma", true);
  if (mac == "csma") {
    spec.mac = MacMode::kCsma;
  } else if (mac == "tdma") {
    spec.mac = MacMode::kTdma;
  } else if (mac == "aloha") {
    spec.mac = MacMode::kAloha;
  } else {
    v.fail("mac", "must be one of csma, tdma, aloha");
  }

  if (root.contains("channel")) {
    const auto& ch = root["channel"];
    v.check_keys(ch, "channel",
                 {"pl0_db", "path_loss_exp", "noise_floor_dbm", "per_threshold_db",
                  "per_slope_db"});
    spec.channel.pl0_db = v.number(ch, "channel", "pl0_db", 40.0);
    spec.channel.path_loss_exp = v.number(ch, "channel", "path_loss_exp", 2.7);
    spec.channel.noise_floor_dbm = v.number(ch, "channel", "noise_floor_dbm", -95.0);
    spec.channel.per_threshold_db = v.number(ch, "channel", "per_threshold_db", 5.0);
    spec.channel.per_slope_db = v.number(ch, "channel", "per_slope_db", 2.0);
    if (spec.channel.path_loss_exp < 2.0) v.fail("channel.path_loss_exp", "must be >= 2");
    if (spec.channel.per_slope_db <= 0) v.fail("channel.per_slope_db", "must be > 0");
  }

  // Nodes.
  std::map<int, const NodeSpec*> by_id;
  if (!root.contains("nodes") || !root["nodes"].is_array() || root["nodes"].empty()) {
    v.fail("nodes", "must be a non-empty array");
  } else {
    int index = 0;
    for (const auto& jn : root["nodes"]) {
      const std::string where = "nodes[" + std::to_string(index) + "]";
      NodeSpec node;
      v.check_keys(jn, where,
                   {"id", "kind", "allegiance", "role", "start", "radio", "endurance_s"});
      node.id = static_cast<int>(v.number(jn, where, "id", 0, true));
      if (node.id < 1 || node.id > 254) {
        v.fail(where + ".id", "must be in 1..254 (255 is the broadcast id)");
      }
      const std::string kind = v.text(jn, where, "kind", "air", true);
      if (kind == "air") {
        node.kind = NodeKind::kAir;
      } else if (kind == "ground") {
        node.kind = NodeKind::kGround;
      } else {
        v.fail(where + ".kind", "must be air or ground");
      }
      const std::string allegiance = v.text(jn, where, "allegiance", "cooperative", true);
      if (allegiance == "cooperative") {
        node.allegiance = Allegiance::kCooperative;
      } else if (allegiance == "noncooperative") {
        node.allegiance = Allegiance::kNoncooperative;
      } else {
        v.fail(where + ".allegiance", "must be cooperative or noncooperative");
      }
      const std::string role = v.text(jn, where, "role", "follower");
      if (role == "leader") {
        node.role = NodeRole::kLeader;
      } else if (role == "follower") {
        node.role = NodeRole::kFollower;
      } else if (role == "ferry") {
        node.role = NodeRole::kFerry;
      } else {
        v.fail(where + ".role", "must be leader, follower or ferry");
      }
      if (jn.contains("start")) {
        node.start = v.point(jn["start"], where + ".start");
      } else {
        v.fail(where, "missing field 'start'");
      }
      if (jn.contains("radio")) {
        node.radio = parse_radio(v, jn["radio"], where + ".radio");
      } else {
        v.fail(where, "missing field 'radio'");
      }
      node.endurance_s = v.number(jn, where, "endurance_s", 1560.0);
      if (node.endurance_s <= 0) v.fail(where + ".endurance_s", "must be > 0");
      if (node.role == NodeRole::kFerry &&
          (node.kind != NodeKind::kAir || node.allegiance != Allegiance::kCooperative)) {
        v.fail(where, "ferry role requires a cooperative air node");
      }
      spec.nodes.push_back(node);
      ++index;
    }
    for (const auto& n : spec.nodes) {
      if (by_id.count(n.id)) {
        v.fail("nodes", "duplicate node id " + std::to_string(n.id));
      } else {
        by_id[n.id] = &n;
      }
    }
  }

  auto cooperative = [&](int id) {
    auto it = by_id.find(id);
    return it != by_id.end() && it->second->allegiance == Allegiance::kCooperative;
  };

  // Plans.
  if (root.contains("plans")) {
    if (!root["plans"].is_object()) {
      v.fail("plans", "must be an object keyed by node id");
    } else {
      for (const auto& [key, jp] : root["plans"].items()) {
        const std::string where = "plans." + key;
        int node_id = 0;
        try {
          node_id = std::stoi(key);
        } catch (...) {
          v.fail(where, "key must be a node id");
          continue;
        }
        auto it = by_id.find(node_id);
        if (it == by_id.end()) {
          v.fail(where, "no such node");
          continue;
        }
        if (it->second->kind != NodeKind::kAir ||
            it->second->allegiance != Allegiance::kCooperative) {
          v.fail(where, "plans are only valid for cooperative air nodes");
        }
        PlanSpec plan;
        v.check_keys(jp, where,
                     {"type", "takeoff_alt_m", "loiter_time_s", "tasks", "region_a", "region_b",
                      "radius_m", "dwell_s"});
        const std::string type = v.text(jp, where, "type", "", true);
        plan.takeoff_alt_m = v.number(jp, where, "takeoff_alt_m", 10.0);
        plan.loiter_time_s = v.number(jp, where, "loiter_time_s", 20.0);
        if (plan.takeoff_alt_m <= 0) v.fail(where + ".takeoff_alt_m", "must be > 0");
        if (type == "reference") {
          plan.kind = MissionKind::kReference;
          if (plan.loiter_time_s <= 0) v.fail(where + ".loiter_time_s", "must be > 0");
        } else if (type == "tour") {
          plan.kind = MissionKind::kTour;
          if (!jp.contains("tasks") || !jp["tasks"].is_array()) {
            v.fail(where, "tour plan requires a tasks array");
          } else {
            int ti = 0;
            double last_deadline = 0.0;
            for (const auto& jt : jp["tasks"]) {
              const std::string twhere = where + ".tasks[" + std::to_string(ti) + "]";
              v.check_keys(jt, twhere,
                           {"target", "deadline_s", "loiter_s", "payload_bytes", "report_to"});
              MissionTask task;
              if (jt.contains("target")) {
                task.target = v.point(jt["target"], twhere + ".target");
              } else {
                v.fail(twhere, "missing field 'target'");
              }
              task.deadline_s = v.number(jt, twhere, "deadline_s", 0.0, true);
              task.loiter_s = v.number(jt, twhere, "loiter_s", 0.0);
              task.payload_bytes =
                  static_cast<std::uint32_t>(v.number(jt, twhere, "payload_bytes", 0.0));
              task.report_to = static_cast<int>(v.number(jt, twhere, "report_to", 0.0));
              if (task.deadline_s < last_deadline) {
                v.fail(twhere + ".deadline_s", "deadlines must be non-decreasing");
              }
              last_deadline = task.deadline_s;
              if (task.payload_bytes > kMtuBytes) {
                v.fail(twhere + ".payload_bytes", "exceeds the MTU");
              }
              if (task.payload_bytes > 0 && !cooperative(task.report_to)) {
                v.fail(twhere + ".report_to", "must name a cooperative node");
              }
              plan.tasks.push_back(task);
              ++ti;
            }
          }
        } else if (type == "ferry") {
          plan.kind = MissionKind::kFerry;
          FerryPlanCfg ferry;
          if (jp.contains("region_a")) {
            ferry.region_a = v.point(jp["region_a"], where + ".region_a");
          } else {
            v.fail(where, "ferry plan requires region_a");
          }
          if (jp.contains("region_b")) {
            ferry.region_b = v.point(jp["region_b"], where + ".region_b");
          } else {
            v.fail(where, "ferry plan requires region_b");
          }
          ferry.radius_m = v.number(jp, where, "radius_m", 50.0);
          ferry.dwell_s = v.number(jp, where, "dwell_s", 10.0);
          if (ferry.radius_m <= 0) v.fail(where + ".radius_m", "must be > 0");
          if (ferry.dwell_s <= 0) v.fail(where + ".dwell_s", "must be > 0");
          plan.ferry = ferry;
          if (it != by_id.end() && it->second->role != NodeRole::kFerry) {
            v.fail(where, "ferry plan requires the node role to be ferry");
          }
        } else {
          v.fail(where + ".type", "must be reference, tour or ferry");
        }
        spec.plans[node_id] = std::move(plan);
      }
    }
  }

  // Traffic flows.
  if (root.contains("traffic")) {
    if (!root["traffic"].is_array()) {
      v.fail("traffic", "must be an array");
    } else {
      int index = 0;
      for (const auto& jf : root["traffic"]) {
        const std::string where = "traffic[" + std::to_string(index) + "]";
        v.check_keys(jf, where,
                     {"source", "destination", "bytes", "period_s", "priority", "deadline_s",
                      "start_s", "ttl", "count"});
        FlowSpec flow;
        flow.source = static_cast<int>(v.number(jf, where, "source", 0, true));
        flow.destination = static_cast<int>(v.number(jf, where, "destination", 0, true));
        flow.bytes = static_cast<std::uint32_t>(v.number(jf, where, "bytes", 0, true));
        flow.period_s = v.number(jf, where, "period_s", 1.0, true);
        flow.priority = static_cast<int>(v.number(jf, where, "priority", kPriorityData, true));
        flow.deadline_s = v.number(jf, where, "deadline_s", 1.0, true);
        flow.start_s = v.number(jf, where, "start_s", 1.0);
        flow.ttl = static_cast<int>(v.number(jf, where, "ttl", kDefaultTtl));
        flow.count = static_cast<std::uint64_t>(v.number(jf, where, "count", 0));
        if (!cooperative(flow.source)) v.fail(where + ".source", "must name a cooperative node");
        if (flow.destination != kBroadcastNodeId && !cooperative(flow.destination)) {
          v.fail(where + ".destination", "must name a cooperative node or 255 (broadcast)");
        }
        if (flow.bytes < 1 || flow.bytes > kMtuBytes) {
          v.fail(where + ".bytes", "must be in 1.." + std::to_string(kMtuBytes));
        }
        if (flow.period_s <= 0) v.fail(where + ".period_s", "must be > 0");
        if (flow.priority != kPriorityControl && flow.priority != kPriorityData) {
          v.fail(where + ".priority", "must be 0 (control) or 1 (data)");
        }
        if (flow.deadline_s <= 0) v.fail(where + ".deadline_s", "must be > 0");
        if (flow.ttl < 1 || flow.ttl > 255) v.fail(where + ".ttl", "must be in 1..255");
        spec.traffic.push_back(flow);
        ++index;
      }
    }
  }

  // Spectral environment.
  if (root.contains("spectral")) {
    const auto& js = root["spectral"];
    v.check_keys(js, "spectral", {"mode", "jammers"});
    const std::string mode = v.text(js, "spectral", "mode", "open", true);
    if (mode == "open") {
      spec.spectral_mode = SpectralMode::kOpen;
    } else if (mode == "congested") {
      spec.spectral_mode = SpectralMode::kCongested;
    } else if (mode == "contested") {
      spec.spectral_mode = SpectralMode::kContested;
    } else {
      v.fail("spectral.mode", "must be open, congested or contested");
    }
    if (js.contains("jammers")) {
      if (!js["jammers"].is_array()) {
        v.fail("spectral.jammers", "must be an array");
      } else {
        int index = 0;
        for (const auto& jj : js["jammers"]) {
          const std::string where = "spectral.jammers[" + std::to_string(index) + "]";
          v.check_keys(jj, where,
                       {"position", "power_dbm", "frequency_hz", "behavior", "duty_cycle",
                        "period_s"});
          JammerConfig jam;
          if (jj.contains("position")) {
            jam.position = v.point(jj["position"], where + ".position");
          } else {
            v.fail(where, "missing field 'position'");
          }
          jam.power_dbm = v.number(jj, where, "power_dbm", 20.0, true);
          jam.frequency_hz = v.number(jj, where, "frequency_hz", 2.45e9, true);
          const std::string behavior = v.text(jj, where, "behavior", "passive", true);
          if (behavior == "passive") {
            jam.adaptive = false;
          } else if (behavior == "adaptive") {
            jam.adaptive = true;
          } else {
            v.fail(where + ".behavior", "must be passive or adaptive");
          }
          jam.duty_cycle = v.number(jj, where, "duty_cycle", 1.0);
          jam.period_ms =
              static_cast<SimMs>(std::llround(v.number(jj, where, "period_s", 0.1) * 1000.0));
          if (jam.duty_cycle < 0.0 || jam.duty_cycle > 1.0) {
            v.fail(where + ".duty_cycle", "must be in [0, 1]");
          }
          if (jam.period_ms <= 0) v.fail(where + ".period_s", "must be > 0");
          if (jam.frequency_hz < kMinCarrierHz || jam.frequency_hz > kMaxCarrierHz) {
            v.fail(where + ".frequency_hz", "outside the 70 MHz - 6 GHz tuning range");
          }
          spec.jammers.push_back(jam);
          ++index;
        }
      }
    }
  }
  if (spec.spectral_mode == SpectralMode::kOpen && !spec.jammers.empty()) {
    v.fail("spectral", "open mode requires zero jammers");
  }
  if (spec.spectral_mode == SpectralMode::kContested && spec.jammers.empty()) {
    v.fail("spectral", "contested mode requires at least one jammer");
  }

  if (!v.violations.empty()) throw ScenarioValidationError(std::move(v.violations));
  return spec;
}

}  // namespace

ScenarioSpec load_scenario_json(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ScenarioValidationError({std::string("document: not valid JSON: ") + e.what()});
  }
  return parse_and_validate(root);
}

ScenarioSpec load_scenario_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SimError("cannot open scenario file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return load_scenario_json(buf.str());
}

// ---------------------------------------------------------------------------
// World wiring and execution.
// ---------------------------------------------------------------------------

namespace {

struct NodeRuntime {
  NodeSpec spec;
  std::unique_ptr<Network> net;
  std::unique_ptr<Mac> mac;
  std::unique_ptr<Autopilot> autopilot;  // air nodes only
  std::unique_ptr<Acu> acu;
  std::unique_ptr<Agent> agent;
  bool arm_sent = false;
};

}  // namespace

RunResult run_scenario(const ScenarioSpec& spec, std::optional<std::uint64_t> seed_override) {
  const std::uint64_t seed = seed_override.value_or(spec.seed);
  const SimMs duration_ms = static_cast<SimMs>(std::llround(spec.duration_s * 1000.0));

  Scheduler sched;
  EventLog log(spec.name, seed, duration_ms);
  Channel channel(sched, log, spec.channel);
  LinkManager links(sched);

  for (const auto& jam : spec.jammers) channel.add_jammer(jam);

  // Per-node random streams; node order never perturbs another node's draws.
  std::map<int, RngStream> rngs;
  std::map<int, std::unique_ptr<NodeRuntime>> world;

  std::vector<int> coop_ids;
  for (const auto& n : spec.nodes) {
    if (n.allegiance == Allegiance::kCooperative) coop_ids.push_back(n.id);
  }
  std::sort(coop_ids.begin(), coop_ids.end());

  for (const auto& n : spec.nodes) {
    if (n.allegiance != Allegiance::kCooperative) continue;
    rngs.emplace(n.id, RngStream(seed, n.id));
    auto rt = std::make_unique<NodeRuntime>();
    rt->spec = n;
    rt->net = std::make_unique<Network>(sched, log, n.id);

    MacConfig mac_config;
    mac_config.mode = spec.mac;
    mac_config.node_id = n.id;
    mac_config.tdma_schedule = coop_ids;
    rt->mac = std::make_unique<Mac>(sched, log, channel, rngs.at(n.id), mac_config);
    rt->mac->set_pdu_source([net = rt->net.get()] { return net->next_pdu(); });
    rt->mac->set_pdu_sink(
        [net = rt->net.get()](std::span<const std::uint8_t> pdu) { net->on_pdu_from_mac(pdu); });
    rt->net->on_tx_ready = [mac = rt->mac.get()] { mac->notify_tx_ready(); };

    if (n.kind == NodeKind::kAir) {
      AutopilotConfig ap;
      ap.system_id = n.id;
      ap.start = n.start;
      ap.endurance_ms = static_cast<SimMs>(std::llround(n.endurance_s * 1000.0));
      rt->autopilot = std::make_unique<Autopilot>(sched, log, ap);

      const LinkId link = links.open_link(
          {LinkKind::kSerial, "ttyACM" + std::to_string(n.id), 115200});
      rt->acu = std::make_unique<Acu>(sched, log, n.id);
      rt->acu->attach_link(links, link, 0);
      rt->autopilot->attach_link(links, link, 1);
      links.connect_link(link);

      // Start order fixes intra-tick execution: kinematics advance before
      // the agent observes the state.
      rt->autopilot->start();
      rt->acu->start();

      auto plan_it = spec.plans.find(n.id);
      if (plan_it != spec.plans.end()) {
        AgentConfig agent_config;
        agent_config.node_id = n.id;
        agent_config.kind = plan_it->second.kind;
        agent_config.loiter_time_ms =
            static_cast<SimMs>(std::llround(plan_it->second.loiter_time_s * 1000.0));
        agent_config.takeoff_alt_m = plan_it->second.takeoff_alt_m;
        agent_config.tasks = plan_it->second.tasks;
        agent_config.ferry = plan_it->second.ferry;
        rt->agent = std::make_unique<Agent>(
            sched, log, agent_config, *rt->acu,
            [ap_ptr = rt->autopilot.get()]() -> const VehicleState& { return ap_ptr->state(); },
            rt->net.get());
        rt->agent->start();
      }

      channel.add_node(n.id, n.radio,
                       [ap_ptr = rt->autopilot.get()] { return ap_ptr->state().position; });
    } else {
      channel.add_node(n.id, n.radio, [start = n.start] { return start; });
    }
    rt->mac->start();
    world.emplace(n.id, std::move(rt));
  }

  channel.set_unit_draw([&rngs](int node) { return rngs.at(node).next_unit(); });
  channel.set_frame_sink([&world](int rx, std::vector<std::uint8_t> bytes) {
    auto it = world.find(rx);
    if (it != world.end()) it->second->mac->on_frame_from_channel(std::move(bytes));
  });

  // Arm every planned vehicle as soon as its proxy registers (first
  // heartbeat), polling on a 100 ms grid.
  for (auto& [id, rt] : world) {
    if (!rt->agent || !rt->acu) continue;
    auto* runtime = rt.get();
    const int node_id = id;
    sched.schedule_every(100, node_id, [runtime, node_id] {
      if (runtime->arm_sent || !runtime->acu->has_proxy(node_id)) return;
      runtime->arm_sent = true;
      runtime->acu->execute_command(mav::kCmdDoSetMode, static_cast<std::uint8_t>(node_id), 0,
                                    {static_cast<double>(mav::kModeArmed | mav::kModeAutonomous),
                                     0, 0, 0, 0, 0, 0});
    });
  }

  // Traffic generators.
  for (std::size_t i = 0; i < spec.traffic.size(); ++i) {
    const FlowSpec flow = spec.traffic[i];
    auto* rt = world.at(flow.source).get();
    const SimMs start_ms = static_cast<SimMs>(std::llround(flow.start_s * 1000.0));
    const SimMs period_ms = static_cast<SimMs>(std::llround(flow.period_s * 1000.0));
    const std::uint32_t deadline_ms =
        static_cast<std::uint32_t>(std::llround(flow.deadline_s * 1000.0));
    auto sent = std::make_shared<std::uint64_t>(0);
    struct FlowTask {
      Scheduler* sched;
      Network* net;
      FlowSpec flow;
      SimMs period_ms;
      std::uint32_t deadline_ms;
      std::shared_ptr<std::uint64_t> sent;
      std::size_t flow_index;
      void operator()() const {
        if (flow.count != 0 && *sent >= flow.count) return;
        ++*sent;
        std::vector<std::uint8_t> payload(flow.bytes,
                                          static_cast<std::uint8_t>(0x40 + flow_index));
        net->send_data(static_cast<std::uint8_t>(flow.destination),
                       static_cast<std::uint8_t>(flow.priority), deadline_ms, payload,
                       static_cast<std::uint8_t>(flow.ttl));
        sched->schedule_at_ms(sched->now_ms() + period_ms, flow.source, FlowTask{*this});
      }
    };
    sched.schedule_at_ms(start_ms, flow.source,
                         FlowTask{&sched, rt->net.get(), flow, period_ms, deadline_ms, sent, i});
  }

  // 1 Hz GPS track samples for air nodes.
  auto sample_gps = [&log, &sched](const NodeRuntime& rt) {
    const VehicleState& s = rt.autopilot->state();
    log.record(sched.now_ms(), rt.spec.id, Category::kGps,
               {Attr::fixed("lat", s.position.latitude, 7),
                Attr::fixed("lon", s.position.longitude, 7),
                Attr::fixed("alt", s.position.altitude, 2),
                Attr::fixed("speed", s.groundspeed, 2), Attr::fixed("heading", s.heading, 1),
                Attr::fixed("odo", s.odometer_m, 3)});
  };
  for (auto& [id, rt] : world) {
    if (!rt->autopilot) continue;
    auto* runtime = rt.get();
    sched.schedule_every(1000, id, [&sample_gps, runtime] { sample_gps(*runtime); });
  }

  // Run terminator: final GPS samples, then the run_end record, ordered last
  // among tasks at the final instant.
  constexpr int kRunEndOwner = 1000;
  sched.schedule_at_ms(duration_ms, kRunEndOwner, [&] {
    for (auto& [id, rt] : world) {
      if (rt->autopilot) sample_gps(*rt);
    }
    log.record(sched.now_ms(), kWorldNode, Category::kMission, {Attr::str("ev", "run_end")});
  });

  sched.run_until_ms(duration_ms);

  RunResult result;
  result.report = compute_metrics(ReplayData{log.header(), log.records()});
  result.events_text = log.to_string();
  return result;
}

}  // namespace aeronet
