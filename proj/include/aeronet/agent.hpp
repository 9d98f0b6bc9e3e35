// Mission application: the 100 Hz tracker state machine, the reference
// takeoff-loiter-land mission, waypoint tour plans with deadlines, and the
// a<->b data-ferrying shuttle.
#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string_view>
#include <utility>
#include <vector>

#include "aeronet/acu.hpp"
#include "aeronet/autopilot.hpp"
#include "aeronet/geo.hpp"
#include "aeronet/log.hpp"
#include "aeronet/network.hpp"
#include "aeronet/sim.hpp"

namespace aeronet {

enum class MissionKind { kReference, kTour, kFerry };
enum class MissionStage { kStart, kLoiter, kStop };

struct MissionTask {
  GeoPoint target;
  double deadline_s = 0.0;  // absolute sim time by which the target must be reached
  double loiter_s = 0.0;
  std::uint32_t payload_bytes = 0;
  int report_to = 0;
};

struct FerryPlanCfg {
  GeoPoint region_a;
  GeoPoint region_b;
  double radius_m = 50.0;
  double dwell_s = 10.0;
};

struct AgentConfig {
  int node_id = 1;
  MissionKind kind = MissionKind::kReference;
  SimMs track_period_ms = kTickMs;  // 10 ms = 100 Hz
  SimMs loiter_time_ms = 20000;
  double takeoff_alt_m = 10.0;
  std::vector<MissionTask> tasks;
  std::optional<FerryPlanCfg> ferry;
};

class Agent {
 public:
  Agent(Scheduler& sched, EventLog& log, AgentConfig config, Acu& acu,
        std::function<const VehicleState&()> vehicle, Network* net);

  void start();
  // Called every track period; returns immediately while disarmed.
  void mission_tracker();

  MissionStage stage() const { return stage_; }
  std::uint64_t tracker_invocations() const { return tracker_invocations_; }
  bool plan_complete() const { return plan_complete_; }
  bool plan_aborted() const { return plan_aborted_; }

 private:
  // Reference mission.
  void reference_track();
  void stage_start();
  void stage_loiter();

  // Waypoint tour.
  void tour_track();
  void tour_advance();

  // Ferry shuttle.
  void ferry_track();
  const GeoPoint& region(bool b) const;

  void log_stage(MissionStage stage);
  void log_mission(std::string_view ev, std::vector<Attr> extra = {});
  std::array<double, 7> zeros() const { return {0, 0, 0, 0, 0, 0, 0}; }

  Scheduler& sched_;
  EventLog& log_;
  AgentConfig config_;
  Acu& acu_;
  std::function<const VehicleState&()> vehicle_;
  Network* net_;

  std::uint64_t tracker_invocations_ = 0;
  MissionStage stage_ = MissionStage::kStart;
  bool stage_logged_ = false;
  bool takeoff_sent_ = false;
  SimMs loiter_timer_ = 0;

  // Tour state.
  enum class TourState { kInit, kClimb, kTransit, kHold, kDone };
  TourState tour_state_ = TourState::kInit;
  std::size_t task_index_ = 0;
  SimMs hold_until_ = 0;
  bool plan_complete_ = false;
  bool plan_aborted_ = false;

  // Ferry state.
  enum class FerryState { kInit, kClimb, kDwell, kTransit };
  FerryState ferry_state_ = FerryState::kInit;
  bool at_b_ = false;      // current/last region (false = a)
  bool heading_b_ = false; // transit destination
  SimMs dwell_until_ = 0;
  std::map<std::pair<std::uint8_t, std::uint32_t>, bool> custody_origin_b_;
};

}  // namespace aeronet
