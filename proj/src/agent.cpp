#include "aeronet/agent.hpp"

#include <cmath>

namespace aeronet {

namespace {
constexpr std::uint32_t kStatusPayloadBytes = 32;
constexpr std::uint32_t kStatusDeadlineMs = 10000;
constexpr std::uint32_t kReportDeadlineMs = 60000;
}  // namespace

Agent::Agent(Scheduler& sched, EventLog& log, AgentConfig config, Acu& acu,
             std::function<const VehicleState&()> vehicle, Network* net)
    : sched_(sched), log_(log), config_(std::move(config)), acu_(acu),
      vehicle_(std::move(vehicle)), net_(net) {
  if (net_ && config_.kind == MissionKind::kFerry) {
    net_->on_custody_take = [this](const Packet& p) {
      // Remember which end of the shuttle the packet was picked up at; it is
      // released at the opposite end.
      const auto& pos = vehicle_().position;
      const bool near_b = config_.ferry &&
                          distance_m(pos, config_.ferry->region_b) <
                              distance_m(pos, config_.ferry->region_a);
      custody_origin_b_[{p.source, p.packet_id}] = near_b;
    };
  }
}

void Agent::start() {
  sched_.schedule_every(config_.track_period_ms, config_.node_id, [this] { mission_tracker(); });
}

void Agent::mission_tracker() {
  ++tracker_invocations_;
  if (!vehicle_().armed) return;

  switch (config_.kind) {
    case MissionKind::kReference: reference_track(); break;
    case MissionKind::kTour: tour_track(); break;
    case MissionKind::kFerry: ferry_track(); break;
  }
}

void Agent::log_stage(MissionStage stage) {
  const char* name = stage == MissionStage::kStart ? "start"
                     : stage == MissionStage::kLoiter ? "loiter"
                                                      : "stop";
  log_.record(sched_.now_ms(), config_.node_id, Category::kMission,
              {Attr::str("ev", "stage"), Attr::str("stage", name)});
}

void Agent::log_mission(std::string_view ev, std::vector<Attr> extra) {
  std::vector<Attr> attrs = {Attr::str("ev", ev)};
  for (auto& a : extra) attrs.push_back(std::move(a));
  log_.record(sched_.now_ms(), config_.node_id, Category::kMission, std::move(attrs));
}

void Agent::reference_track() {
  switch (stage_) {
    case MissionStage::kStart: stage_start(); break;
    case MissionStage::kLoiter: stage_loiter(); break;
    case MissionStage::kStop: break;
  }
}

void Agent::stage_start() {
  if (!takeoff_sent_) {
    log_stage(MissionStage::kStart);
    acu_.execute_command(mav::kCmdNavTakeoff, static_cast<std::uint8_t>(config_.node_id), 0,
                         {0, 0, 0, 0, 0, 0, config_.takeoff_alt_m});
    takeoff_sent_ = true;
    return;
  }
  // The takeoff completes into a hold; that is our cue to start the timer.
  if (vehicle_().mode == FlightMode::kLoiter) {
    stage_ = MissionStage::kLoiter;
    loiter_timer_ = sched_.now_ms();
    log_stage(MissionStage::kLoiter);
  }
}

void Agent::stage_loiter() {
  if (sched_.now_ms() - loiter_timer_ <= config_.loiter_time_ms) return;
  acu_.execute_command(mav::kCmdNavLand, static_cast<std::uint8_t>(config_.node_id), 0, zeros());
  if (net_) {
    std::vector<std::uint8_t> status(kStatusPayloadBytes,
                                     static_cast<std::uint8_t>(config_.node_id));
    net_->send_data(static_cast<std::uint8_t>(kBroadcastNodeId), kPriorityData,
                    kStatusDeadlineMs, status);
  }
  stage_ = MissionStage::kStop;
  log_stage(MissionStage::kStop);
}

void Agent::tour_track() {
  if (plan_aborted_ || tour_state_ == TourState::kDone) return;

  // Endurance exhaustion aborts the remainder of the plan.
  if (vehicle_().endurance_remaining_ms == 0 && !plan_complete_) {
    plan_aborted_ = true;
    log_mission("plan_abort", {Attr::str("reason", "endurance")});
    tour_state_ = TourState::kDone;
    return;
  }

  const VehicleState& v = vehicle_();
  switch (tour_state_) {
    case TourState::kInit: {
      if (config_.tasks.empty()) {
        plan_complete_ = true;
        log_mission("plan_complete", {Attr::num("tasks", 0)});
        tour_state_ = TourState::kDone;
        return;
      }
      acu_.execute_command(mav::kCmdNavTakeoff, static_cast<std::uint8_t>(config_.node_id), 0,
                           {0, 0, 0, 0, 0, 0, config_.takeoff_alt_m});
      tour_state_ = TourState::kClimb;
      break;
    }
    case TourState::kClimb: {
      if (v.mode != FlightMode::kLoiter) return;  // still climbing
      task_index_ = 0;
      const auto& task = config_.tasks[task_index_];
      acu_.execute_command(mav::kCmdNavWaypoint, static_cast<std::uint8_t>(config_.node_id), 0,
                           {0, 0, 0, 0, task.target.latitude, task.target.longitude,
                            task.target.altitude});
      tour_state_ = TourState::kTransit;
      break;
    }
    case TourState::kTransit: {
      const auto& task = config_.tasks[task_index_];
      // Compare against the float-quantized target the autopilot flies to.
      const GeoPoint flown{static_cast<float>(task.target.latitude),
                           static_cast<float>(task.target.longitude),
                           static_cast<float>(task.target.altitude)};
      if (distance_m(v.position, flown) > 2.0) return;
      const bool met = sched_.now_ms() <= static_cast<SimMs>(std::llround(task.deadline_s * 1000));
      log_mission("task_complete",
                  {Attr::num("idx", static_cast<long long>(task_index_)),
                   Attr::fixed("deadline_s", task.deadline_s, 3), Attr::boolean("met", met)});
      if (net_ && task.payload_bytes > 0) {
        std::vector<std::uint8_t> payload(task.payload_bytes,
                                          static_cast<std::uint8_t>(task_index_ + 1));
        net_->send_data(static_cast<std::uint8_t>(task.report_to), kPriorityData,
                        kReportDeadlineMs, payload);
      }
      if (task.loiter_s > 0.0) {
        acu_.execute_command(mav::kCmdNavLoiterTime, static_cast<std::uint8_t>(config_.node_id),
                             0,
                             {task.loiter_s, 0, 5, 0, task.target.latitude,
                              task.target.longitude, task.target.altitude});
        hold_until_ = sched_.now_ms() + static_cast<SimMs>(std::llround(task.loiter_s * 1000));
        tour_state_ = TourState::kHold;
      } else {
        tour_advance();
      }
      break;
    }
    case TourState::kHold: {
      if (sched_.now_ms() < hold_until_) return;
      tour_advance();
      break;
    }
    case TourState::kDone:
      break;
  }
}

void Agent::tour_advance() {
  ++task_index_;
  if (task_index_ >= config_.tasks.size()) {
    plan_complete_ = true;
    log_mission("plan_complete", {Attr::num("tasks", static_cast<long long>(config_.tasks.size()))});
    acu_.execute_command(mav::kCmdNavLand, static_cast<std::uint8_t>(config_.node_id), 0, zeros());
    tour_state_ = TourState::kDone;
    return;
  }
  const auto& task = config_.tasks[task_index_];
  acu_.execute_command(mav::kCmdNavWaypoint, static_cast<std::uint8_t>(config_.node_id), 0,
                       {0, 0, 0, 0, task.target.latitude, task.target.longitude,
                        task.target.altitude});
  tour_state_ = TourState::kTransit;
}

const GeoPoint& Agent::region(bool b) const {
  return b ? config_.ferry->region_b : config_.ferry->region_a;
}

void Agent::ferry_track() {
  if (!config_.ferry || !net_) return;
  const VehicleState& v = vehicle_();

  // Custody is active only near either shuttle endpoint.
  const bool in_a = distance_m(v.position, region(false)) <= config_.ferry->radius_m;
  const bool in_b = distance_m(v.position, region(true)) <= config_.ferry->radius_m;
  net_->set_custody_enabled(in_a || in_b);

  switch (ferry_state_) {
    case FerryState::kInit: {
      acu_.execute_command(mav::kCmdNavTakeoff, static_cast<std::uint8_t>(config_.node_id), 0,
                           {0, 0, 0, 0, 0, 0, region(false).altitude});
      ferry_state_ = FerryState::kClimb;
      break;
    }
    case FerryState::kClimb: {
      if (v.mode != FlightMode::kLoiter) return;
      at_b_ = false;
      dwell_until_ = sched_.now_ms() +
                     static_cast<SimMs>(std::llround(config_.ferry->dwell_s * 1000));
      ferry_state_ = FerryState::kDwell;
      log_mission("ferry_arrive", {Attr::str("region", "a")});
      break;
    }
    case FerryState::kDwell: {
      if (sched_.now_ms() < dwell_until_) return;
      heading_b_ = !at_b_;
      const GeoPoint& target = region(heading_b_);
      acu_.execute_command(mav::kCmdNavWaypoint, static_cast<std::uint8_t>(config_.node_id), 0,
                           {0, 0, 0, 0, target.latitude, target.longitude, target.altitude});
      ferry_state_ = FerryState::kTransit;
      break;
    }
    case FerryState::kTransit: {
      if (distance_m(v.position, region(heading_b_)) > config_.ferry->radius_m) return;
      at_b_ = heading_b_;
      log_mission("ferry_arrive", {Attr::str("region", at_b_ ? "b" : "a")});
      // Release everything picked up at the opposite end.
      const bool here_b = at_b_;
      net_->release_custody([this, here_b](const Packet& p) {
        auto it = custody_origin_b_.find({p.source, p.packet_id});
        const bool origin_b = it != custody_origin_b_.end() && it->second;
        return origin_b != here_b;
      });
      dwell_until_ = sched_.now_ms() +
                     static_cast<SimMs>(std::llround(config_.ferry->dwell_s * 1000));
      ferry_state_ = FerryState::kDwell;
      break;
    }
  }
}

}  // namespace aeronet
