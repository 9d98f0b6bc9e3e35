#include "aeronet/autopilot.hpp"

#include <algorithm>
#include <cmath>

namespace aeronet {

namespace {
constexpr double kRadToDeg = 180.0 / 3.14159265358979323846;
}

std::string_view flight_mode_name(FlightMode m) {
  switch (m) {
    case FlightMode::kDisarmed: return "disarmed";
    case FlightMode::kArmedIdle: return "armed_idle";
    case FlightMode::kTakeoff: return "takeoff";
    case FlightMode::kWaypoint: return "waypoint";
    case FlightMode::kLoiter: return "loiter";
    case FlightMode::kLand: return "land";
    case FlightMode::kRtl: return "rtl";
  }
  return "disarmed";
}

Autopilot::Autopilot(Scheduler& sched, EventLog& log, AutopilotConfig config)
    : sched_(sched), log_(log), config_(config) {
  state_.position = config_.start;
  state_.home = config_.start;
  state_.gps_lock = config_.gps_lock;
  state_.endurance_remaining_ms = config_.endurance_ms;
}

void Autopilot::attach_link(LinkManager& links, LinkId link, int side) {
  links_ = &links;
  link_ = link;
  link_side_ = side;
  links.set_receiver(link, side, config_.system_id,
                     [this](std::span<const std::uint8_t> bytes) { on_bytes(bytes); });
}

void Autopilot::start() {
  sched_.schedule_every(config_.heartbeat_period_ms, config_.system_id,
                        [this] { heartbeat_tick(); });
  sched_.schedule_every(kTickMs, config_.system_id, [this] { control_tick(); });
}

void Autopilot::on_bytes(std::span<const std::uint8_t> bytes) {
  for (const auto& frame : parser_.feed(bytes)) {
    auto msg = mav::decode_payload(frame);
    if (!msg) {
      log_error("undecodable_frame", frame.message_id);
      continue;
    }
    log_.record(sched_.now_ms(), config_.system_id, Category::kMavlink,
                {Attr::str("unit", "ap"), Attr::str("dir", "rx"),
                 Attr::num("msgid", frame.message_id), Attr::num("mseq", frame.sequence),
                 Attr::num("sysid", frame.system_id)});
    if (std::holds_alternative<mav::HeartbeatMsg>(*msg)) {
      ++heartbeats_received_;
      last_acu_heartbeat_ = sched_.now_ms();
      failsafe_latched_ = false;
      continue;
    }
    const auto& cmd = std::get<mav::CommandMsg>(*msg);
    if (cmd.target_system != config_.system_id) {
      log_error("command_not_for_us", cmd.target_system);
      continue;
    }
    handle_command(cmd);
  }
}

void Autopilot::handle_command(const mav::CommandMsg& cmd) {
  using namespace mav;
  const bool is_nav = cmd.command_id == kCmdNavWaypoint || cmd.command_id == kCmdNavLoiterTime ||
                      cmd.command_id == kCmdNavReturnToLaunch || cmd.command_id == kCmdNavLand ||
                      cmd.command_id == kCmdNavTakeoff;
  if (is_nav && !state_.armed) {
    ++commands_rejected_;
    log_error("nav_command_while_disarmed", cmd.command_id);
    return;
  }

  switch (cmd.command_id) {
    case kCmdNavTakeoff: {
      takeoff_target_alt_ = cmd.params[6];
      GeoPoint target = state_.position;
      target.altitude = takeoff_target_alt_;
      state_.active_target = target;
      state_.loiter_until.reset();
      set_mode(FlightMode::kTakeoff, "takeoff_command");
      break;
    }
    case kCmdNavWaypoint: {
      state_.active_target = GeoPoint{cmd.params[4], cmd.params[5], cmd.params[6]};
      state_.loiter_until.reset();
      set_mode(FlightMode::kWaypoint, "waypoint_command");
      break;
    }
    case kCmdNavLoiterTime: {
      const GeoPoint target{cmd.params[4], cmd.params[5], cmd.params[6]};
      state_.active_target = target;
      pending_loiter_s_ = cmd.params[0];
      if (distance_m(state_.position, target) <= config_.acceptance_radius_m) {
        state_.loiter_until =
            sched_.now_ms() + static_cast<SimMs>(std::llround(cmd.params[0] * 1000.0));
        pending_loiter_s_.reset();
      } else {
        state_.loiter_until.reset();
      }
      set_mode(FlightMode::kLoiter, "loiter_command");
      break;
    }
    case kCmdNavReturnToLaunch: {
      if (!state_.gps_lock) {
        ++commands_rejected_;
        log_error("rtl_without_gps_lock", cmd.command_id);
        return;
      }
      GeoPoint target = state_.home;
      target.altitude = state_.position.altitude;  // fly home at current altitude
      state_.active_target = target;
      state_.loiter_until.reset();
      set_mode(FlightMode::kRtl, "rtl_command");
      break;
    }
    case kCmdNavLand: {
      GeoPoint target = state_.position;
      target.altitude = 0.0;
      state_.active_target = target;
      state_.loiter_until.reset();
      set_mode(FlightMode::kLand, "land_command");
      break;
    }
    case kCmdDoSetMode: {
      const auto flags = static_cast<std::uint8_t>(cmd.params[0]);
      const bool want_armed = (flags & kModeArmed) != 0;
      if (want_armed && !state_.armed) {
        state_.armed = true;
        state_.home = state_.position;
        armed_at_ = sched_.now_ms();
        set_mode(FlightMode::kArmedIdle, "armed");
      } else if (!want_armed && state_.armed) {
        if (state_.position.altitude > 0.0) {
          ++commands_rejected_;
          log_error("disarm_refused_airborne", flags);
        } else {
          state_.armed = false;
          set_mode(FlightMode::kDisarmed, "disarmed_by_command");
        }
      }
      break;
    }
    case kCmdDoSetServo: {
      // Accepted by the command set but has no effect on this airframe.
      log_.record(sched_.now_ms(), config_.system_id, Category::kError,
                  {Attr::str("ev", "unsupported_action"), Attr::num("cmd", cmd.command_id)});
      break;
    }
    default: {
      log_error("unknown_command", cmd.command_id);
      break;
    }
  }
}

void Autopilot::control_tick() {
  if (!state_.armed) return;

  // Endurance budget: decremented while armed, forces landing at zero.
  state_.endurance_remaining_ms = std::max<SimMs>(0, state_.endurance_remaining_ms - kTickMs);
  if (state_.endurance_remaining_ms == 0 && !endurance_exhausted_) {
    endurance_exhausted_ = true;
    GeoPoint target = state_.position;
    target.altitude = 0.0;
    state_.active_target = target;
    state_.loiter_until.reset();
    log_.record(sched_.now_ms(), config_.system_id, Category::kMode,
                {Attr::str("ev", "endurance_exhausted")});
    set_mode(FlightMode::kLand, "endurance");
  }

  check_failsafe();
  step_kinematics(static_cast<double>(kTickMs) / 1000.0);
}

void Autopilot::check_failsafe() {
  if (failsafe_latched_ || !state_.armed) return;
  if (sched_.now_ms() - last_acu_heartbeat_ < config_.failsafe_timeout_ms) return;
  failsafe_latched_ = true;
  if (state_.gps_lock) {
    GeoPoint target = state_.home;
    target.altitude = state_.position.altitude;
    state_.active_target = target;
    state_.loiter_until.reset();
    set_mode(FlightMode::kRtl, "failsafe_heartbeat_loss");
  } else {
    GeoPoint target = state_.position;
    target.altitude = 0.0;
    state_.active_target = target;
    state_.loiter_until.reset();
    set_mode(FlightMode::kLand, "failsafe_heartbeat_loss");
  }
}

void Autopilot::step_kinematics(double dt) {
  double moved_h = 0.0;
  double moved_v = 0.0;

  switch (state_.mode) {
    case FlightMode::kDisarmed:
    case FlightMode::kArmedIdle:
      break;

    case FlightMode::kTakeoff: {
      const double remaining = takeoff_target_alt_ - state_.position.altitude;
      const double step = std::min(config_.climb_rate_mps * dt, std::max(0.0, remaining));
      state_.position.altitude += step;
      moved_v = step;
      if (state_.position.altitude >= takeoff_target_alt_) {
        // Hold position at the takeoff point.
        state_.active_target = state_.position;
        set_mode(FlightMode::kLoiter, "takeoff_complete");
      }
      break;
    }

    case FlightMode::kWaypoint:
    case FlightMode::kLoiter:
    case FlightMode::kRtl: {
      if (!state_.active_target) break;
      const GeoPoint target = *state_.active_target;
      const EnuVec off = enu_offset(state_.position, target);
      const double horiz = enu_horizontal(off);
      const double h_step = std::min(config_.cruise_speed_mps * dt, horiz);
      if (horiz > 1e-9) {
        if (h_step >= horiz) {
          state_.position.latitude = target.latitude;
          state_.position.longitude = target.longitude;
        } else {
          const double scale = h_step / horiz;
          state_.position = enu_apply(state_.position,
                                      EnuVec{off.east * scale, off.north * scale, 0.0});
        }
        state_.heading = std::atan2(off.east, off.north) * kRadToDeg;
        if (state_.heading < 0) state_.heading += 360.0;
        moved_h = h_step;
      }
      const double vert = off.up;
      const double v_step = std::min(config_.climb_rate_mps * dt, std::abs(vert));
      if (std::abs(vert) > 1e-12) {
        state_.position.altitude += vert > 0 ? v_step : -v_step;
        moved_v = v_step;
      }

      // Arrival bookkeeping.
      if (state_.mode == FlightMode::kLoiter && pending_loiter_s_ &&
          distance_m(state_.position, target) <= config_.acceptance_radius_m) {
        state_.loiter_until =
            sched_.now_ms() + static_cast<SimMs>(std::llround(*pending_loiter_s_ * 1000.0));
        pending_loiter_s_.reset();
      }
      if (state_.mode == FlightMode::kRtl && h_step >= horiz) {
        // Home reached this step: descend in place.
        state_.position.latitude = target.latitude;
        state_.position.longitude = target.longitude;
        GeoPoint down = state_.position;
        down.altitude = 0.0;
        state_.active_target = down;
        set_mode(FlightMode::kLand, "rtl_home_reached");
      }
      break;
    }

    case FlightMode::kLand: {
      const double step = std::min(config_.climb_rate_mps * dt, state_.position.altitude);
      state_.position.altitude -= step;
      moved_v = step;
      if (state_.position.altitude <= 0.0) {
        state_.position.altitude = 0.0;
        state_.armed = false;
        state_.active_target.reset();
        set_mode(FlightMode::kDisarmed, "landed");
      }
      break;
    }
  }

  state_.groundspeed = moved_h / dt;
  state_.climb_rate = moved_v / dt;
  state_.odometer_m += std::hypot(moved_h, moved_v);
}

void Autopilot::set_mode(FlightMode mode, std::string_view reason) {
  if (state_.mode == mode) return;
  state_.mode = mode;
  log_.record(sched_.now_ms(), config_.system_id, Category::kMode,
              {Attr::str("ev", "mode"), Attr::str("mode", flight_mode_name(mode)),
               Attr::str("reason", reason), Attr::boolean("armed", state_.armed)});
}

std::uint8_t Autopilot::mode_flags() const {
  std::uint8_t flags = 0;
  if (state_.armed) flags |= mav::kModeArmed;
  if (state_.mode != FlightMode::kDisarmed && state_.mode != FlightMode::kArmedIdle) {
    flags |= mav::kModeAutonomous;
  }
  return flags;
}

void Autopilot::heartbeat_tick() {
  if (!links_ || !links_->connected(link_)) {
    ++heartbeats_skipped_;
    return;
  }
  send_heartbeat();
}

void Autopilot::send_heartbeat() {
  mav::HeartbeatMsg hb;
  hb.vehicle_type = config_.vehicle_type;
  hb.autopilot_type = config_.autopilot_type;
  hb.mode_flags = mode_flags();
  const auto bytes = mav::encode_frame(hb, tx_seq_, static_cast<std::uint8_t>(config_.system_id),
                                       1 /* autopilot component */);
  log_.record(sched_.now_ms(), config_.system_id, Category::kMavlink,
              {Attr::str("unit", "ap"), Attr::str("dir", "tx"),
               Attr::num("msgid", mav::kMsgIdHeartbeat), Attr::num("mseq", tx_seq_),
               Attr::num("sysid", config_.system_id)});
  tx_seq_ = static_cast<std::uint8_t>(tx_seq_ + 1);
  ++heartbeats_sent_;
  links_->send_bytes(link_, link_side_, bytes);
}

void Autopilot::log_error(std::string_view what, long long detail) {
  log_.record(sched_.now_ms(), config_.system_id, Category::kError,
              {Attr::str("ev", what), Attr::num("detail", detail)});
}

}  // namespace aeronet
