// Simulated flight controller: consumes command frames from its serial link,
// flies point-mass waypoint kinematics at 100 Hz, emits 1 Hz heartbeats and
// enforces the heartbeat-loss failsafe (RTL with GPS lock, land without).
#pragma once

#include <cstdint>
#include <optional>

#include "aeronet/geo.hpp"
#include "aeronet/links.hpp"
#include "aeronet/log.hpp"
#include "aeronet/mavlink.hpp"
#include "aeronet/sim.hpp"

namespace aeronet {

enum class FlightMode { kDisarmed, kArmedIdle, kTakeoff, kWaypoint, kLoiter, kLand, kRtl };

std::string_view flight_mode_name(FlightMode m);

struct VehicleState {
  GeoPoint position;
  double groundspeed = 0.0;  // m/s, last step
  double climb_rate = 0.0;   // m/s, last step
  double heading = 0.0;      // degrees clockwise from north
  FlightMode mode = FlightMode::kDisarmed;
  bool armed = false;
  bool gps_lock = true;
  GeoPoint home;
  SimMs endurance_remaining_ms = 0;
  std::optional<GeoPoint> active_target;
  std::optional<SimMs> loiter_until;
  double odometer_m = 0.0;  // per-tick displacement sum
};

struct AutopilotConfig {
  int system_id = 1;
  GeoPoint start;
  bool gps_lock = true;
  SimMs endurance_ms = 1560 * 1000;  // measured full-payload flight time
  double cruise_speed_mps = 5.0;
  double climb_rate_mps = 2.0;
  double acceptance_radius_m = 2.0;
  SimMs heartbeat_period_ms = 1000;
  SimMs failsafe_timeout_ms = 3000;
  std::uint8_t vehicle_type = mav::kVehicleQuadrotor;
  std::uint8_t autopilot_type = mav::kAutopilotApm;
};

class Autopilot {
 public:
  Autopilot(Scheduler& sched, EventLog& log, AutopilotConfig config);

  // Binds the autopilot to its side of the companion link.
  void attach_link(LinkManager& links, LinkId link, int side);
  // Schedules the 1 Hz heartbeat and the 100 Hz control tick.
  void start();

  const VehicleState& state() const { return state_; }
  const AutopilotConfig& config() const { return config_; }

  // Applies one decoded command addressed to this system.
  void handle_command(const mav::CommandMsg& cmd);
  // One 10 ms control step: endurance, failsafe, kinematics.
  void control_tick();
  void heartbeat_tick();

  std::uint64_t heartbeats_sent() const { return heartbeats_sent_; }
  std::uint64_t heartbeats_skipped() const { return heartbeats_skipped_; }
  std::uint64_t heartbeats_received() const { return heartbeats_received_; }
  std::uint64_t commands_rejected() const { return commands_rejected_; }
  std::optional<SimMs> armed_at() const { return armed_at_; }

 private:
  void on_bytes(std::span<const std::uint8_t> bytes);
  void step_kinematics(double dt);
  void check_failsafe();
  void set_mode(FlightMode mode, std::string_view reason);
  void send_heartbeat();
  std::uint8_t mode_flags() const;
  void log_error(std::string_view what, long long detail);

  Scheduler& sched_;
  EventLog& log_;
  AutopilotConfig config_;
  VehicleState state_;

  LinkManager* links_ = nullptr;
  LinkId link_ = 0;
  int link_side_ = 0;
  mav::Parser parser_;
  std::uint8_t tx_seq_ = 0;

  SimMs last_acu_heartbeat_ = 0;
  bool failsafe_latched_ = false;
  bool endurance_exhausted_ = false;
  double takeoff_target_alt_ = 0.0;
  std::optional<double> pending_loiter_s_;  // starts counting on arrival

  std::uint64_t heartbeats_sent_ = 0;
  std::uint64_t heartbeats_skipped_ = 0;
  std::uint64_t heartbeats_received_ = 0;
  std::uint64_t commands_rejected_ = 0;
  std::optional<SimMs> armed_at_;
};

}  // namespace aeronet
