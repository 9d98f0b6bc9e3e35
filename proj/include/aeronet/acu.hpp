// Autopilot Control Unit: registers a per-vehicle proxy on the first
// heartbeat decoded from a system id, emits its own 1 Hz heartbeat toward the
// autopilot, dispatches ten-parameter commands and raises edge-triggered
// heartbeat-timeout events.
#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>

#include "aeronet/links.hpp"
#include "aeronet/log.hpp"
#include "aeronet/mavlink.hpp"
#include "aeronet/sim.hpp"

namespace aeronet {

struct VehicleProxy {
  int system_id = 0;
  std::uint8_t autopilot_type = 0;
  std::uint8_t vehicle_type = 0;
  SimMs last_heartbeat = 0;
  std::uint8_t last_mode_flags = 0;
  bool armed = false;
  bool timeout_raised = false;
};

class Acu {
 public:
  Acu(Scheduler& sched, EventLog& log, int node_id);

  void attach_link(LinkManager& links, LinkId link, int side);
  // Schedules the 1 Hz ACU heartbeat and the timeout scan.
  void start();
  void set_heartbeat_enabled(bool enabled) { heartbeat_enabled_ = enabled; }

  // Frame intake (checksum already validated by the parser).
  void on_frame(const mav::MavFrame& frame);

  // Encodes a command and sends it over the proxy's link; logs the ten
  // arguments before any frame byte enters the link. Throws
  // UnknownVehicleError before registration and LinkDownError when the link
  // is down; UnsupportedCommandError propagates from the command map.
  void execute_command(std::uint16_t command_id, std::uint8_t autopilot_id,
                       std::uint8_t component_id, const std::array<double, 7>& params);

  bool has_proxy(int system_id) const { return proxies_.count(system_id) > 0; }
  const VehicleProxy* proxy(int system_id) const;
  std::size_t proxy_count() const { return proxies_.size(); }

  // Edge triggered: at most one callback per continuous silence interval.
  std::function<void(int system_id)> on_heartbeat_timeout;
  std::function<void(int system_id)> on_vehicle_registered;

  std::uint64_t heartbeats_sent() const { return heartbeats_sent_; }
  std::uint64_t heartbeats_skipped() const { return heartbeats_skipped_; }

  SimMs timeout_ms() const { return timeout_ms_; }

 private:
  void heartbeat_tick();
  void check_heartbeat_timeouts();
  void on_bytes(std::span<const std::uint8_t> bytes);

  Scheduler& sched_;
  EventLog& log_;
  int node_id_;
  SimMs timeout_ms_ = 3000;

  LinkManager* links_ = nullptr;
  LinkId link_ = 0;
  int link_side_ = 0;
  mav::Parser parser_;
  std::uint8_t tx_seq_ = 0;
  bool heartbeat_enabled_ = true;

  std::map<int, VehicleProxy> proxies_;
  std::uint64_t heartbeats_sent_ = 0;
  std::uint64_t heartbeats_skipped_ = 0;
};

}  // namespace aeronet
