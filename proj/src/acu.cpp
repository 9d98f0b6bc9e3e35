#include "aeronet/acu.hpp"

namespace aeronet {

Acu::Acu(Scheduler& sched, EventLog& log, int node_id)
    : sched_(sched), log_(log), node_id_(node_id) {}

void Acu::attach_link(LinkManager& links, LinkId link, int side) {
  links_ = &links;
  link_ = link;
  link_side_ = side;
  links.set_receiver(link, side, node_id_,
                     [this](std::span<const std::uint8_t> bytes) { on_bytes(bytes); });
}

void Acu::start() {
  sched_.schedule_every(1000, node_id_, [this] { heartbeat_tick(); });
  sched_.schedule_every(kTickMs, node_id_, [this] { check_heartbeat_timeouts(); });
}

void Acu::on_bytes(std::span<const std::uint8_t> bytes) {
  for (const auto& frame : parser_.feed(bytes)) on_frame(frame);
}

void Acu::on_frame(const mav::MavFrame& frame) {
  auto msg = mav::decode_payload(frame);
  if (!msg) {
    log_.record(sched_.now_ms(), node_id_, Category::kError,
                {Attr::str("ev", "unknown_message"), Attr::num("msgid", frame.message_id)});
    return;
  }
  log_.record(sched_.now_ms(), node_id_, Category::kMavlink,
              {Attr::str("unit", "acu"), Attr::str("dir", "rx"),
               Attr::num("msgid", frame.message_id), Attr::num("mseq", frame.sequence),
               Attr::num("sysid", frame.system_id)});

  if (const auto* hb = std::get_if<mav::HeartbeatMsg>(&*msg)) {
    auto it = proxies_.find(frame.system_id);
    if (it == proxies_.end()) {
      VehicleProxy proxy;
      proxy.system_id = frame.system_id;
      proxy.autopilot_type = hb->autopilot_type;
      proxy.vehicle_type = hb->vehicle_type;
      proxy.last_heartbeat = sched_.now_ms();
      proxy.last_mode_flags = hb->mode_flags;
      proxy.armed = (hb->mode_flags & mav::kModeArmed) != 0;
      proxies_.emplace(frame.system_id, proxy);
      log_.record(sched_.now_ms(), node_id_, Category::kMission,
                  {Attr::str("ev", "vehicle_registered"), Attr::num("sysid", frame.system_id),
                   Attr::num("autopilot", hb->autopilot_type)});
      if (on_vehicle_registered) on_vehicle_registered(frame.system_id);
    } else {
      it->second.last_heartbeat = sched_.now_ms();
      it->second.last_mode_flags = hb->mode_flags;
      it->second.armed = (hb->mode_flags & mav::kModeArmed) != 0;
      it->second.timeout_raised = false;
    }
    return;
  }

  // Command frames arriving at the ACU are not for us; note and drop.
  log_.record(sched_.now_ms(), node_id_, Category::kError,
              {Attr::str("ev", "frame_dropped"), Attr::num("msgid", frame.message_id)});
}

const VehicleProxy* Acu::proxy(int system_id) const {
  auto it = proxies_.find(system_id);
  return it == proxies_.end() ? nullptr : &it->second;
}

void Acu::execute_command(std::uint16_t command_id, std::uint8_t autopilot_id,
                          std::uint8_t component_id, const std::array<double, 7>& p) {
  auto it = proxies_.find(autopilot_id);
  if (it == proxies_.end()) {
    throw UnknownVehicleError("no registered vehicle with system id " +
                              std::to_string(autopilot_id));
  }
  if (!links_ || !links_->connected(link_)) {
    throw LinkDownError("acu link is not connected");
  }

  const auto cmd = mav::map_execute_command(command_id, autopilot_id, component_id, p[0], p[1],
                                            p[2], p[3], p[4], p[5], p[6]);

  // The full ten-argument record precedes the frame bytes on the link.
  log_.record(sched_.now_ms(), node_id_, Category::kMavlink,
              {Attr::str("unit", "acu"), Attr::str("dir", "tx"),
               Attr::num("msgid", mav::kMsgIdCommand),
               Attr::num("mseq", tx_seq_), Attr::num("cmd", command_id),
               Attr::num("sysid", autopilot_id), Attr::num("compid", component_id),
               Attr::fixed("p1", p[0], 4), Attr::fixed("p2", p[1], 4), Attr::fixed("p3", p[2], 4),
               Attr::fixed("p4", p[3], 4), Attr::fixed("p5", p[4], 7), Attr::fixed("p6", p[5], 7),
               Attr::fixed("p7", p[6], 4)});

  const auto bytes = mav::encode_frame(cmd, tx_seq_, static_cast<std::uint8_t>(node_id_),
                                       0 /* acu component */);
  tx_seq_ = static_cast<std::uint8_t>(tx_seq_ + 1);
  links_->send_bytes(link_, link_side_, bytes);
}

void Acu::heartbeat_tick() {
  if (!heartbeat_enabled_) return;
  if (!links_ || !links_->connected(link_)) {
    ++heartbeats_skipped_;
    return;
  }
  mav::HeartbeatMsg hb;
  hb.vehicle_type = mav::kVehicleGeneric;
  hb.autopilot_type = mav::kAutopilotGeneric;
  hb.mode_flags = 0;
  const auto bytes =
      mav::encode_frame(hb, tx_seq_, static_cast<std::uint8_t>(node_id_), 0);
  log_.record(sched_.now_ms(), node_id_, Category::kMavlink,
              {Attr::str("unit", "acu"), Attr::str("dir", "tx"),
               Attr::num("msgid", mav::kMsgIdHeartbeat), Attr::num("mseq", tx_seq_),
               Attr::num("sysid", node_id_)});
  tx_seq_ = static_cast<std::uint8_t>(tx_seq_ + 1);
  ++heartbeats_sent_;
  links_->send_bytes(link_, link_side_, bytes);
}

void Acu::check_heartbeat_timeouts() {
  for (auto& [sysid, proxy] : proxies_) {
    if (proxy.timeout_raised) continue;
    if (sched_.now_ms() - proxy.last_heartbeat < timeout_ms_) continue;
    proxy.timeout_raised = true;
    log_.record(sched_.now_ms(), node_id_, Category::kError,
                {Attr::str("ev", "heartbeat_timeout"), Attr::num("sysid", sysid)});
    if (on_heartbeat_timeout) on_heartbeat_timeout(sysid);
  }
}

}  // namespace aeronet
