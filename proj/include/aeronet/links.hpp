// Media links between the companion computer and the autopilot: a throttled
// serial model (8N1, so 10 bits per byte) and an in-process loopback.
#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>

#include "aeronet/sim.hpp"

namespace aeronet {

enum class LinkKind { kSerial, kInproc, kTcp, kUdp, kTelemetry };

struct LinkConfig {
  LinkKind kind = LinkKind::kSerial;
  std::string port_name;
  int baud_rate = 115200;
};

using LinkId = int;

// Two-endpoint byte pipes. Bytes arrive at the peer in transmission order,
// never duplicated; each direction is throttled independently on serial
// links. Only serial and inproc are implemented; the remaining kinds are
// declared as extension points but rejected at open time.
class LinkManager {
 public:
  explicit LinkManager(Scheduler& sched) : sched_(sched) {}

  // Opens a link in the disconnected state. Throws AlreadyOpenError for a
  // duplicate port name and UnsupportedLinkError for unimplemented kinds.
  LinkId open_link(const LinkConfig& config);
  void connect_link(LinkId id);
  void disconnect_link(LinkId id);
  bool connected(LinkId id) const;

  // side is 0 or 1; owner_node orders delivery tasks.
  void set_receiver(LinkId id, int side, int owner_node,
                    std::function<void(std::span<const std::uint8_t>)> fn);

  // Returns the simulated time at which the last byte arrives. Throws
  // LinkDownError when the link is not connected.
  SimMs send_bytes(LinkId id, int from_side, std::span<const std::uint8_t> data);

 private:
  struct Link {
    LinkConfig config;
    bool connected = false;
    std::array<std::function<void(std::span<const std::uint8_t>)>, 2> receiver;
    std::array<int, 2> owner{kWorldNode, kWorldNode};
    std::array<SimMs, 2> busy_until{0, 0};  // per direction (indexed by sender side)
  };

  Link& get(LinkId id);
  const Link& get(LinkId id) const;

  Scheduler& sched_;
  std::map<LinkId, Link> links_;
  LinkId next_id_ = 1;
};

}  // namespace aeronet
