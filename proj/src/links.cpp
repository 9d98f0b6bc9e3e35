#include "aeronet/links.hpp"

#include <algorithm>
#include <memory>
#include <string>
#include <vector>

namespace aeronet {

LinkManager::Link& LinkManager::get(LinkId id) {
  auto it = links_.find(id);
  if (it == links_.end()) throw SimError("unknown link id " + std::to_string(id));
  return it->second;
}

const LinkManager::Link& LinkManager::get(LinkId id) const {
  auto it = links_.find(id);
  if (it == links_.end()) throw SimError("unknown link id " + std::to_string(id));
  return it->second;
}

LinkId LinkManager::open_link(const LinkConfig& config) {
  if (config.kind != LinkKind::kSerial && config.kind != LinkKind::kInproc) {
    throw UnsupportedLinkError("link kind not implemented");
  }
  if (config.kind == LinkKind::kSerial && config.baud_rate <= 0) {
    throw SimError("serial link requires baud_rate > 0");
  }
  if (!config.port_name.empty()) {
    for (const auto& [id, link] : links_) {
      if (link.config.port_name == config.port_name) {
        throw AlreadyOpenError("port already open: " + config.port_name);
      }
    }
  }
  const LinkId id = next_id_++;
  Link link;
  link.config = config;
  links_.emplace(id, std::move(link));
  return id;
}

void LinkManager::connect_link(LinkId id) { get(id).connected = true; }

void LinkManager::disconnect_link(LinkId id) { get(id).connected = false; }

bool LinkManager::connected(LinkId id) const { return get(id).connected; }

void LinkManager::set_receiver(LinkId id, int side, int owner_node,
                               std::function<void(std::span<const std::uint8_t>)> fn) {
  Link& link = get(id);
  link.receiver[static_cast<std::size_t>(side)] = std::move(fn);
  link.owner[static_cast<std::size_t>(side)] = owner_node;
}

SimMs LinkManager::send_bytes(LinkId id, int from_side, std::span<const std::uint8_t> data) {
  Link& link = get(id);
  if (!link.connected) {
    throw LinkDownError("link " + std::to_string(id) + " is not connected");
  }

  SimMs delay_ms = 0;
  if (link.config.kind == LinkKind::kSerial) {
    // 8N1: 10 bits per byte, rounded up to whole milliseconds.
    const std::int64_t bits = static_cast<std::int64_t>(data.size()) * 10;
    const std::int64_t baud = link.config.baud_rate;
    delay_ms = (bits * 1000 + baud - 1) / baud;
  }

  const int to_side = 1 - from_side;
  auto& busy = link.busy_until[static_cast<std::size_t>(from_side)];
  const SimMs start = std::max(sched_.now_ms(), busy);
  const SimMs done = start + delay_ms;
  busy = done;

  auto payload = std::make_shared<std::vector<std::uint8_t>>(data.begin(), data.end());
  const LinkId link_id = id;
  sched_.schedule_at_ms(done, link.owner[static_cast<std::size_t>(to_side)],
                        [this, link_id, to_side, payload]() {
                          auto it = links_.find(link_id);
                          if (it == links_.end()) return;
                          auto& fn = it->second.receiver[static_cast<std::size_t>(to_side)];
                          if (fn) fn(std::span<const std::uint8_t>(payload->data(), payload->size()));
                        });
  return done;
}

}  // namespace aeronet
