#include "aeronet/network.hpp"

#include <algorithm>

namespace aeronet {

namespace {

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xFF));
}

std::uint32_t get_u32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

}  // namespace

std::vector<std::uint8_t> encode_pdu(const Packet& packet) {
  std::vector<std::uint8_t> out;
  out.reserve(kPduHeaderSize + packet.payload.size());
  put_u32(out, packet.packet_id);
  put_u32(out, static_cast<std::uint32_t>(packet.origin_ms));
  put_u32(out, packet.deadline_ms);
  out.push_back(static_cast<std::uint8_t>(packet.size & 0xFF));
  out.push_back(static_cast<std::uint8_t>(packet.size >> 8));
  out.push_back(packet.source);
  out.push_back(packet.destination);
  out.push_back(packet.sender);
  out.push_back(packet.receiver);
  out.push_back(packet.priority);
  out.push_back(packet.ttl);
  out.insert(out.end(), packet.payload.begin(), packet.payload.end());
  return out;
}

std::optional<Packet> decode_pdu(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kPduHeaderSize) return std::nullopt;
  Packet p;
  p.packet_id = get_u32(bytes.data());
  p.origin_ms = get_u32(bytes.data() + 4);
  p.deadline_ms = get_u32(bytes.data() + 8);
  p.size = static_cast<std::uint16_t>(bytes[12] | (static_cast<std::uint16_t>(bytes[13]) << 8));
  p.source = bytes[14];
  p.destination = bytes[15];
  p.sender = bytes[16];
  p.receiver = bytes[17];
  p.priority = bytes[18];
  p.ttl = bytes[19];
  if (p.size != bytes.size()) return std::nullopt;
  p.payload.assign(bytes.begin() + kPduHeaderSize, bytes.end());
  return p;
}

Network::Network(Scheduler& sched, EventLog& log, int node_id)
    : sched_(sched), log_(log), node_id_(node_id) {}

void Network::log_packet(std::string_view ev, const Packet& p, bool expired_flag,
                         bool with_expired) {
  std::vector<Attr> attrs = {Attr::str("ev", ev),
                             Attr::num("pid", p.packet_id),
                             Attr::num("src", p.source),
                             Attr::num("dst", p.destination),
                             Attr::num("snd", p.sender),
                             Attr::num("rcv", p.receiver),
                             Attr::num("prio", p.priority),
                             Attr::num("size", p.size),
                             Attr::num("ttl", p.ttl),
                             Attr::num("deadline_ms", p.deadline_ms)};
  if (with_expired) attrs.push_back(Attr::boolean("expired", expired_flag));
  log_.record(sched_.now_ms(), node_id_, Category::kPacket, std::move(attrs));
}

std::uint32_t Network::send_data(std::uint8_t destination, std::uint8_t priority,
                                 std::uint32_t deadline_ms,
                                 std::span<const std::uint8_t> payload, std::uint8_t ttl) {
  if (payload.size() > kMtuBytes) {
    throw MtuExceededError("payload of " + std::to_string(payload.size()) +
                           " bytes exceeds the " + std::to_string(kMtuBytes) + " byte MTU");
  }
  Packet p;
  p.packet_id = next_packet_id_++;
  p.origin_ms = sched_.now_ms();
  p.deadline_ms = deadline_ms;
  p.size = static_cast<std::uint16_t>(kPduHeaderSize + payload.size());
  p.source = static_cast<std::uint8_t>(node_id_);
  p.destination = destination;
  p.sender = static_cast<std::uint8_t>(node_id_);
  p.receiver = static_cast<std::uint8_t>(kBroadcastNodeId);
  p.priority = priority;
  p.ttl = ttl;
  p.payload.assign(payload.begin(), payload.end());

  // Own traffic is permanently "seen": a flooded echo must never be relayed
  // back or delivered to ourselves.
  seen_.insert({p.source, p.packet_id});
  ++offered_;
  log_packet("send", p);
  const std::uint32_t id = p.packet_id;
  enqueue(std::move(p));
  return id;
}

void Network::enqueue(Packet packet) {
  auto& queue = packet.priority == kPriorityControl ? control_queue_ : data_queue_;
  queue.push_back(std::move(packet));
  if (on_tx_ready) on_tx_ready();
}

bool Network::has_pdu() const { return !control_queue_.empty() || !data_queue_.empty(); }

std::optional<std::vector<std::uint8_t>> Network::next_pdu() {
  auto& queue = !control_queue_.empty() ? control_queue_ : data_queue_;
  if (queue.empty()) return std::nullopt;
  Packet p = std::move(queue.front());
  queue.pop_front();
  return encode_pdu(p);
}

std::vector<std::uint8_t> Network::get_data() {
  if (rx_fifo_.empty()) return {};
  std::vector<std::uint8_t> data = std::move(rx_fifo_.front());
  rx_fifo_.pop_front();
  return data;
}

void Network::on_pdu_from_mac(std::span<const std::uint8_t> bytes) {
  auto decoded = decode_pdu(bytes);
  if (!decoded) {
    log_.record(sched_.now_ms(), node_id_, Category::kError,
                {Attr::str("ev", "unparseable_pdu"),
                 Attr::num("bytes", static_cast<long long>(bytes.size()))});
    return;
  }
  Packet p = std::move(*decoded);
  p.receiver = static_cast<std::uint8_t>(node_id_);
  const auto key = std::make_pair(p.source, p.packet_id);

  const bool for_us =
      p.destination == node_id_ || p.destination == kBroadcastNodeId;
  if (seen_.count(key)) {
    ++duplicate_drops_;
    log_packet("drop_dup", p);
    return;
  }
  seen_.insert(key);

  if (for_us) {
    const bool expired = sched_.now_ms() - p.origin_ms > static_cast<SimMs>(p.deadline_ms);
    ++delivered_;
    rx_fifo_.push_back(p.payload);
    log_packet("deliver", p, expired, true);
    if (on_delivered) on_delivered(p);
    // Broadcast floods onward; unicast terminates at its destination.
    if (p.destination == kBroadcastNodeId && p.ttl > 1 && !custody_enabled_) {
      Packet relay = p;
      relay.ttl = static_cast<std::uint8_t>(relay.ttl - 1);
      relay.sender = static_cast<std::uint8_t>(node_id_);
      relay.receiver = static_cast<std::uint8_t>(kBroadcastNodeId);
      log_packet("relay", relay);
      enqueue(std::move(relay));
    }
    return;
  }

  if (custody_enabled_ && p.destination != kBroadcastNodeId) {
    ++custody_taken_;
    log_packet("custody_take", p);
    custody_.push_back(p);
    if (on_custody_take) on_custody_take(custody_.back());
    return;
  }

  if (p.ttl <= 1) {
    ++ttl_drops_;
    log_packet("drop_ttl", p);
    return;
  }

  Packet relay = std::move(p);
  relay.ttl = static_cast<std::uint8_t>(relay.ttl - 1);
  relay.sender = static_cast<std::uint8_t>(node_id_);
  relay.receiver = static_cast<std::uint8_t>(kBroadcastNodeId);
  log_packet("relay", relay);
  enqueue(std::move(relay));
}

std::size_t Network::release_custody(const std::function<bool(const Packet&)>& predicate) {
  std::size_t released = 0;
  for (auto it = custody_.begin(); it != custody_.end();) {
    if (!predicate(*it)) {
      ++it;
      continue;
    }
    Packet p = std::move(*it);
    it = custody_.erase(it);
    ++custody_released_;
    ++released;
    p.sender = static_cast<std::uint8_t>(node_id_);
    p.receiver = static_cast<std::uint8_t>(kBroadcastNodeId);
    log_packet("custody_release", p);
    if (p.ttl <= 1) {
      ++ttl_drops_;
      log_packet("drop_ttl", p);
      continue;
    }
    p.ttl = static_cast<std::uint8_t>(p.ttl - 1);
    enqueue(std::move(p));
  }
  return released;
}

}  // namespace aeronet
