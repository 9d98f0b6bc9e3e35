// Network layer: application send/receive FIFOs, the datagram header, and
// duplicate-suppressed flooding as the default relay policy. A custody mode
// turns foreign traffic into store-and-forward cargo for data ferrying.
//
// PDU header (20 bytes, little-endian), documented in docs/wire-formats.md:
//   packet_id u32 | origin_ms u32 | deadline_ms u32 | size u16 |
//   source u8 | destination u8 | sender u8 | receiver u8 | priority u8 | ttl u8
#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <optional>
#include <set>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "aeronet/log.hpp"
#include "aeronet/sim.hpp"

namespace aeronet {

constexpr std::size_t kPduHeaderSize = 20;
constexpr std::size_t kMtuBytes = 1024;  // payload budget per datagram
constexpr std::uint8_t kDefaultTtl = 8;
constexpr std::uint8_t kPriorityControl = 0;
constexpr std::uint8_t kPriorityData = 1;

struct Packet {
  std::uint32_t packet_id = 0;
  SimMs origin_ms = 0;        // creation time at the source
  std::uint32_t deadline_ms = 0;  // latency budget relative to origin
  std::uint16_t size = 0;     // header + payload bytes
  std::uint8_t source = 0;
  std::uint8_t destination = 0;
  std::uint8_t sender = 0;    // per-hop; rewritten at every relay
  std::uint8_t receiver = 0;  // per-hop
  std::uint8_t priority = kPriorityData;
  std::uint8_t ttl = kDefaultTtl;
  std::vector<std::uint8_t> payload;
};

std::vector<std::uint8_t> encode_pdu(const Packet& packet);
std::optional<Packet> decode_pdu(std::span<const std::uint8_t> bytes);

class Network {
 public:
  Network(Scheduler& sched, EventLog& log, int node_id);

  // Enqueues a datagram; returns the assigned packet id. Throws
  // MtuExceededError for oversize payloads.
  std::uint32_t send_data(std::uint8_t destination, std::uint8_t priority,
                          std::uint32_t deadline_ms, std::span<const std::uint8_t> payload,
                          std::uint8_t ttl = kDefaultTtl);
  // Oldest received payload, empty when the buffer is empty.
  std::vector<std::uint8_t> get_data();
  std::size_t receive_pending() const { return rx_fifo_.size(); }

  // PDU boundary toward the MAC: strict-priority pull.
  bool has_pdu() const;
  std::optional<std::vector<std::uint8_t>> next_pdu();
  std::function<void()> on_tx_ready;

  void on_pdu_from_mac(std::span<const std::uint8_t> bytes);
  std::function<void(const Packet&)> on_delivered;

  // Ferry custody: while enabled, foreign unicast packets are stored instead
  // of relayed. Release re-injects matching packets at this layer.
  void set_custody_enabled(bool enabled) { custody_enabled_ = enabled; }
  bool custody_enabled() const { return custody_enabled_; }
  std::function<void(const Packet&)> on_custody_take;
  const std::deque<Packet>& custody_store() const { return custody_; }
  std::size_t release_custody(const std::function<bool(const Packet&)>& predicate);

  std::uint64_t packets_offered() const { return offered_; }
  std::uint64_t packets_delivered() const { return delivered_; }
  std::uint64_t duplicate_drops() const { return duplicate_drops_; }
  std::uint64_t ttl_drops() const { return ttl_drops_; }
  std::uint64_t custody_taken() const { return custody_taken_; }
  std::uint64_t custody_released() const { return custody_released_; }

 private:
  void enqueue(Packet packet);
  void log_packet(std::string_view ev, const Packet& packet, bool expired_flag = false,
                  bool with_expired = false);

  Scheduler& sched_;
  EventLog& log_;
  int node_id_;

  std::deque<Packet> control_queue_;
  std::deque<Packet> data_queue_;
  std::deque<std::vector<std::uint8_t>> rx_fifo_;
  std::set<std::pair<std::uint8_t, std::uint32_t>> seen_;  // (source, packet id)
  std::deque<Packet> custody_;
  bool custody_enabled_ = false;

  std::uint32_t next_packet_id_ = 1;
  std::uint64_t offered_ = 0;
  std::uint64_t delivered_ = 0;
  std::uint64_t duplicate_drops_ = 0;
  std::uint64_t ttl_drops_ = 0;
  std::uint64_t custody_taken_ = 0;
  std::uint64_t custody_released_ = 0;
};

}  // namespace aeronet
