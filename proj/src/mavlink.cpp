#include "aeronet/mavlink.hpp"

#include <array>
#include <bit>
#include <cstring>

namespace aeronet::mav {

namespace {

constexpr std::size_t kHeartbeatPayloadSize = 4;
constexpr std::size_t kCommandPayloadSize = 33;  // 7 floats, cmd id, ts, tc, confirmation

const std::array<std::uint16_t, 256>& crc16_table() {
  static const auto table = [] {
    std::array<std::uint16_t, 256> t{};
    for (std::uint32_t i = 0; i < 256; ++i) {
      std::uint16_t crc = static_cast<std::uint16_t>(i);
      for (int bit = 0; bit < 8; ++bit) {
        crc = (crc & 1u) ? static_cast<std::uint16_t>((crc >> 1) ^ 0x8408)
                         : static_cast<std::uint16_t>(crc >> 1);
      }
      t[i] = crc;
    }
    return t;
  }();
  return table;
}

std::uint16_t crc_accumulate(std::uint16_t crc, std::uint8_t byte) {
  return static_cast<std::uint16_t>((crc >> 8) ^ crc16_table()[(crc ^ byte) & 0xFF]);
}

std::uint16_t crc_run(std::span<const std::uint8_t> data, const std::uint8_t* extra) {
  std::uint16_t crc = 0xFFFF;
  for (std::uint8_t b : data) crc = crc_accumulate(crc, b);
  if (extra) crc = crc_accumulate(crc, *extra);
  return static_cast<std::uint16_t>(crc ^ 0xFFFF);
}

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xFF));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_f32(std::vector<std::uint8_t>& out, float v) {
  const auto bits = std::bit_cast<std::uint32_t>(v);
  out.push_back(static_cast<std::uint8_t>(bits & 0xFF));
  out.push_back(static_cast<std::uint8_t>((bits >> 8) & 0xFF));
  out.push_back(static_cast<std::uint8_t>((bits >> 16) & 0xFF));
  out.push_back(static_cast<std::uint8_t>((bits >> 24) & 0xFF));
}

std::uint16_t get_u16(const std::uint8_t* p) {
  return static_cast<std::uint16_t>(p[0] | (static_cast<std::uint16_t>(p[1]) << 8));
}

float get_f32(const std::uint8_t* p) {
  std::uint32_t bits = static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
                       (static_cast<std::uint32_t>(p[2]) << 16) |
                       (static_cast<std::uint32_t>(p[3]) << 24);
  return std::bit_cast<float>(bits);
}

std::vector<std::uint8_t> encode_payload(const Message& msg, std::uint8_t& message_id) {
  std::vector<std::uint8_t> payload;
  if (const auto* hb = std::get_if<HeartbeatMsg>(&msg)) {
    message_id = kMsgIdHeartbeat;
    payload = {hb->vehicle_type, hb->autopilot_type, hb->mode_flags, hb->mavlink_version};
  } else {
    const auto& cmd = std::get<CommandMsg>(msg);
    message_id = kMsgIdCommand;
    payload.reserve(kCommandPayloadSize);
    for (float p : cmd.params) put_f32(payload, p);
    put_u16(payload, cmd.command_id);
    payload.push_back(cmd.target_system);
    payload.push_back(cmd.target_component);
    payload.push_back(cmd.confirmation);
  }
  return payload;
}

}  // namespace

bool is_supported_command(std::uint16_t command_id) {
  switch (command_id) {
    case kCmdNavWaypoint:
    case kCmdNavLoiterTime:
    case kCmdNavReturnToLaunch:
    case kCmdNavLand:
    case kCmdNavTakeoff:
    case kCmdDoSetMode:
    case kCmdDoSetServo:
      return true;
    default:
      return false;
  }
}

std::uint16_t crc16_x25(std::span<const std::uint8_t> data, std::uint8_t extra_seed) {
  return crc_run(data, &extra_seed);
}

std::uint16_t crc16_x25(std::span<const std::uint8_t> data) { return crc_run(data, nullptr); }

std::uint8_t crc_extra_for(std::uint8_t message_id) {
  // Per-message seed bytes of this dialect.
  switch (message_id) {
    case kMsgIdHeartbeat: return 50;
    case kMsgIdCommand: return 152;
    default: return 0;
  }
}

std::optional<std::size_t> expected_payload_size(std::uint8_t message_id) {
  switch (message_id) {
    case kMsgIdHeartbeat: return kHeartbeatPayloadSize;
    case kMsgIdCommand: return kCommandPayloadSize;
    default: return std::nullopt;
  }
}

std::vector<std::uint8_t> encode_frame(const Message& msg, std::uint8_t seq,
                                       std::uint8_t system_id, std::uint8_t component_id) {
  if (system_id == 0) throw InvalidSystemIdError("system id 0 is not addressable");

  std::uint8_t message_id = 0;
  std::vector<std::uint8_t> payload = encode_payload(msg, message_id);

  std::vector<std::uint8_t> frame;
  frame.reserve(payload.size() + kFrameOverhead);
  frame.push_back(kStartSign);
  frame.push_back(static_cast<std::uint8_t>(payload.size()));
  frame.push_back(seq);
  frame.push_back(system_id);
  frame.push_back(component_id);
  frame.push_back(message_id);
  frame.insert(frame.end(), payload.begin(), payload.end());

  const std::uint16_t crc = crc16_x25(
      std::span<const std::uint8_t>(frame.data() + 1, frame.size() - 1), crc_extra_for(message_id));
  put_u16(frame, crc);
  return frame;
}

std::optional<Message> decode_payload(const MavFrame& frame) {
  if (frame.message_id == kMsgIdHeartbeat) {
    if (frame.payload.size() != kHeartbeatPayloadSize) return std::nullopt;
    HeartbeatMsg hb;
    hb.vehicle_type = frame.payload[0];
    hb.autopilot_type = frame.payload[1];
    hb.mode_flags = frame.payload[2];
    hb.mavlink_version = frame.payload[3];
    if (hb.mavlink_version != kMavlinkVersion) return std::nullopt;
    return Message{hb};
  }
  if (frame.message_id == kMsgIdCommand) {
    if (frame.payload.size() != kCommandPayloadSize) return std::nullopt;
    CommandMsg cmd;
    for (std::size_t i = 0; i < 7; ++i) cmd.params[i] = get_f32(frame.payload.data() + 4 * i);
    cmd.command_id = get_u16(frame.payload.data() + 28);
    cmd.target_system = frame.payload[30];
    cmd.target_component = frame.payload[31];
    cmd.confirmation = frame.payload[32];
    return Message{cmd};
  }
  return std::nullopt;
}

std::vector<MavFrame> Parser::feed(std::span<const std::uint8_t> bytes) {
  buffer_.insert(buffer_.end(), bytes.begin(), bytes.end());
  std::vector<MavFrame> frames;

  std::size_t pos = 0;
  while (true) {
    // Resynchronize: skip to the next start sign.
    while (pos < buffer_.size() && buffer_[pos] != kStartSign) {
      ++pos;
      ++bytes_dropped_;
    }
    if (buffer_.size() - pos < 2) break;
    const std::size_t total = static_cast<std::size_t>(buffer_[pos + 1]) + kFrameOverhead;
    if (buffer_.size() - pos < total) break;

    const std::uint8_t* base = buffer_.data() + pos;
    const std::uint8_t message_id = base[5];
    const auto expected = expected_payload_size(message_id);
    bool valid = expected.has_value() && *expected == base[1];
    if (valid) {
      const std::uint16_t computed = crc16_x25(
          std::span<const std::uint8_t>(base + 1, total - 3), crc_extra_for(message_id));
      valid = computed == get_u16(base + total - 2);
    }
    if (!valid) {
      // Drop the false start sign and rescan from the following byte.
      ++crc_failures_;
      ++bytes_dropped_;
      ++pos;
      continue;
    }

    MavFrame frame;
    frame.length = base[1];
    frame.sequence = base[2];
    frame.system_id = base[3];
    frame.component_id = base[4];
    frame.message_id = message_id;
    frame.payload.assign(base + 6, base + 6 + frame.length);
    frame.checksum = get_u16(base + total - 2);
    frames.push_back(std::move(frame));
    pos += total;
  }
  buffer_.erase(buffer_.begin(), buffer_.begin() + static_cast<std::ptrdiff_t>(pos));
  return frames;
}

CommandMsg map_execute_command(std::uint16_t command_id, std::uint8_t autopilot_id,
                               std::uint8_t component_id, double p1, double p2, double p3,
                               double p4, double p5, double p6, double p7) {
  if (!is_supported_command(command_id)) {
    throw UnsupportedCommandError("command id " + std::to_string(command_id) +
                                  " is not in the supported set");
  }
  CommandMsg cmd;
  cmd.command_id = command_id;
  cmd.target_system = autopilot_id;
  cmd.target_component = component_id;
  cmd.params = {static_cast<float>(p1), static_cast<float>(p2), static_cast<float>(p3),
                static_cast<float>(p4), static_cast<float>(p5), static_cast<float>(p6),
                static_cast<float>(p7)};
  return cmd;
}

}  // namespace aeronet::mav
