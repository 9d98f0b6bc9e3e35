// Control-link frame codec: X.25 16-bit checksum, heartbeat and command
// payloads, streaming parser with resynchronization.
//
// Wire layout (little-endian multi-byte fields), documented byte-for-byte in
// docs/wire-formats.md:
//   [0]        start sign 0xFE
//   [1]        payload length n
//   [2]        sequence (wraps 255 -> 0)
//   [3]        system id (1..255)
//   [4]        component id
//   [5]        message id
//   [6..n+5]   payload
//   [n+6..n+7] checksum over bytes [1..n+5] plus the per-message seed byte
#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "aeronet/errors.hpp"

namespace aeronet::mav {

constexpr std::uint8_t kStartSign = 0xFE;
constexpr std::uint8_t kMsgIdHeartbeat = 0;
constexpr std::uint8_t kMsgIdCommand = 76;
constexpr std::size_t kFrameOverhead = 8;  // header (6) + checksum (2)

// Command ids (the supported subset).
constexpr std::uint16_t kCmdNavWaypoint = 16;
constexpr std::uint16_t kCmdNavLoiterTime = 19;
constexpr std::uint16_t kCmdNavReturnToLaunch = 20;
constexpr std::uint16_t kCmdNavLand = 21;
constexpr std::uint16_t kCmdNavTakeoff = 22;
constexpr std::uint16_t kCmdDoSetMode = 176;
constexpr std::uint16_t kCmdDoSetServo = 183;

bool is_supported_command(std::uint16_t command_id);

// Vehicle / autopilot type codes used in heartbeats.
constexpr std::uint8_t kVehicleGeneric = 0;
constexpr std::uint8_t kVehicleFixedWing = 1;
constexpr std::uint8_t kVehicleQuadrotor = 2;
constexpr std::uint8_t kVehicleHelicopter = 4;
constexpr std::uint8_t kAutopilotGeneric = 0;
constexpr std::uint8_t kAutopilotApm = 3;
constexpr std::uint8_t kAutopilotPixhawk = 12;

// Mode flag bits carried in the heartbeat.
constexpr std::uint8_t kModeArmed = 1u << 0;
constexpr std::uint8_t kModeAutonomous = 1u << 1;
constexpr std::uint8_t kModeManual = 1u << 2;
constexpr std::uint8_t kModeStabilize = 1u << 3;

constexpr std::uint8_t kMavlinkVersion = 1;

// X.25 16-bit CRC (reflected 0x1021, init 0xFFFF, final complement) over
// `data` followed by the per-message extra seed byte.
std::uint16_t crc16_x25(std::span<const std::uint8_t> data, std::uint8_t extra_seed);
// Same hash without a seed byte (used by tests and the frame check itself).
std::uint16_t crc16_x25(std::span<const std::uint8_t> data);
std::uint8_t crc_extra_for(std::uint8_t message_id);

// Fixed payload size of a message id; nullopt for ids outside the dialect.
// The parser enforces this structurally, so a corrupted length or id byte is
// rejected without relying on a checksum collision being absent.
std::optional<std::size_t> expected_payload_size(std::uint8_t message_id);

struct HeartbeatMsg {
  std::uint8_t vehicle_type = kVehicleQuadrotor;
  std::uint8_t autopilot_type = kAutopilotApm;
  std::uint8_t mode_flags = 0;
  std::uint8_t mavlink_version = kMavlinkVersion;

  bool operator==(const HeartbeatMsg&) const = default;
};

struct CommandMsg {
  std::uint16_t command_id = 0;
  std::uint8_t target_system = 1;
  std::uint8_t target_component = 0;
  std::uint8_t confirmation = 0;
  std::array<float, 7> params{};

  bool operator==(const CommandMsg&) const = default;
};

using Message = std::variant<HeartbeatMsg, CommandMsg>;

struct MavFrame {
  std::uint8_t length = 0;
  std::uint8_t sequence = 0;
  std::uint8_t system_id = 1;
  std::uint8_t component_id = 0;
  std::uint8_t message_id = 0;
  std::vector<std::uint8_t> payload;
  std::uint16_t checksum = 0;
};

// Throws InvalidSystemIdError when system_id is 0.
std::vector<std::uint8_t> encode_frame(const Message& msg, std::uint8_t seq,
                                       std::uint8_t system_id, std::uint8_t component_id);

// Decodes the payload of a checksum-valid frame; nullopt for unknown message
// ids or malformed payloads.
std::optional<Message> decode_payload(const MavFrame& frame);

// Incremental frame parser. Invalid-checksum frames are dropped and the
// parser resynchronizes on the next start sign.
class Parser {
 public:
  std::vector<MavFrame> feed(std::span<const std::uint8_t> bytes);

  std::uint64_t bytes_dropped() const { return bytes_dropped_; }
  std::uint64_t crc_failures() const { return crc_failures_; }

 private:
  std::vector<std::uint8_t> buffer_;
  std::uint64_t bytes_dropped_ = 0;
  std::uint64_t crc_failures_ = 0;
};

// Packs the ten execute-command arguments into one CommandMsg addressed to
// (autopilot_id, component_id). Throws UnsupportedCommandError.
CommandMsg map_execute_command(std::uint16_t command_id, std::uint8_t autopilot_id,
                               std::uint8_t component_id, double p1, double p2, double p3,
                               double p4, double p5, double p6, double p7);

}  // namespace aeronet::mav
