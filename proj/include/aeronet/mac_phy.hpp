// Lower layers: MAC framing with CRC32, CSMA/CA, TDMA and plain random
// access for baselines, and a log-distance path-loss channel with a logistic
// packet-error curve, co-channel interference and jammers.
//
// MAC frame layout (little-endian), byte-for-byte in docs/wire-formats.md:
//   [0..1]   sync 0x5A 0xA5
//   [2]      version (1)
//   [3]      flags (0)
//   [4]      hop sender node id
//   [5]      hop receiver node id (255 broadcast)
//   [6..7]   body length
//   [8..11]  frame sequence
//   [12..]   body (one PDU)
//   [..+4]   CRC32 over header + body
#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "aeronet/geo.hpp"
#include "aeronet/log.hpp"
#include "aeronet/sim.hpp"

namespace aeronet {

std::uint32_t crc32_ieee(std::span<const std::uint8_t> data);

constexpr std::size_t kMacHeaderSize = 12;
constexpr std::size_t kMacCrcSize = 4;
constexpr std::uint8_t kMacSync0 = 0x5A;
constexpr std::uint8_t kMacSync1 = 0xA5;

constexpr double kMinCarrierHz = 70e6;
constexpr double kMaxCarrierHz = 6e9;

struct RadioConfig {
  double tx_power_dbm = 10.0;
  double carrier_frequency_hz = 2.45e9;
  double bitrate_bps = 250000.0;
  double rx_gain_db = 0.0;
};

struct ChannelParams {
  double pl0_db = 40.0;  // loss at the 1 m reference distance
  double path_loss_exp = 2.7;
  double noise_floor_dbm = -95.0;
  double per_threshold_db = 5.0;  // logistic midpoint (SNR)
  double per_slope_db = 2.0;
};

double dbm_to_mw(double dbm);
double mw_to_dbm(double mw);
// PL(d) = PL0 + 10 n log10(d / d0) with d0 = 1 m; d below d0 clamps to d0.
double path_loss_db(const ChannelParams& params, double distance_m);
// Packet error probability as a function of SNR.
double logistic_per(const ChannelParams& params, double snr_db);
// Minimum workable SNR; below it a frame is not even detected.
double sensitivity_snr_db(const ChannelParams& params);

struct MacFrameView {
  std::uint8_t sender = 0;
  std::uint8_t receiver = 0;
  std::uint32_t frame_seq = 0;
  std::vector<std::uint8_t> body;
};

std::vector<std::uint8_t> encode_mac_frame(std::uint8_t sender, std::uint8_t receiver,
                                           std::uint32_t frame_seq,
                                           std::span<const std::uint8_t> pdu);
// nullopt on bad sync, length mismatch or CRC failure.
std::optional<MacFrameView> decode_mac_frame(std::span<const std::uint8_t> bytes);

enum class RxOutcome { kDelivered, kCrcFail, kBelowSensitivity };
std::string_view rx_outcome_name(RxOutcome o);

struct RxDecision {
  double rssi_dbm = 0.0;
  double snr_db = 0.0;
  double per = 1.0;
  RxOutcome outcome = RxOutcome::kBelowSensitivity;
  bool collided = false;
};

// Pure reception decision. `overlapping_rssi_dbm` are co-channel frames that
// overlap the frame in time, as received powers at this receiver;
// `extra_interference_mw` adds jammer power. Frames within 6 dB of each
// other collide (no capture effect); everything overlapping contributes to
// the interference sum, which is accumulated in linear milliwatts.
RxDecision receive_decision(const ChannelParams& params, double rssi_dbm,
                            const std::vector<double>& overlapping_rssi_dbm,
                            double extra_interference_mw, double unit_draw);

struct JammerConfig {
  GeoPoint position;
  double power_dbm = 20.0;
  double frequency_hz = 2.45e9;
  bool adaptive = false;    // adaptive emits only while sensing cooperative energy
  double duty_cycle = 1.0;  // passive on-fraction of each period
  SimMs period_ms = 100;
};

// Shared medium for one simulation run. Nodes register a position provider;
// transmissions occupy [start, end) and every co-channel node evaluates a
// reception at completion time. Receivers are half-duplex: a node that
// transmitted during the overlap hears nothing.
class Channel {
 public:
  Channel(Scheduler& sched, EventLog& log, ChannelParams params);

  void add_node(int id, RadioConfig radio, std::function<GeoPoint()> position);
  void add_jammer(JammerConfig jammer);
  // Draws one uniform value from the receiving node's stream.
  void set_unit_draw(std::function<double(int rx_node)> draw);
  void set_frame_sink(std::function<void(int rx_node, std::vector<std::uint8_t>)> sink);

  const ChannelParams& params() const { return params_; }
  const RadioConfig& radio(int node) const;

  SimMs airtime_ms(int node, std::size_t frame_bytes) const;
  // Carrier sense: any co-channel transmission or active jammer whose power
  // at this node reaches the sensitivity floor (sense range == decode range).
  bool carrier_busy(int node) const;
  SimMs busy_until(int node) const;
  bool transmitting(int node) const;

  // Starts a transmission now; returns its end time.
  SimMs transmit(int node, std::vector<std::uint8_t> frame);

  std::uint64_t transmissions() const { return tx_count_; }
  std::uint64_t collisions() const { return collision_count_; }

 private:
  struct Tx {
    std::uint64_t id = 0;
    int node = 0;
    SimMs start = 0;
    SimMs end = 0;
    double freq = 0.0;
  };
  struct Node {
    RadioConfig radio;
    std::function<GeoPoint()> position;
  };

  void complete(std::uint64_t tx_id, std::vector<std::uint8_t> frame);
  double rx_power_dbm(const Tx& tx, const GeoPoint& at, double rx_gain) const;
  double jammer_interference_mw(const GeoPoint& at, double freq, SimMs start, SimMs end) const;
  bool jammer_active_now(const JammerConfig& jammer) const;
  bool cooperative_energy(const GeoPoint& at, double freq, SimMs start, SimMs end) const;
  static bool co_channel(double f1, double f2) { return f1 > f2 ? f1 - f2 <= 1e6 : f2 - f1 <= 1e6; }

  Scheduler& sched_;
  EventLog& log_;
  ChannelParams params_;
  std::map<int, Node> nodes_;
  std::vector<JammerConfig> jammers_;
  std::vector<Tx> history_;  // active and recently completed transmissions
  std::function<double(int)> unit_draw_;
  std::function<void(int, std::vector<std::uint8_t>)> sink_;
  std::uint64_t next_tx_id_ = 1;
  std::uint64_t tx_count_ = 0;
  std::uint64_t collision_count_ = 0;
};

enum class MacMode { kCsma, kTdma, kAloha };

// Slot ownership: node k owns slot iff floor(t / slot) mod N == rank(k).
bool tdma_owns_slot(const std::vector<int>& schedule, int node, SimMs t, SimMs slot_ms);
SimMs tdma_next_owned_slot_start(const std::vector<int>& schedule, int node, SimMs t,
                                 SimMs slot_ms);

struct MacConfig {
  MacMode mode = MacMode::kCsma;
  int node_id = 1;
  std::vector<int> tdma_schedule;  // ascending node ids
  SimMs tdma_slot_ms = 50;
  SimMs csma_slot_ms = 1;
  int csma_cw_min = 16;
  int csma_cw_max = 128;
  int csma_retry_limit = 7;
};

class Mac {
 public:
  Mac(Scheduler& sched, EventLog& log, Channel& channel, RngStream& rng, MacConfig config);

  // Pull-based PDU source (priority drain lives in the network layer).
  void set_pdu_source(std::function<std::optional<std::vector<std::uint8_t>>()> source);
  void set_pdu_sink(std::function<void(std::span<const std::uint8_t>)> sink);

  void start();            // schedules TDMA slot wakeups (no-op for others)
  void notify_tx_ready();  // network has queued data
  // Frames a PDU and queues it for channel access.
  void submit(std::vector<std::uint8_t> pdu, std::uint8_t receiver);
  void on_frame_from_channel(std::vector<std::uint8_t> bytes);

  std::uint64_t frames_sent() const { return frames_sent_; }
  std::uint64_t retry_drops() const { return retry_drops_; }
  std::uint64_t oversize_drops() const { return oversize_drops_; }
  std::uint64_t crc_rejects() const { return crc_rejects_; }

 private:
  void service();
  void csma_attempt();
  void tdma_service();
  void start_tx();
  bool take_next_frame();

  Scheduler& sched_;
  EventLog& log_;
  Channel& channel_;
  RngStream& rng_;
  MacConfig config_;

  std::function<std::optional<std::vector<std::uint8_t>>()> source_;
  std::function<void(std::span<const std::uint8_t>)> sink_;

  std::vector<std::vector<std::uint8_t>> queue_;  // framed, FIFO
  std::optional<std::vector<std::uint8_t>> current_;
  bool in_flight_ = false;
  bool attempt_pending_ = false;
  int retries_ = 0;
  std::uint32_t frame_seq_ = 0;

  std::uint64_t frames_sent_ = 0;
  std::uint64_t retry_drops_ = 0;
  std::uint64_t oversize_drops_ = 0;
  std::uint64_t crc_rejects_ = 0;
};

}  // namespace aeronet
