#include "aeronet/mac_phy.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <memory>
#include <string>

namespace aeronet {

namespace {

constexpr double kCollisionWindowDb = 6.0;  // no capture effect inside this band
constexpr SimMs kHistoryRetentionMs = 10000;

std::uint32_t crc32_table_entry(std::uint32_t i) {
  std::uint32_t c = i;
  for (int k = 0; k < 8; ++k) c = (c & 1) ? 0xEDB88320u ^ (c >> 1) : c >> 1;
  return c;
}

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xFF));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xFF));
}

std::uint32_t get_u32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

}  // namespace

std::uint32_t crc32_ieee(std::span<const std::uint8_t> data) {
  static const auto table = [] {
    std::array<std::uint32_t, 256> t{};
    for (std::uint32_t i = 0; i < 256; ++i) t[i] = crc32_table_entry(i);
    return t;
  }();
  std::uint32_t crc = 0xFFFFFFFFu;
  for (std::uint8_t b : data) crc = table[(crc ^ b) & 0xFF] ^ (crc >> 8);
  return crc ^ 0xFFFFFFFFu;
}

double dbm_to_mw(double dbm) { return std::pow(10.0, dbm / 10.0); }

double mw_to_dbm(double mw) { return 10.0 * std::log10(mw); }

double path_loss_db(const ChannelParams& params, double distance_m) {
  const double d = std::max(distance_m, 1.0);
  return params.pl0_db + 10.0 * params.path_loss_exp * std::log10(d);
}

double logistic_per(const ChannelParams& params, double snr_db) {
  return 1.0 / (1.0 + std::exp((snr_db - params.per_threshold_db) / params.per_slope_db));
}

double sensitivity_snr_db(const ChannelParams& params) { return params.per_threshold_db - 10.0; }

std::string_view rx_outcome_name(RxOutcome o) {
  switch (o) {
    case RxOutcome::kDelivered: return "delivered";
    case RxOutcome::kCrcFail: return "crc_fail";
    case RxOutcome::kBelowSensitivity: return "below_sensitivity";
  }
  return "below_sensitivity";
}

std::vector<std::uint8_t> encode_mac_frame(std::uint8_t sender, std::uint8_t receiver,
                                           std::uint32_t frame_seq,
                                           std::span<const std::uint8_t> pdu) {
  std::vector<std::uint8_t> frame;
  frame.reserve(kMacHeaderSize + pdu.size() + kMacCrcSize);
  frame.push_back(kMacSync0);
  frame.push_back(kMacSync1);
  frame.push_back(1);  // version
  frame.push_back(0);  // flags
  frame.push_back(sender);
  frame.push_back(receiver);
  put_u16(frame, static_cast<std::uint16_t>(pdu.size()));
  put_u32(frame, frame_seq);
  frame.insert(frame.end(), pdu.begin(), pdu.end());
  const std::uint32_t crc = crc32_ieee(frame);
  put_u32(frame, crc);
  return frame;
}

std::optional<MacFrameView> decode_mac_frame(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kMacHeaderSize + kMacCrcSize) return std::nullopt;
  if (bytes[0] != kMacSync0 || bytes[1] != kMacSync1 || bytes[2] != 1) return std::nullopt;
  const std::size_t body_len = bytes[6] | (static_cast<std::size_t>(bytes[7]) << 8);
  if (bytes.size() != kMacHeaderSize + body_len + kMacCrcSize) return std::nullopt;
  const std::uint32_t stored = get_u32(bytes.data() + kMacHeaderSize + body_len);
  const std::uint32_t computed =
      crc32_ieee(bytes.subspan(0, kMacHeaderSize + body_len));
  if (stored != computed) return std::nullopt;
  MacFrameView view;
  view.sender = bytes[4];
  view.receiver = bytes[5];
  view.frame_seq = get_u32(bytes.data() + 8);
  view.body.assign(bytes.begin() + kMacHeaderSize, bytes.begin() + kMacHeaderSize + body_len);
  return view;
}

RxDecision receive_decision(const ChannelParams& params, double rssi_dbm,
                            const std::vector<double>& overlapping_rssi_dbm,
                            double extra_interference_mw, double unit_draw) {
  RxDecision d;
  d.rssi_dbm = rssi_dbm;

  // Interference sums in linear milliwatts, never in dB.
  double interference_mw = extra_interference_mw;
  bool collided = false;
  for (double other : overlapping_rssi_dbm) {
    interference_mw += dbm_to_mw(other);
    if (std::abs(other - rssi_dbm) <= kCollisionWindowDb) collided = true;
  }
  const double noise_mw = dbm_to_mw(params.noise_floor_dbm);
  d.snr_db = rssi_dbm - mw_to_dbm(noise_mw + interference_mw);
  d.per = logistic_per(params, d.snr_db);
  d.collided = collided;

  if (d.snr_db < sensitivity_snr_db(params)) {
    d.outcome = RxOutcome::kBelowSensitivity;
  } else if (collided) {
    d.outcome = RxOutcome::kCrcFail;
  } else {
    d.outcome = unit_draw < d.per ? RxOutcome::kCrcFail : RxOutcome::kDelivered;
  }
  return d;
}

Channel::Channel(Scheduler& sched, EventLog& log, ChannelParams params)
    : sched_(sched), log_(log), params_(params) {}

void Channel::add_node(int id, RadioConfig radio, std::function<GeoPoint()> position) {
  nodes_[id] = Node{radio, std::move(position)};
}

void Channel::add_jammer(JammerConfig jammer) { jammers_.push_back(jammer); }

void Channel::set_unit_draw(std::function<double(int)> draw) { unit_draw_ = std::move(draw); }

void Channel::set_frame_sink(std::function<void(int, std::vector<std::uint8_t>)> sink) {
  sink_ = std::move(sink);
}

const RadioConfig& Channel::radio(int node) const {
  auto it = nodes_.find(node);
  if (it == nodes_.end()) throw SimError("no radio for node " + std::to_string(node));
  return it->second.radio;
}

SimMs Channel::airtime_ms(int node, std::size_t frame_bytes) const {
  const double bitrate = radio(node).bitrate_bps;
  const double bits = static_cast<double>(frame_bytes) * 8.0;
  return static_cast<SimMs>(std::ceil(bits * 1000.0 / bitrate));
}

double Channel::rx_power_dbm(const Tx& tx, const GeoPoint& at, double rx_gain) const {
  const auto& tx_node = nodes_.at(tx.node);
  const double d = distance_m(tx_node.position(), at);
  return tx_node.radio.tx_power_dbm - path_loss_db(params_, d) + rx_gain;
}

bool Channel::jammer_active_now(const JammerConfig& jammer) const {
  const SimMs now = sched_.now_ms();
  if (jammer.adaptive) {
    return cooperative_energy(jammer.position, jammer.frequency_hz, now, now + 1);
  }
  if (jammer.duty_cycle >= 1.0) return true;
  if (jammer.duty_cycle <= 0.0) return false;
  const SimMs on_len = static_cast<SimMs>(std::llround(jammer.duty_cycle *
                                                       static_cast<double>(jammer.period_ms)));
  return (now % jammer.period_ms) < on_len;
}

bool Channel::cooperative_energy(const GeoPoint& at, double freq, SimMs start, SimMs end) const {
  // Sensitivity floor expressed as received power.
  const double floor_dbm = params_.noise_floor_dbm + sensitivity_snr_db(params_);
  for (const auto& tx : history_) {
    if (tx.end <= start || tx.start >= end) continue;
    if (!co_channel(tx.freq, freq)) continue;
    if (rx_power_dbm(tx, at, 0.0) >= floor_dbm) return true;
  }
  return false;
}

double Channel::jammer_interference_mw(const GeoPoint& at, double freq, SimMs start,
                                       SimMs end) const {
  double sum = 0.0;
  for (const auto& jammer : jammers_) {
    if (!co_channel(jammer.frequency_hz, freq)) continue;
    bool active = false;
    if (jammer.adaptive) {
      active = cooperative_energy(jammer.position, jammer.frequency_hz, start, end);
    } else if (jammer.duty_cycle >= 1.0) {
      active = true;
    } else if (jammer.duty_cycle > 0.0) {
      // Does [start, end) intersect any on-window of the duty pattern?
      const SimMs period = jammer.period_ms;
      const SimMs on_len = static_cast<SimMs>(std::llround(jammer.duty_cycle *
                                                           static_cast<double>(period)));
      if (end - start >= period) {
        active = true;
      } else {
        const SimMs phase = start % period;
        const SimMs span = end - start;
        active = phase < on_len || phase + span > period;  // overlaps this or next on-window
      }
    }
    if (!active) continue;
    const double d = distance_m(jammer.position, at);
    sum += dbm_to_mw(jammer.power_dbm - path_loss_db(params_, d));
  }
  return sum;
}

bool Channel::carrier_busy(int node) const {
  const auto& me = nodes_.at(node);
  const GeoPoint at = me.position();
  const double freq = me.radio.carrier_frequency_hz;
  const double floor_dbm = params_.noise_floor_dbm + sensitivity_snr_db(params_);
  const SimMs now = sched_.now_ms();
  for (const auto& tx : history_) {
    if (now < tx.start || now >= tx.end) continue;
    if (tx.node == node) return true;  // own transmission occupies the radio
    if (!co_channel(tx.freq, freq)) continue;
    if (rx_power_dbm(tx, at, me.radio.rx_gain_db) >= floor_dbm) return true;
  }
  for (const auto& jammer : jammers_) {
    if (!co_channel(jammer.frequency_hz, freq)) continue;
    if (!jammer_active_now(jammer)) continue;
    const double d = distance_m(jammer.position, at);
    if (jammer.power_dbm - path_loss_db(params_, d) + me.radio.rx_gain_db >= floor_dbm) {
      return true;
    }
  }
  return false;
}

SimMs Channel::busy_until(int node) const {
  const auto& me = nodes_.at(node);
  const GeoPoint at = me.position();
  const double freq = me.radio.carrier_frequency_hz;
  const double floor_dbm = params_.noise_floor_dbm + sensitivity_snr_db(params_);
  const SimMs now = sched_.now_ms();
  SimMs until = now;
  for (const auto& tx : history_) {
    if (now < tx.start || now >= tx.end) continue;
    const bool sensed = tx.node == node ||
                        (co_channel(tx.freq, freq) &&
                         rx_power_dbm(tx, at, me.radio.rx_gain_db) >= floor_dbm);
    if (sensed) until = std::max(until, tx.end);
  }
  if (until == now && carrier_busy(node)) until = now + 1;  // jammer-only busy
  return until;
}

bool Channel::transmitting(int node) const {
  const SimMs now = sched_.now_ms();
  for (const auto& tx : history_) {
    if (tx.node == node && now >= tx.start && now < tx.end) return true;
  }
  return false;
}

SimMs Channel::transmit(int node, std::vector<std::uint8_t> frame) {
  Tx tx;
  tx.id = next_tx_id_++;
  tx.node = node;
  tx.start = sched_.now_ms();
  tx.end = tx.start + airtime_ms(node, frame.size());
  tx.freq = radio(node).carrier_frequency_hz;
  history_.push_back(tx);
  ++tx_count_;

  auto payload = std::make_shared<std::vector<std::uint8_t>>(std::move(frame));
  const std::uint64_t id = tx.id;
  sched_.schedule_at_ms(tx.end, node, [this, id, payload] { complete(id, std::move(*payload)); });
  return tx.end;
}

void Channel::complete(std::uint64_t tx_id, std::vector<std::uint8_t> frame) {
  const auto tx_it = std::find_if(history_.begin(), history_.end(),
                                  [tx_id](const Tx& t) { return t.id == tx_id; });
  if (tx_it == history_.end()) return;
  const Tx tx = *tx_it;

  for (auto& [rx_id, rx] : nodes_) {
    if (rx_id == tx.node) continue;
    if (!co_channel(rx.radio.carrier_frequency_hz, tx.freq)) continue;

    // Half duplex: a node that transmitted during the overlap hears nothing.
    bool deaf = false;
    std::vector<double> overlapping;
    const GeoPoint at = rx.position();
    for (const auto& other : history_) {
      if (other.id == tx.id) continue;
      if (other.end <= tx.start || other.start >= tx.end) continue;
      if (other.node == rx_id) {
        deaf = true;
        break;
      }
      if (!co_channel(other.freq, tx.freq)) continue;
      overlapping.push_back(rx_power_dbm(other, at, rx.radio.rx_gain_db));
    }
    if (deaf) continue;

    const double rssi = rx_power_dbm(tx, at, rx.radio.rx_gain_db);
    const double jam_mw =
        jammer_interference_mw(at, rx.radio.carrier_frequency_hz, tx.start, tx.end);
    const double draw = unit_draw_ ? unit_draw_(rx_id) : 1.0;
    const RxDecision decision =
        receive_decision(params_, rssi, overlapping, jam_mw, draw);
    if (decision.collided) ++collision_count_;

    log_.record(sched_.now_ms(), rx_id, Category::kRadio,
                {Attr::str("ev", "rx"), Attr::num("tx", tx.node),
                 Attr::fixed("rssi", decision.rssi_dbm, 2), Attr::fixed("snr", decision.snr_db, 2),
                 Attr::str("outcome", rx_outcome_name(decision.outcome)),
                 Attr::boolean("collided", decision.collided),
                 Attr::num("freq", static_cast<long long>(rx.radio.carrier_frequency_hz)),
                 Attr::fixed("gain", rx.radio.rx_gain_db, 1)});

    if (!sink_) continue;
    if (decision.outcome == RxOutcome::kDelivered) {
      sink_(rx_id, frame);
    } else if (decision.outcome == RxOutcome::kCrcFail) {
      // Model corruption concretely so the MAC's CRC32 check really fails.
      auto corrupted = frame;
      corrupted[corrupted.size() - 1] ^= 0xFF;
      sink_(rx_id, std::move(corrupted));
    }
  }

  // Prune stale history; anything this old cannot overlap a live frame.
  const SimMs cutoff = sched_.now_ms() - kHistoryRetentionMs;
  std::erase_if(history_, [cutoff](const Tx& t) { return t.end <= cutoff; });
}

bool tdma_owns_slot(const std::vector<int>& schedule, int node, SimMs t, SimMs slot_ms) {
  const auto it = std::find(schedule.begin(), schedule.end(), node);
  if (it == schedule.end()) return false;
  const auto rank = static_cast<SimMs>(it - schedule.begin());
  const SimMs n = static_cast<SimMs>(schedule.size());
  return (t / slot_ms) % n == rank;
}

SimMs tdma_next_owned_slot_start(const std::vector<int>& schedule, int node, SimMs t,
                                 SimMs slot_ms) {
  const auto it = std::find(schedule.begin(), schedule.end(), node);
  if (it == schedule.end()) throw SimError("node not in tdma schedule");
  const auto rank = static_cast<SimMs>(it - schedule.begin());
  const SimMs n = static_cast<SimMs>(schedule.size());
  const SimMs frame_len = n * slot_ms;
  const SimMs frame_start = (t / frame_len) * frame_len;
  SimMs candidate = frame_start + rank * slot_ms;
  while (candidate <= t) candidate += frame_len;
  return candidate;
}

Mac::Mac(Scheduler& sched, EventLog& log, Channel& channel, RngStream& rng, MacConfig config)
    : sched_(sched), log_(log), channel_(channel), rng_(rng), config_(config) {}

void Mac::set_pdu_source(std::function<std::optional<std::vector<std::uint8_t>>()> source) {
  source_ = std::move(source);
}

void Mac::set_pdu_sink(std::function<void(std::span<const std::uint8_t>)> sink) {
  sink_ = std::move(sink);
}

void Mac::start() {
  if (config_.mode != MacMode::kTdma) return;
  const SimMs next =
      tdma_next_owned_slot_start(config_.tdma_schedule, config_.node_id, sched_.now_ms(),
                                 config_.tdma_slot_ms);
  struct SlotTask {
    Mac* mac;
    void operator()() const {
      mac->service();
      const SimMs next = tdma_next_owned_slot_start(mac->config_.tdma_schedule,
                                                    mac->config_.node_id, mac->sched_.now_ms(),
                                                    mac->config_.tdma_slot_ms);
      mac->sched_.schedule_at_ms(next, mac->config_.node_id, SlotTask{mac});
    }
  };
  sched_.schedule_at_ms(next, config_.node_id, SlotTask{this});
}

void Mac::notify_tx_ready() { service(); }

void Mac::submit(std::vector<std::uint8_t> pdu, std::uint8_t receiver) {
  queue_.push_back(encode_mac_frame(static_cast<std::uint8_t>(config_.node_id), receiver,
                                    frame_seq_++, pdu));
  service();
}

bool Mac::take_next_frame() {
  if (current_) return true;
  if (!queue_.empty()) {
    current_ = std::move(queue_.front());
    queue_.erase(queue_.begin());
    retries_ = 0;
    return true;
  }
  if (source_) {
    if (auto pdu = source_()) {
      current_ = encode_mac_frame(static_cast<std::uint8_t>(config_.node_id),
                                  static_cast<std::uint8_t>(kBroadcastNodeId), frame_seq_++, *pdu);
      retries_ = 0;
      return true;
    }
  }
  return false;
}

void Mac::service() {
  if (in_flight_ || attempt_pending_) return;
  if (!take_next_frame()) return;

  switch (config_.mode) {
    case MacMode::kAloha:
      start_tx();
      break;
    case MacMode::kCsma:
      csma_attempt();
      break;
    case MacMode::kTdma:
      tdma_service();
      break;
  }
}

void Mac::csma_attempt() {
  if (!channel_.carrier_busy(config_.node_id)) {
    start_tx();
    return;
  }
  ++retries_;
  if (retries_ > config_.csma_retry_limit) {
    log_.record(sched_.now_ms(), config_.node_id, Category::kError,
                {Attr::str("ev", "csma_retry_drop"), Attr::num("retries", retries_ - 1)});
    ++retry_drops_;
    current_.reset();
    retries_ = 0;
    service();  // next frame, if any
    return;
  }
  // Contention window doubles on repeated busy, capped.
  int cw = config_.csma_cw_min << (retries_ - 1);
  cw = std::min(cw, config_.csma_cw_max);
  const SimMs backoff =
      static_cast<SimMs>(rng_.next_below(static_cast<std::uint64_t>(cw))) * config_.csma_slot_ms;
  const SimMs at = std::max(channel_.busy_until(config_.node_id), sched_.now_ms()) + backoff;
  attempt_pending_ = true;
  sched_.schedule_at_ms(at, config_.node_id, [this] {
    attempt_pending_ = false;
    if (current_) csma_attempt();
  });
}

void Mac::tdma_service() {
  const SimMs now = sched_.now_ms();
  const SimMs airtime = channel_.airtime_ms(config_.node_id, current_->size());
  if (airtime > config_.tdma_slot_ms) {
    log_.record(now, config_.node_id, Category::kError,
                {Attr::str("ev", "tdma_oversize_drop"), Attr::num("bytes", static_cast<long long>(current_->size()))});
    ++oversize_drops_;
    current_.reset();
    service();
    return;
  }
  if (!tdma_owns_slot(config_.tdma_schedule, config_.node_id, now, config_.tdma_slot_ms)) {
    return;  // the slot wakeup task retries
  }
  const SimMs slot_end = (now / config_.tdma_slot_ms + 1) * config_.tdma_slot_ms;
  if (now + airtime > slot_end) {
    return;  // does not fit in the remainder; wait for the next owned slot
  }
  start_tx();
}

void Mac::start_tx() {
  const SimMs end = channel_.transmit(config_.node_id, *current_);
  ++frames_sent_;
  current_.reset();
  retries_ = 0;
  in_flight_ = true;
  sched_.schedule_at_ms(end, config_.node_id, [this] {
    in_flight_ = false;
    service();
  });
}

void Mac::on_frame_from_channel(std::vector<std::uint8_t> bytes) {
  auto frame = decode_mac_frame(bytes);
  if (!frame) {
    ++crc_rejects_;
    return;
  }
  if (frame->receiver != config_.node_id && frame->receiver != kBroadcastNodeId) return;
  if (sink_) sink_(frame->body);
}

}  // namespace aeronet
