#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstring>
#include <map>

#include "aeronet/mac_phy.hpp"

using namespace aeronet;

namespace {

// Bit-by-bit CRC32 reference (IEEE 802.3): MSB-first long division with
// explicit reflection, independent of the library's table-driven form.
std::uint8_t reflect8(std::uint8_t b) {
  std::uint8_t r = 0;
  for (int i = 0; i < 8; ++i) {
    if (b & (1u << i)) r |= static_cast<std::uint8_t>(1u << (7 - i));
  }
  return r;
}

std::uint32_t reflect32(std::uint32_t v) {
  std::uint32_t r = 0;
  for (int i = 0; i < 32; ++i) {
    if (v & (1u << i)) r |= 1u << (31 - i);
  }
  return r;
}

std::uint32_t oracle_crc32(const std::vector<std::uint8_t>& data) {
  std::uint32_t reg = 0xFFFFFFFFu;
  for (std::uint8_t byte : data) {
    reg ^= static_cast<std::uint32_t>(reflect8(byte)) << 24;
    for (int i = 0; i < 8; ++i) {
      reg = (reg & 0x80000000u) ? (reg << 1) ^ 0x04C11DB7u : reg << 1;
    }
  }
  return reflect32(reg) ^ 0xFFFFFFFFu;
}

GeoPoint east_of(const GeoPoint& origin, double meters) {
  return enu_apply(origin, EnuVec{meters, 0, 0});
}

const GeoPoint kOrigin{43.0, -78.78, 10.0};

struct PhyRig {
  Scheduler sched;
  EventLog log{"phy", 9, 600000};
  ChannelParams params;
  Channel channel;
  std::map<int, RngStream> rngs;
  std::map<int, std::vector<std::vector<std::uint8_t>>> received;

  explicit PhyRig(ChannelParams p = {}) : params(p), channel(sched, log, p) {
    channel.set_unit_draw([this](int node) {
      auto it = rngs.find(node);
      return it == rngs.end() ? 1.0 : it->second.next_unit();
    });
    channel.set_frame_sink([this](int node, std::vector<std::uint8_t> bytes) {
      received[node].push_back(std::move(bytes));
    });
  }

  void add(int id, double east_m, RadioConfig radio = {}) {
    rngs.emplace(id, RngStream(9, id));
    channel.add_node(id, radio, [p = east_of(kOrigin, east_m)] { return p; });
  }
};

}  // namespace

TEST_CASE("crc32 known vector and oracle equality") {
  const char* digits = "123456789";
  std::vector<std::uint8_t> data(digits, digits + std::strlen(digits));
  CHECK(oracle_crc32(data) == 0xCBF43926u);
  CHECK(crc32_ieee(data) == 0xCBF43926u);

  RngStream rng(5, 1);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<std::uint8_t> buf;
    const std::size_t len = rng.next_below(200);
    for (std::size_t i = 0; i < len; ++i) {
      buf.push_back(static_cast<std::uint8_t>(rng.next_below(256)));
    }
    CHECK(crc32_ieee(buf) == oracle_crc32(buf));
  }
}

TEST_CASE("mac frame: 100-byte pdu makes a 116-byte frame") {
  std::vector<std::uint8_t> pdu(100, 0x42);
  const auto frame = encode_mac_frame(1, 255, 7, pdu);
  CHECK(frame.size() == 116);  // 12 header + 100 body + 4 crc
  auto view = decode_mac_frame(frame);
  REQUIRE(view.has_value());
  CHECK(view->sender == 1);
  CHECK(view->receiver == 255);
  CHECK(view->frame_seq == 7);
  CHECK(view->body == pdu);
}

TEST_CASE("empty pdu still frames and verifies") {
  const auto frame = encode_mac_frame(3, 4, 0, {});
  CHECK(frame.size() == kMacHeaderSize + kMacCrcSize);
  CHECK(decode_mac_frame(frame).has_value());
}

TEST_CASE("one corrupted body byte fails CRC32 verification") {
  std::vector<std::uint8_t> pdu(64, 0x11);
  auto frame = encode_mac_frame(1, 2, 9, pdu);
  for (std::size_t pos = 0; pos < frame.size(); ++pos) {
    auto corrupt = frame;
    corrupt[pos] ^= 0x01;
    CHECK_FALSE(decode_mac_frame(corrupt).has_value());
  }
}

TEST_CASE("path loss reference points") {
  ChannelParams p;
  p.pl0_db = 40.0;
  p.path_loss_exp = 2.0;
  CHECK(path_loss_db(p, 1.0) == doctest::Approx(40.0));
  CHECK(path_loss_db(p, 2.0) - path_loss_db(p, 1.0) == doctest::Approx(6.0206).epsilon(1e-5));
  p.path_loss_exp = 3.0;
  CHECK(path_loss_db(p, 10.0) == doctest::Approx(70.0));
  CHECK(path_loss_db(p, 0.5) == doctest::Approx(path_loss_db(p, 1.0)));  // clamp below d0
}

TEST_CASE("rssi decreases and per never decreases with distance") {
  ChannelParams p;
  double last_rssi = 1e9;
  double last_per = -1.0;
  for (int d = 1; d <= 1000; ++d) {
    const double rssi = 10.0 - path_loss_db(p, d);
    const double snr = rssi - p.noise_floor_dbm;
    const double per = logistic_per(p, snr);
    CHECK(rssi < last_rssi);
    CHECK(per >= last_per);
    last_rssi = rssi;
    last_per = per;
  }
}

TEST_CASE("power sums happen in linear milliwatts") {
  // Two equal-power interferers add 3.01 dB, not 2x dB.
  const double two_sources_mw = dbm_to_mw(-60.0) + dbm_to_mw(-60.0);
  CHECK(mw_to_dbm(two_sources_mw) == doctest::Approx(-56.9897).epsilon(1e-4));

  // receive_decision's interference accumulation against a brute-force sum.
  ChannelParams p;
  const std::vector<double> overlapping = {-70.0, -75.0};
  const RxDecision d = receive_decision(p, -50.0, overlapping, dbm_to_mw(-80.0), 0.5);
  const double expected_mw =
      dbm_to_mw(p.noise_floor_dbm) + dbm_to_mw(-70.0) + dbm_to_mw(-75.0) + dbm_to_mw(-80.0);
  CHECK(d.snr_db == doctest::Approx(-50.0 - mw_to_dbm(expected_mw)).epsilon(1e-9));
}

TEST_CASE("receive decision: strong clean signal delivers") {
  ChannelParams p;
  const double rssi = p.noise_floor_dbm + p.per_threshold_db + 30.0;
  const RxDecision d = receive_decision(p, rssi, {}, 0.0, 0.123456);
  CHECK(d.per < 1e-3);
  CHECK(d.outcome == RxOutcome::kDelivered);
  CHECK_FALSE(d.collided);
}

TEST_CASE("receive decision: far below threshold is below sensitivity") {
  ChannelParams p;
  const double rssi = p.noise_floor_dbm + p.per_threshold_db - 30.0;
  const RxDecision d = receive_decision(p, rssi, {}, 0.0, 0.999999);
  CHECK(d.outcome == RxOutcome::kBelowSensitivity);
}

TEST_CASE("equal-power overlap fails both regardless of the draw") {
  ChannelParams p;
  const double rssi = p.noise_floor_dbm + 40.0;
  const RxDecision d = receive_decision(p, rssi, {rssi - 3.0}, 0.0, 0.999999);
  CHECK(d.collided);
  CHECK(d.outcome == RxOutcome::kCrcFail);
  // 7 dB apart is outside the collision window; the stronger one survives.
  const RxDecision clean = receive_decision(p, rssi, {rssi - 7.0}, 0.0, 0.9);
  CHECK_FALSE(clean.collided);
}

TEST_CASE("two overlapping transmissions at similar power both fail at a third node") {
  PhyRig rig;
  rig.add(1, 0.0);
  rig.add(2, 40.0);
  rig.add(3, 20.0);  // equidistant listener

  const auto frame_a = encode_mac_frame(1, 255, 0, std::vector<std::uint8_t>(50, 0xAA));
  const auto frame_b = encode_mac_frame(2, 255, 0, std::vector<std::uint8_t>(50, 0xBB));
  rig.channel.transmit(1, frame_a);
  rig.channel.transmit(2, frame_b);
  rig.sched.run_until_ms(100);

  int crc_fail = 0;
  for (const auto& rec : rig.log.records()) {
    if (rec.cat == Category::kRadio && rec.node == 3) {
      CHECK(rec.text("outcome") == "crc_fail");
      CHECK(rec.text("collided") == "true");
      ++crc_fail;
    }
  }
  CHECK(crc_fail == 2);
  // Whatever bytes reached the MAC are corrupted and fail its CRC check.
  for (const auto& bytes : rig.received[3]) {
    CHECK_FALSE(decode_mac_frame(bytes).has_value());
  }
}

TEST_CASE("tdma slot ownership follows floor(t/slot) mod N") {
  const std::vector<int> schedule = {1, 2, 5, 9};
  CHECK(tdma_owns_slot(schedule, 1, 0, 50));
  CHECK(tdma_owns_slot(schedule, 1, 49, 50));
  CHECK_FALSE(tdma_owns_slot(schedule, 2, 0, 50));
  CHECK(tdma_owns_slot(schedule, 2, 50, 50));
  CHECK(tdma_owns_slot(schedule, 5, 100, 50));
  CHECK(tdma_owns_slot(schedule, 9, 150, 50));
  CHECK(tdma_owns_slot(schedule, 1, 200, 50));  // wraps
  CHECK_FALSE(tdma_owns_slot(schedule, 7, 0, 50));  // not scheduled

  CHECK(tdma_next_owned_slot_start(schedule, 1, 0, 50) == 200);
  CHECK(tdma_next_owned_slot_start(schedule, 2, 0, 50) == 50);
  CHECK(tdma_next_owned_slot_start(schedule, 2, 60, 50) == 250);
}

TEST_CASE("seeded two-node csma contention resolves without collision") {
  PhyRig rig;
  rig.add(1, 0.0);
  rig.add(2, 10.0);
  rig.add(3, 5.0);

  MacConfig m1;
  m1.mode = MacMode::kCsma;
  m1.node_id = 1;
  MacConfig m2 = m1;
  m2.node_id = 2;
  Mac mac1(rig.sched, rig.log, rig.channel, rig.rngs.at(1), m1);
  Mac mac2(rig.sched, rig.log, rig.channel, rig.rngs.at(2), m2);

  // A third node occupies the channel; both 1 and 2 queue a frame meanwhile
  // and must back off to differing slots afterwards.
  MacConfig m3;
  m3.mode = MacMode::kAloha;
  m3.node_id = 3;
  Mac mac3(rig.sched, rig.log, rig.channel, rig.rngs.at(3), m3);
  mac3.submit(std::vector<std::uint8_t>(200, 0x33), 255);  // ~7 ms of airtime

  rig.sched.run_until_ms(2);
  mac1.submit(std::vector<std::uint8_t>(50, 0x11), 255);
  mac2.submit(std::vector<std::uint8_t>(50, 0x22), 255);
  rig.sched.run_until_ms(200);

  CHECK(mac1.frames_sent() == 1);
  CHECK(mac2.frames_sent() == 1);
  CHECK(rig.channel.collisions() == 0);
  // The listener at node 3 decodes both frames cleanly.
  int ok = 0;
  for (const auto& bytes : rig.received[3]) {
    if (decode_mac_frame(bytes)) ++ok;
  }
  CHECK(ok == 2);
}

TEST_CASE("csma transmits immediately on an idle channel") {
  PhyRig rig;
  rig.add(1, 0.0);
  rig.add(2, 10.0);
  MacConfig cfg;
  cfg.mode = MacMode::kCsma;
  cfg.node_id = 1;
  Mac mac(rig.sched, rig.log, rig.channel, rig.rngs.at(1), cfg);
  mac.submit(std::vector<std::uint8_t>(10, 0x01), 2);
  CHECK(rig.channel.transmissions() == 1);
}

TEST_CASE("tdma refuses frames that exceed the slot airtime") {
  PhyRig rig;
  RadioConfig slow;
  slow.bitrate_bps = 10000;  // 50 ms slot carries at most 62 bytes
  rig.add(1, 0.0, slow);
  rig.add(2, 10.0, slow);
  MacConfig cfg;
  cfg.mode = MacMode::kTdma;
  cfg.node_id = 1;
  cfg.tdma_schedule = {1, 2};
  Mac mac(rig.sched, rig.log, rig.channel, rig.rngs.at(1), cfg);
  mac.start();
  mac.submit(std::vector<std::uint8_t>(200, 0x01), 2);
  rig.sched.run_until_ms(500);
  CHECK(mac.oversize_drops() == 1);
  CHECK(mac.frames_sent() == 0);
}

TEST_CASE("adaptive jammer stays silent without cooperative traffic") {
  PhyRig rig;
  rig.add(1, 0.0);
  rig.add(2, 30.0);
  JammerConfig jam;
  jam.position = east_of(kOrigin, 15.0);
  jam.power_dbm = 20.0;
  jam.adaptive = true;
  rig.channel.add_jammer(jam);
  // No cooperative energy: the channel stays sensed-idle everywhere.
  CHECK_FALSE(rig.channel.carrier_busy(1));
  CHECK_FALSE(rig.channel.carrier_busy(2));
}

TEST_CASE("constant jammer next to the receiver collapses delivery") {
  PhyRig rig;
  rig.add(1, 0.0);
  rig.add(2, 100.0);
  JammerConfig jam;
  jam.position = east_of(kOrigin, 99.0);  // 1 m from the receiver
  jam.power_dbm = 20.0;
  rig.channel.add_jammer(jam);

  for (int i = 0; i < 20; ++i) {
    rig.channel.transmit(1, encode_mac_frame(1, 2, static_cast<std::uint32_t>(i),
                                             std::vector<std::uint8_t>(50, 0x55)));
    rig.sched.run_until_ms(rig.sched.now_ms() + 20);
  }
  int delivered = 0;
  for (const auto& rec : rig.log.records()) {
    if (rec.cat == Category::kRadio && rec.node == 2 && rec.text("outcome") == "delivered") {
      ++delivered;
    }
  }
  CHECK(delivered == 0);

  // Identical geometry with the jammer absent delivers everything.
  PhyRig clean;
  clean.add(1, 0.0);
  clean.add(2, 100.0);
  for (int i = 0; i < 20; ++i) {
    clean.channel.transmit(1, encode_mac_frame(1, 2, static_cast<std::uint32_t>(i),
                                               std::vector<std::uint8_t>(50, 0x55)));
    clean.sched.run_until_ms(clean.sched.now_ms() + 20);
  }
  int clean_delivered = 0;
  for (const auto& rec : clean.log.records()) {
    if (rec.cat == Category::kRadio && rec.node == 2 && rec.text("outcome") == "delivered") {
      ++clean_delivered;
    }
  }
  CHECK(clean_delivered == 20);
}

TEST_CASE("duty-cycled jammer only disturbs frames overlapping its on-window") {
  PhyRig rig;
  rig.add(1, 0.0);
  rig.add(2, 100.0);
  JammerConfig jam;
  jam.position = east_of(kOrigin, 99.0);
  jam.power_dbm = 20.0;
  jam.duty_cycle = 0.5;  // on for [0,50) of every 100 ms
  jam.period_ms = 100;
  rig.channel.add_jammer(jam);

  auto frame = [](int i) {
    return encode_mac_frame(1, 2, static_cast<std::uint32_t>(i),
                            std::vector<std::uint8_t>(50, 0x66));
  };
  // 66-byte frame = 528 bits = 2.112 ms -> 3 ms airtime.
  rig.sched.run_until_ms(60);  // inside the off-window
  rig.channel.transmit(1, frame(0));
  rig.sched.run_until_ms(110);  // inside the on-window
  rig.channel.transmit(1, frame(1));
  rig.sched.run_until_ms(300);

  std::vector<std::string> outcomes;
  for (const auto& rec : rig.log.records()) {
    if (rec.cat == Category::kRadio && rec.node == 2) outcomes.push_back(rec.text("outcome"));
  }
  REQUIRE(outcomes.size() == 2);
  CHECK(outcomes[0] == "delivered");
  CHECK(outcomes[1] != "delivered");
}

TEST_CASE("adaptive jammer reacts to sensed cooperative energy") {
  PhyRig rig;
  rig.add(1, 0.0);
  rig.add(2, 100.0);
  JammerConfig jam;
  jam.position = east_of(kOrigin, 99.0);
  jam.power_dbm = 20.0;
  jam.adaptive = true;
  rig.channel.add_jammer(jam);

  // The transmission itself triggers the jammer, which then swamps it.
  rig.channel.transmit(1, encode_mac_frame(1, 2, 0, std::vector<std::uint8_t>(50, 0x77)));
  rig.sched.run_until_ms(100);
  bool delivered = false;
  for (const auto& rec : rig.log.records()) {
    if (rec.cat == Category::kRadio && rec.node == 2 && rec.text("outcome") == "delivered") {
      delivered = true;
    }
  }
  CHECK_FALSE(delivered);
}

TEST_CASE("rssi equals tx power minus reference loss plus gain at 1 m") {
  PhyRig rig;
  RadioConfig radio;
  radio.tx_power_dbm = 10.0;
  radio.rx_gain_db = 3.0;
  rig.add(1, 0.0, radio);
  rig.add(2, 1.0, radio);
  rig.channel.transmit(1, encode_mac_frame(1, 2, 0, std::vector<std::uint8_t>(10, 0x01)));
  rig.sched.run_until_ms(50);
  bool checked = false;
  for (const auto& rec : rig.log.records()) {
    if (rec.cat == Category::kRadio && rec.node == 2) {
      CHECK(rec.num("rssi") == doctest::Approx(10.0 - rig.params.pl0_db + 3.0).epsilon(1e-6));
      checked = true;
    }
  }
  CHECK(checked);
}
