#include "aeronet/sim.hpp"

#include <memory>
#include <string>

namespace aeronet {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace

RngStream::RngStream(std::uint64_t scenario_seed, int node_id) : node_id_(node_id) {
  // Two mixing rounds decorrelate nearby seeds and nearby node ids.
  key_ = mix64(mix64(scenario_seed + kGolden) ^
               (static_cast<std::uint64_t>(node_id) + 1) * kGolden);
}

std::uint64_t RngStream::next_u64() {
  ++draw_count_;
  return mix64(key_ + draw_count_ * kGolden);
}

double RngStream::next_unit() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

std::uint64_t RngStream::next_below(std::uint64_t n) {
  // Rejection-free modulo is fine here: n is tiny (backoff windows) relative
  // to 2^64, so the bias is immeasurable and determinism is what matters.
  return next_u64() % n;
}

TaskToken Scheduler::schedule_at_ms(SimMs t, int owner_node, std::function<void()> fn) {
  if (t < now_ms_) {
    throw PastTimeError("schedule_at: t=" + std::to_string(t) + " is before now=" +
                        std::to_string(now_ms_));
  }
  TaskToken token{next_sequence_, t, owner_node, next_sequence_};
  ++next_sequence_;
  queue_.emplace(Key{t, owner_node, token.sequence}, std::move(fn));
  return token;
}

TaskToken Scheduler::schedule_at_tick(Tick t, int owner_node, std::function<void()> fn) {
  if (t < now_tick()) {
    throw PastTimeError("schedule_at: tick " + std::to_string(t) + " is before tick " +
                        std::to_string(now_tick()));
  }
  SimMs fire = t * kTickMs;
  if (fire < now_ms_) fire = now_ms_;  // already inside tick t
  return schedule_at_ms(fire, owner_node, std::move(fn));
}

TaskToken Scheduler::schedule_in(SimMs delay_ms, int owner_node, std::function<void()> fn) {
  return schedule_at_ms(now_ms_ + delay_ms, owner_node, std::move(fn));
}

void Scheduler::schedule_every(SimMs period_ms, int owner_node, std::function<void()> fn) {
  auto shared = std::make_shared<std::function<void()>>(std::move(fn));
  // Self-rescheduling repeater; runs forever, run_until_ms bounds execution.
  struct Repeater {
    Scheduler* sched;
    SimMs period;
    int owner;
    std::shared_ptr<std::function<void()>> body;
    void operator()() const {
      (*body)();
      sched->schedule_at_ms(sched->now_ms() + period, owner, Repeater{*this});
    }
  };
  schedule_at_ms(now_ms_ + period_ms, owner_node, Repeater{this, period_ms, owner_node, shared});
}

bool Scheduler::cancel(const TaskToken& token) {
  return queue_.erase(Key{token.fire_at_ms, token.owner_node, token.sequence}) > 0;
}

std::uint64_t Scheduler::run_until_ms(SimMs until) {
  if (until < now_ms_) {
    throw PastTimeError("run: until=" + std::to_string(until) + " is before now=" +
                        std::to_string(now_ms_));
  }
  std::uint64_t executed = 0;
  while (!queue_.empty()) {
    auto it = queue_.begin();
    const SimMs fire = std::get<0>(it->first);
    if (fire > until) break;
    auto fn = std::move(it->second);
    queue_.erase(it);
    now_ms_ = fire;
    fn();
    ++executed;
  }
  now_ms_ = until;
  return executed;
}

}  // namespace aeronet
