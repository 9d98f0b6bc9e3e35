// Deterministic simulation clock, task scheduler and per-node random streams.
//
// Time is integer milliseconds of simulated time. The agent-facing tick is
// 10 ms (the tracker period); MAC backoff slots are 1 ms, so the scheduler
// keeps the finer unit and exposes tick helpers on top of it.
#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <tuple>

#include "aeronet/errors.hpp"

namespace aeronet {

using SimMs = std::int64_t;  // simulated milliseconds
using Tick = std::int64_t;   // simulated 10 ms ticks

constexpr SimMs kTickMs = 10;
constexpr int kWorldNode = 0;        // owner id for tasks not tied to a node
constexpr int kBroadcastNodeId = 255;  // reserved dialect constant

// Counter-based random stream: draw i is a pure function of (key, i), so
// streams for distinct (seed, node) pairs never interact and a stream can be
// replayed from its draw count alone.
class RngStream {
 public:
  RngStream() : RngStream(0, 0) {}
  RngStream(std::uint64_t scenario_seed, int node_id);

  std::uint64_t next_u64();
  // Uniform in [0, 1), 53-bit resolution.
  double next_unit();
  // Uniform integer in [0, n); n must be > 0.
  std::uint64_t next_below(std::uint64_t n);

  int node_id() const { return node_id_; }
  std::uint64_t draw_count() const { return draw_count_; }

 private:
  std::uint64_t key_ = 0;
  std::uint64_t draw_count_ = 0;
  int node_id_ = 0;
};

struct TaskToken {
  std::uint64_t id = 0;
  SimMs fire_at_ms = 0;
  int owner_node = 0;
  std::uint64_t sequence = 0;
};

// Single-threaded run-to-completion scheduler. Tasks fire in strict
// (fire_time, owner_node, insertion sequence) order; ties are impossible
// because the insertion sequence is unique.
class Scheduler {
 public:
  SimMs now_ms() const { return now_ms_; }
  Tick now_tick() const { return now_ms_ / kTickMs; }

  // Throws PastTimeError when t < now.
  TaskToken schedule_at_ms(SimMs t, int owner_node, std::function<void()> fn);
  // Fires at the start of tick t, or immediately when already inside it.
  TaskToken schedule_at_tick(Tick t, int owner_node, std::function<void()> fn);
  TaskToken schedule_in(SimMs delay_ms, int owner_node, std::function<void()> fn);
  // First execution at now + period, then every period until the run ends.
  void schedule_every(SimMs period_ms, int owner_node, std::function<void()> fn);

  // Returns true when the task existed and had not fired yet.
  bool cancel(const TaskToken& token);

  // Executes every task with fire time <= until, advances now to until and
  // returns the number of tasks executed.
  std::uint64_t run_until_ms(SimMs until);
  std::uint64_t run_until_tick(Tick t) { return run_until_ms(t * kTickMs); }

  std::size_t pending() const { return queue_.size(); }

 private:
  using Key = std::tuple<SimMs, int, std::uint64_t>;  // (fire, owner, sequence)

  SimMs now_ms_ = 0;
  std::uint64_t next_sequence_ = 1;
  std::map<Key, std::function<void()>> queue_;
};

}  // namespace aeronet
