// Cyber and physical mission metrics, computed purely from the event log.
// Recomputing a report from a persisted log reproduces the in-run report
// byte-for-byte.
#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "aeronet/log.hpp"

namespace aeronet {

struct ClassMetrics {
  std::uint64_t offered = 0;
  std::uint64_t delivered = 0;
  std::uint64_t lost = 0;
  double throughput_bps = 0.0;  // delivered payload bits / duration
  double mean_delay_s = 0.0;
  double p95_delay_s = 0.0;
  double loss_ratio = 0.0;
  double deadline_miss_ratio = 0.0;
};

struct TaskMetric {
  int node = 0;
  int index = 0;
  double completed_s = 0.0;
  double deadline_s = 0.0;
  bool met = false;
};

struct TrackSample {
  SimMs t_ms = 0;
  int node = 0;
  std::string lat;  // canonical tokens straight from the log
  std::string lon;
  std::string alt;
};

struct MetricsReport {
  std::string scenario;
  std::uint64_t seed = 0;
  SimMs duration_ms = 0;
  std::map<int, ClassMetrics> classes;  // priority -> metrics
  std::vector<TaskMetric> tasks;
  double mission_completion_s = 0.0;
  std::map<int, double> distance_m;  // node -> odometer total
  std::vector<TrackSample> track;    // 1 Hz position samples
};

// Throws PartialLogError when the log has records but no run terminator.
// A header-only (empty) log yields a zeroed report.
MetricsReport compute_metrics(const ReplayData& data);

// Canonical report document (fixed key order, fixed precision).
std::string render_metrics(const MetricsReport& report);
// One-screen human summary.
std::string render_summary(const MetricsReport& report);

}  // namespace aeronet
