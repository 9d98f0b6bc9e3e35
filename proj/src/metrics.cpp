#include "aeronet/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "aeronet/network.hpp"

namespace aeronet {

namespace {

struct SendInfo {
  SimMs t_ms = 0;
  std::uint32_t deadline_ms = 0;
  int priority = 0;
  std::int64_t payload_bytes = 0;
};

}  // namespace

MetricsReport compute_metrics(const ReplayData& data) {
  MetricsReport report;
  report.scenario = data.header.scenario;
  report.seed = data.header.seed;
  report.duration_ms = data.header.duration_ms;

  if (data.records.empty()) return report;  // empty log -> zeroed report

  bool terminated = false;
  std::map<std::pair<long long, long long>, SendInfo> sends;  // (source, pid)
  std::map<std::pair<long long, long long>, SimMs> first_delivery;
  std::map<int, std::vector<SimMs>> delays;          // priority -> delivery delays
  std::map<int, std::uint64_t> misses;               // priority -> deadline misses
  std::map<int, std::int64_t> delivered_bytes;       // priority -> payload bytes

  for (const auto& rec : data.records) {
    switch (rec.cat) {
      case Category::kPacket: {
        const std::string ev = rec.text("ev");
        const auto key = std::make_pair(rec.integer("src"), rec.integer("pid"));
        if (ev == "send") {
          SendInfo info;
          info.t_ms = rec.t_ms;
          info.deadline_ms = static_cast<std::uint32_t>(rec.integer("deadline_ms"));
          info.priority = static_cast<int>(rec.integer("prio"));
          info.payload_bytes = rec.integer("size") - static_cast<std::int64_t>(kPduHeaderSize);
          sends[key] = info;
          auto& cls = report.classes[info.priority];
          ++cls.offered;
        } else if (ev == "deliver") {
          auto send_it = sends.find(key);
          if (send_it == sends.end()) break;           // delivery without a send
          if (first_delivery.count(key)) break;        // broadcast copies count once
          first_delivery[key] = rec.t_ms;
          const SendInfo& info = send_it->second;
          auto& cls = report.classes[info.priority];
          ++cls.delivered;
          delivered_bytes[info.priority] += info.payload_bytes;
          const SimMs delay = rec.t_ms - info.t_ms;
          delays[info.priority].push_back(delay);
          if (delay > static_cast<SimMs>(info.deadline_ms)) ++misses[info.priority];
        }
        break;
      }
      case Category::kMission: {
        const std::string ev = rec.text("ev");
        if (ev == "task_complete") {
          TaskMetric task;
          task.node = rec.node;
          task.index = static_cast<int>(rec.integer("idx"));
          task.completed_s = static_cast<double>(rec.t_ms) / 1000.0;
          task.deadline_s = rec.num("deadline_s");
          task.met = rec.text("met") == "true";
          report.tasks.push_back(task);
        } else if (ev == "plan_complete" || ev == "plan_abort") {
          report.mission_completion_s =
              std::max(report.mission_completion_s, static_cast<double>(rec.t_ms) / 1000.0);
        } else if (ev == "run_end") {
          terminated = true;
        }
        break;
      }
      case Category::kMode: {
        if (rec.text("ev") == "mode" && rec.text("mode") == "disarmed") {
          report.mission_completion_s =
              std::max(report.mission_completion_s, static_cast<double>(rec.t_ms) / 1000.0);
        }
        break;
      }
      case Category::kGps: {
        TrackSample sample;
        sample.t_ms = rec.t_ms;
        sample.node = rec.node;
        if (const auto* lat = rec.find("lat")) sample.lat = *lat;
        if (const auto* lon = rec.find("lon")) sample.lon = *lon;
        if (const auto* alt = rec.find("alt")) sample.alt = *alt;
        report.track.push_back(sample);
        report.distance_m[rec.node] = rec.num("odo");
        break;
      }
      default:
        break;
    }
  }

  if (!terminated) {
    throw PartialLogError("log has records but no run_end terminator");
  }

  const double duration_s = static_cast<double>(report.duration_ms) / 1000.0;
  for (auto& [priority, cls] : report.classes) {
    cls.lost = cls.offered - cls.delivered;
    if (cls.offered > 0) {
      cls.loss_ratio = static_cast<double>(cls.lost) / static_cast<double>(cls.offered);
    }
    if (duration_s > 0) {
      cls.throughput_bps =
          static_cast<double>(delivered_bytes[priority]) * 8.0 / duration_s;
    }
    auto& d = delays[priority];
    if (!d.empty()) {
      std::int64_t sum = 0;
      for (SimMs v : d) sum += v;
      cls.mean_delay_s = static_cast<double>(sum) / static_cast<double>(d.size()) / 1000.0;
      std::sort(d.begin(), d.end());
      const std::size_t idx = (d.size() * 95 + 99) / 100;  // ceil(0.95 n)
      cls.p95_delay_s = static_cast<double>(d[idx - 1]) / 1000.0;
      cls.deadline_miss_ratio =
          static_cast<double>(misses[priority]) / static_cast<double>(cls.delivered);
    }
  }
  return report;
}

std::string render_metrics(const MetricsReport& report) {
  std::string out = "{\n";
  out += "  \"schema\": 1,\n";
  out += "  \"scenario\": \"" + json_escape(report.scenario) + "\",\n";
  out += "  \"seed\": " + std::to_string(report.seed) + ",\n";
  out += "  \"duration_s\": " + format_ms_as_seconds(report.duration_ms) + ",\n";

  out += "  \"classes\": {";
  bool first = true;
  for (const auto& [priority, cls] : report.classes) {
    out += first ? "\n" : ",\n";
    first = false;
    out += "    \"" + std::to_string(priority) + "\": {";
    out += "\"offered\": " + std::to_string(cls.offered);
    out += ", \"delivered\": " + std::to_string(cls.delivered);
    out += ", \"lost\": " + std::to_string(cls.lost);
    out += ", \"loss_ratio\": " + format_fixed(cls.loss_ratio, 6);
    out += ", \"deadline_miss_ratio\": " + format_fixed(cls.deadline_miss_ratio, 6);
    out += ", \"throughput_bps\": " + format_fixed(cls.throughput_bps, 3);
    out += ", \"mean_delay_s\": " + format_fixed(cls.mean_delay_s, 6);
    out += ", \"p95_delay_s\": " + format_fixed(cls.p95_delay_s, 6);
    out += "}";
  }
  out += first ? "},\n" : "\n  },\n";

  out += "  \"tasks\": [";
  first = true;
  for (const auto& task : report.tasks) {
    out += first ? "\n" : ",\n";
    first = false;
    out += "    {\"node\": " + std::to_string(task.node);
    out += ", \"idx\": " + std::to_string(task.index);
    out += ", \"completed_s\": " + format_fixed(task.completed_s, 3);
    out += ", \"deadline_s\": " + format_fixed(task.deadline_s, 3);
    out += std::string(", \"met\": ") + (task.met ? "true" : "false");
    out += "}";
  }
  out += first ? "],\n" : "\n  ],\n";

  out += "  \"mission_completion_s\": " + format_fixed(report.mission_completion_s, 3) + ",\n";

  out += "  \"distance_m\": {";
  first = true;
  for (const auto& [node, dist] : report.distance_m) {
    out += first ? "\n" : ",\n";
    first = false;
    out += "    \"" + std::to_string(node) + "\": " + format_fixed(dist, 3);
  }
  out += first ? "},\n" : "\n  },\n";

  out += "  \"track\": [";
  first = true;
  for (const auto& s : report.track) {
    out += first ? "\n" : ",\n";
    first = false;
    out += "    {\"t\": " + format_ms_as_seconds(s.t_ms);
    out += ", \"node\": " + std::to_string(s.node);
    out += ", \"lat\": " + (s.lat.empty() ? "0" : s.lat);
    out += ", \"lon\": " + (s.lon.empty() ? "0" : s.lon);
    out += ", \"alt\": " + (s.alt.empty() ? "0" : s.alt);
    out += "}";
  }
  out += first ? "]\n" : "\n  ]\n";
  out += "}\n";
  return out;
}

std::string render_summary(const MetricsReport& report) {
  std::ostringstream out;
  out << "scenario:  " << report.scenario << "\n";
  out << "seed:      " << report.seed << "\n";
  out << "duration:  " << format_ms_as_seconds(report.duration_ms) << " s\n";
  for (const auto& [priority, cls] : report.classes) {
    out << "class " << priority << ":   offered " << cls.offered << ", delivered "
        << cls.delivered << ", lost " << cls.lost << " (loss "
        << format_fixed(cls.loss_ratio * 100.0, 2) << "%)\n";
    out << "           throughput " << format_fixed(cls.throughput_bps, 1)
        << " bit/s, mean delay " << format_fixed(cls.mean_delay_s, 3) << " s, p95 "
        << format_fixed(cls.p95_delay_s, 3) << " s, deadline misses "
        << format_fixed(cls.deadline_miss_ratio * 100.0, 2) << "%\n";
  }
  out << "tasks:     " << report.tasks.size() << " completed";
  std::size_t met = 0;
  for (const auto& t : report.tasks) met += t.met ? 1 : 0;
  out << " (" << met << " on deadline)\n";
  out << "mission:   completed at " << format_fixed(report.mission_completion_s, 3) << " s\n";
  for (const auto& [node, dist] : report.distance_m) {
    out << "node " << node << ":    " << format_fixed(dist, 1) << " m traveled\n";
  }
  return out.str();
}

}  // namespace aeronet
