// Operator entry point. Links only the C API.
//
// Exit codes: 0 success, 2 input error (validation, bad log, bad flags),
// 3 runtime abort.
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "aeronet.h"

namespace {

int fail_input(const std::string& context) {
  std::fprintf(stderr, "%s\n%s\n", context.c_str(), aeronet_last_error());
  return 2;
}

int fail_runtime(const std::string& context) {
  std::fprintf(stderr, "%s\n%s\n", context.c_str(), aeronet_last_error());
  return 3;
}

bool write_file(const std::string& path, const char* text) {
  std::FILE* f = std::fopen(path.c_str(), "wb");
  if (!f) return false;
  const bool ok = std::fputs(text, f) >= 0;
  return std::fclose(f) == 0 && ok;
}

int run_one(const std::string& scenario_path, const std::uint64_t* seed,
            const std::string& out_dir, bool quiet) {
  aeronet_scenario* scenario = nullptr;
  aeronet_status status = aeronet_scenario_load(scenario_path.c_str(), &scenario);
  if (status == AERONET_EINVAL) return fail_input("scenario validation failed:");
  if (status != AERONET_OK) return fail_input("cannot load scenario:");

  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);

  const std::string events_path = out_dir + "/events.log";
  const std::string metrics_path = out_dir + "/metrics.json";

  aeronet_report* report = nullptr;
  status = aeronet_run(scenario, seed, events_path.c_str(), &report);
  if (status != AERONET_OK) {
    aeronet_scenario_free(scenario);
    return status == AERONET_EIO ? fail_input("cannot write outputs:")
                                 : fail_runtime("run aborted:");
  }

  char* metrics_text = nullptr;
  aeronet_report_render(report, &metrics_text);
  if (!metrics_text || !write_file(metrics_path, metrics_text)) {
    aeronet_string_free(metrics_text);
    aeronet_report_free(report);
    aeronet_scenario_free(scenario);
    std::fprintf(stderr, "cannot write %s\n", metrics_path.c_str());
    return 2;
  }
  aeronet_string_free(metrics_text);

  if (!quiet) {
    char* summary = nullptr;
    aeronet_report_summary(report, &summary);
    if (summary) {
      std::fputs(summary, stdout);
      aeronet_string_free(summary);
    }
    std::printf("events:    %s\nmetrics:   %s\n", events_path.c_str(), metrics_path.c_str());
  }

  aeronet_report_free(report);
  aeronet_scenario_free(scenario);
  return 0;
}

void print_line(void* user, const char* line) {
  (void)user;
  std::puts(line);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"aeronet - deterministic airborne networking emulator"};
  app.require_subcommand(1);

  // run
  std::string run_scenario_path;
  std::string out_dir = ".";
  std::uint64_t seed_value = 0;
  int runs = 1;
  auto* cmd_run = app.add_subcommand("run", "run a scenario and write events.log + metrics.json");
  cmd_run->add_option("scenario", run_scenario_path, "scenario file")->required();
  auto* seed_opt = cmd_run->add_option("--seed", seed_value, "override the scenario seed");
  cmd_run->add_option("--out", out_dir, "output directory (default .)");
  cmd_run->add_option("--runs", runs, "repeat with seed, seed+1, ... into <out>/run-<k>")
      ->check(CLI::PositiveNumber);

  // validate
  std::string validate_path;
  auto* cmd_validate = app.add_subcommand("validate", "validate a scenario file");
  cmd_validate->add_option("scenario", validate_path, "scenario file")->required();

  // metrics
  std::string metrics_log_path;
  auto* cmd_metrics = app.add_subcommand("metrics", "recompute metrics from an events log");
  cmd_metrics->add_option("events", metrics_log_path, "events.log file")->required();

  // replay
  std::string replay_log_path;
  std::string filter;
  auto* cmd_replay = app.add_subcommand("replay", "print log records as text");
  cmd_replay->add_option("events", replay_log_path, "events.log file")->required();
  cmd_replay->add_option("--filter", filter,
                         "category: gps|mavlink|packet|radio|mode|mission|error");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  if (cmd_run->parsed()) {
    const bool have_seed = seed_opt->count() > 0;
    if (runs == 1) {
      return run_one(run_scenario_path, have_seed ? &seed_value : nullptr, out_dir, false);
    }
    // Batch sweeps: seed, seed+1, ... (scenario seed when no --seed given).
    std::uint64_t base = seed_value;
    if (!have_seed) {
      aeronet_scenario* scenario = nullptr;
      if (aeronet_scenario_load(run_scenario_path.c_str(), &scenario) != AERONET_OK) {
        return fail_input("cannot load scenario:");
      }
      base = aeronet_scenario_seed(scenario);
      aeronet_scenario_free(scenario);
    }
    for (int k = 0; k < runs; ++k) {
      const std::string dir = out_dir + "/run-" + std::to_string(k);
      const std::uint64_t seed_k = base + static_cast<std::uint64_t>(k);
      std::printf("run %d (seed %llu) -> %s\n", k, static_cast<unsigned long long>(seed_k),
                  dir.c_str());
      const int rc = run_one(run_scenario_path, &seed_k, dir, true);
      if (rc != 0) return rc;
    }
    return 0;
  }

  if (cmd_validate->parsed()) {
    aeronet_scenario* scenario = nullptr;
    const aeronet_status status = aeronet_scenario_load(validate_path.c_str(), &scenario);
    if (status == AERONET_OK) {
      std::printf("valid: %s\n", aeronet_scenario_name(scenario));
      aeronet_scenario_free(scenario);
      return 0;
    }
    return fail_input("invalid scenario:");
  }

  if (cmd_metrics->parsed()) {
    aeronet_report* report = nullptr;
    if (aeronet_report_from_log(metrics_log_path.c_str(), &report) != AERONET_OK) {
      return fail_input("cannot compute metrics:");
    }
    char* text = nullptr;
    aeronet_report_render(report, &text);
    if (text) {
      std::fputs(text, stdout);
      aeronet_string_free(text);
    }
    aeronet_report_free(report);
    return 0;
  }

  if (cmd_replay->parsed()) {
    const aeronet_status status = aeronet_replay(
        replay_log_path.c_str(), filter.empty() ? nullptr : filter.c_str(), print_line, nullptr);
    if (status != AERONET_OK) return fail_input("replay failed:");
    return 0;
  }

  return 2;
}
