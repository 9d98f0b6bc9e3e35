// extern-C surface over the simulation core.
#include "aeronet.h"

#include <cstring>
#include <fstream>
#include <new>
#include <string>

#include "aeronet/metrics.hpp"
#include "aeronet/scenario.hpp"

#if defined(__GNUC__)
#define AERONET_EXPORT __attribute__((visibility("default")))
#else
#define AERONET_EXPORT
#endif

namespace {

thread_local std::string g_last_error;

void set_error(const std::string& msg) { g_last_error = msg; }

char* dup_string(const std::string& s) {
  char* out = new (std::nothrow) char[s.size() + 1];
  if (!out) return nullptr;
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

}  // namespace

struct aeronet_scenario {
  aeronet::ScenarioSpec spec;
};

struct aeronet_report {
  aeronet::MetricsReport report;
};

extern "C" {

AERONET_EXPORT const char* aeronet_version(void) { return "1.0.0"; }

AERONET_EXPORT const char* aeronet_last_error(void) { return g_last_error.c_str(); }

AERONET_EXPORT void aeronet_string_free(char* s) { delete[] s; }

AERONET_EXPORT aeronet_status aeronet_scenario_load(const char* path, aeronet_scenario** out) {
  if (!path || !out) {
    set_error("null argument");
    return AERONET_EINVAL;
  }
  *out = nullptr;
  try {
    auto* handle = new aeronet_scenario{aeronet::load_scenario_file(path)};
    *out = handle;
    return AERONET_OK;
  } catch (const aeronet::ScenarioValidationError& e) {
    set_error(e.what());
    return AERONET_EINVAL;
  } catch (const std::exception& e) {
    set_error(e.what());
    return AERONET_EIO;
  }
}

AERONET_EXPORT aeronet_status aeronet_scenario_load_json(const char* text,
                                                         aeronet_scenario** out) {
  if (!text || !out) {
    set_error("null argument");
    return AERONET_EINVAL;
  }
  *out = nullptr;
  try {
    auto* handle = new aeronet_scenario{aeronet::load_scenario_json(text)};
    *out = handle;
    return AERONET_OK;
  } catch (const aeronet::ScenarioValidationError& e) {
    set_error(e.what());
    return AERONET_EINVAL;
  } catch (const std::exception& e) {
    set_error(e.what());
    return AERONET_ERUNTIME;
  }
}

AERONET_EXPORT void aeronet_scenario_free(aeronet_scenario* scenario) { delete scenario; }

AERONET_EXPORT uint64_t aeronet_scenario_seed(const aeronet_scenario* scenario) {
  return scenario ? scenario->spec.seed : 0;
}

AERONET_EXPORT const char* aeronet_scenario_name(const aeronet_scenario* scenario) {
  return scenario ? scenario->spec.name.c_str() : "";
}

AERONET_EXPORT aeronet_status aeronet_run(const aeronet_scenario* scenario,
                                          const uint64_t* seed_override,
                                          const char* events_path, aeronet_report** out) {
  if (!scenario || !out) {
    set_error("null argument");
    return AERONET_EINVAL;
  }
  *out = nullptr;
  try {
    std::optional<std::uint64_t> seed;
    if (seed_override) seed = *seed_override;
    aeronet::RunResult result = aeronet::run_scenario(scenario->spec, seed);
    if (events_path) {
      std::ofstream file(events_path, std::ios::binary | std::ios::trunc);
      if (!file) {
        set_error(std::string("cannot write events log: ") + events_path);
        return AERONET_EIO;
      }
      file << result.events_text;
      if (!file.good()) {
        set_error(std::string("failed writing events log: ") + events_path);
        return AERONET_EIO;
      }
    }
    *out = new aeronet_report{std::move(result.report)};
    return AERONET_OK;
  } catch (const std::exception& e) {
    set_error(e.what());
    return AERONET_ERUNTIME;
  }
}

AERONET_EXPORT aeronet_status aeronet_report_from_log(const char* events_path,
                                                      aeronet_report** out) {
  if (!events_path || !out) {
    set_error("null argument");
    return AERONET_EINVAL;
  }
  *out = nullptr;
  try {
    const aeronet::ReplayData data = aeronet::replay_file(events_path);
    *out = new aeronet_report{aeronet::compute_metrics(data)};
    return AERONET_OK;
  } catch (const aeronet::LogParseError& e) {
    set_error(e.what());
    return AERONET_EINVAL;
  } catch (const aeronet::PartialLogError& e) {
    set_error(e.what());
    return AERONET_EINVAL;
  } catch (const std::exception& e) {
    set_error(e.what());
    return AERONET_EIO;
  }
}

AERONET_EXPORT void aeronet_report_free(aeronet_report* report) { delete report; }

AERONET_EXPORT aeronet_status aeronet_report_render(const aeronet_report* report, char** out) {
  if (!report || !out) {
    set_error("null argument");
    return AERONET_EINVAL;
  }
  *out = dup_string(aeronet::render_metrics(report->report));
  return *out ? AERONET_OK : AERONET_ERUNTIME;
}

AERONET_EXPORT aeronet_status aeronet_report_summary(const aeronet_report* report, char** out) {
  if (!report || !out) {
    set_error("null argument");
    return AERONET_EINVAL;
  }
  *out = dup_string(aeronet::render_summary(report->report));
  return *out ? AERONET_OK : AERONET_ERUNTIME;
}

AERONET_EXPORT aeronet_status aeronet_replay(const char* events_path,
                                             const char* category_filter, aeronet_line_cb cb,
                                             void* user) {
  if (!events_path || !cb) {
    set_error("null argument");
    return AERONET_EINVAL;
  }
  std::optional<aeronet::Category> filter;
  if (category_filter) {
    filter = aeronet::category_from_name(category_filter);
    if (!filter) {
      set_error(std::string("unknown category: ") + category_filter);
      return AERONET_EINVAL;
    }
  }
  try {
    const aeronet::ReplayData data = aeronet::replay_file(events_path);
    for (const auto& rec : data.records) {
      if (filter && rec.cat != *filter) continue;
      cb(user, rec.line().c_str());
    }
    return AERONET_OK;
  } catch (const aeronet::LogParseError& e) {
    set_error(e.what());
    return AERONET_EINVAL;
  } catch (const std::exception& e) {
    set_error(e.what());
    return AERONET_EIO;
  }
}

}  // extern "C"
