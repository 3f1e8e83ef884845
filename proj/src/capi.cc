// Copyright 2026 The bidlearn Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "bidlearn/bidlearn.h"

#include <exception>
#include <fstream>
#include <iostream>
#include <memory>
#include <new>
#include <sstream>
#include <string>
#include <vector>

#include "bidlearn/commands.h"
#include "bidlearn/config.h"
#include "bidlearn/env.h"
#include "bidlearn/equilibrium.h"
#include "bidlearn/error.h"
#include "bidlearn/version.h"

struct bl_config {
  std::vector<bidlearn::ConfigEntry> entries;
  bidlearn::RunConfig config;
  std::string scratch;
};

struct bl_report {
  bidlearn::CommandReport report;
};

namespace {

thread_local std::string last_error;

bl_status Fail(bl_status status, const std::string& message) {
  last_error = message;
  return status;
}

bl_status StatusOf(bidlearn::ErrorKind kind) {
  switch (kind) {
    case bidlearn::ErrorKind::kConfig:
      return BL_ERR_CONFIG;
    case bidlearn::ErrorKind::kValidation:
      return BL_ERR_INVALID_ARGUMENT;
    case bidlearn::ErrorKind::kNumeric:
      return BL_ERR_NUMERIC;
    case bidlearn::ErrorKind::kState:
      return BL_ERR_STATE;
    case bidlearn::ErrorKind::kIo:
      return BL_ERR_IO;
    case bidlearn::ErrorKind::kResource:
      return BL_ERR_RESOURCE;
  }
  return BL_ERR_INTERNAL;
}

// Runs `fn`, mapping exceptions onto status codes.
template <typename Fn>
bl_status Guard(Fn fn) {
  try {
    return fn();
  } catch (const bidlearn::Error& e) {
    return Fail(StatusOf(e.kind()), e.what());
  } catch (const std::bad_alloc&) {
    return Fail(BL_ERR_RESOURCE, "out of memory");
  } catch (const std::exception& e) {
    return Fail(BL_ERR_INTERNAL, e.what());
  } catch (...) {
    return Fail(BL_ERR_INTERNAL, "unknown error");
  }
}

// Rebuilds the config with `added` appended. The handle is unchanged if the
// result does not validate.
bl_status Apply(bl_config* config, std::vector<bidlearn::ConfigEntry> added) {
  std::vector<bidlearn::ConfigEntry> entries = config->entries;
  entries.insert(entries.end(), added.begin(), added.end());
  config->config = bidlearn::BuildConfig(entries);
  config->entries = std::move(entries);
  return BL_OK;
}

}  // namespace

extern "C" {

const char* bl_version(void) { return bidlearn::kVersionString; }

const char* bl_last_error(void) { return last_error.c_str(); }

const char* bl_status_name(bl_status status) {
  switch (status) {
    case BL_OK:
      return "ok";
    case BL_ERR_INVALID_ARGUMENT:
      return "invalid argument";
    case BL_ERR_CONFIG:
      return "config error";
    case BL_ERR_NUMERIC:
      return "numeric failure";
    case BL_ERR_IO:
      return "i/o error";
    case BL_ERR_STATE:
      return "state error";
    case BL_ERR_RESOURCE:
      return "resource limit";
    case BL_ERR_INTERNAL:
      return "internal error";
  }
  return "unknown status";
}

bl_status bl_config_create(bl_config** out) {
  if (out == nullptr) return Fail(BL_ERR_INVALID_ARGUMENT, "out is null");
  return Guard([&] {
    auto config = std::make_unique<bl_config>();
    config->config = bidlearn::BuildConfig({});
    *out = config.release();
    return BL_OK;
  });
}

void bl_config_destroy(bl_config* config) { delete config; }

bl_status bl_config_load_file(bl_config* config, const char* path) {
  if (config == nullptr || path == nullptr) {
    return Fail(BL_ERR_INVALID_ARGUMENT, "null argument");
  }
  return Guard([&] {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
      throw bidlearn::IoError("cannot read config file '" + std::string(path) +
                              "'");
    }
    std::ostringstream text;
    text << in.rdbuf();
    return Apply(config, bidlearn::ParseEntries(text.str()));
  });
}

bl_status bl_config_parse_text(bl_config* config, const char* text) {
  if (config == nullptr || text == nullptr) {
    return Fail(BL_ERR_INVALID_ARGUMENT, "null argument");
  }
  return Guard([&] { return Apply(config, bidlearn::ParseEntries(text)); });
}

bl_status bl_config_set(bl_config* config, const char* key,
                        const char* value) {
  if (config == nullptr || key == nullptr || value == nullptr) {
    return Fail(BL_ERR_INVALID_ARGUMENT, "null argument");
  }
  return Guard([&] { return Apply(config, {{key, value}}); });
}

bl_status bl_config_get(bl_config* config, const char* key,
                        const char** value) {
  if (config == nullptr || key == nullptr || value == nullptr) {
    return Fail(BL_ERR_INVALID_ARGUMENT, "null argument");
  }
  return Guard([&] {
    config->scratch = bidlearn::GetConfigValue(config->config, key);
    *value = config->scratch.c_str();
    return BL_OK;
  });
}

bl_status bl_config_serialize(bl_config* config, const char** text) {
  if (config == nullptr || text == nullptr) {
    return Fail(BL_ERR_INVALID_ARGUMENT, "null argument");
  }
  return Guard([&] {
    config->scratch = bidlearn::SerializeConfig(config->config);
    *text = config->scratch.c_str();
    return BL_OK;
  });
}

bl_exec_options bl_exec_options_default(void) {
  bl_exec_options options;
  options.workers = 0;
  options.quiet = 0;
  options.max_aborted_fraction = 0.1;
  return options;
}

bl_status bl_execute(const bl_config* config, bl_command command,
                     const bl_exec_options* options, bl_report** report) {
  if (config == nullptr || report == nullptr) {
    return Fail(BL_ERR_INVALID_ARGUMENT, "null argument");
  }
  *report = nullptr;
  const bl_exec_options opts =
      options != nullptr ? *options : bl_exec_options_default();
  if (opts.workers < 0) {
    return Fail(BL_ERR_INVALID_ARGUMENT, "workers must be >= 0");
  }
  bidlearn::Command cmd;
  switch (command) {
    case BL_CMD_RUN:
      cmd = bidlearn::Command::kRun;
      break;
    case BL_CMD_SWEEP_LR:
      cmd = bidlearn::Command::kSweepLr;
      break;
    case BL_CMD_STUDY_NORM:
      cmd = bidlearn::Command::kStudyNorm;
      break;
    case BL_CMD_SWEEP_BUFFER:
      cmd = bidlearn::Command::kSweepBuffer;
      break;
    case BL_CMD_ORACLE:
      cmd = bidlearn::Command::kOracle;
      break;
    default:
      return Fail(BL_ERR_INVALID_ARGUMENT, "unknown command");
  }
  return Guard([&] {
    bidlearn::ExecOptions exec;
    exec.workers = opts.workers;
    exec.max_aborted_fraction = opts.max_aborted_fraction;
    exec.progress = opts.quiet ? nullptr : &std::cerr;
    auto out = std::make_unique<bl_report>();
    out->report = bidlearn::ExecuteCommand(cmd, config->config, exec);
    const bool exceeded = out->report.threshold_exceeded;
    const std::string message =
        std::to_string(out->report.aborted) + " of " +
        std::to_string(out->report.runs) +
        " runs aborted on numeric failure, above the allowed fraction";
    *report = out.release();
    return exceeded ? Fail(BL_ERR_NUMERIC, message) : BL_OK;
  });
}

void bl_report_destroy(bl_report* report) { delete report; }

int bl_report_run_count(const bl_report* report) {
  return report != nullptr ? report->report.runs : 0;
}

int bl_report_aborted_count(const bl_report* report) {
  return report != nullptr ? report->report.aborted : 0;
}

const char* bl_report_summary(const bl_report* report) {
  return report != nullptr ? report->report.summary.c_str() : "";
}

size_t bl_report_file_count(const bl_report* report) {
  return report != nullptr ? report->report.files.size() : 0;
}

const char* bl_report_file(const bl_report* report, size_t index) {
  if (report == nullptr || index >= report->report.files.size()) {
    return nullptr;
  }
  return report->report.files[index].c_str();
}

bl_status bl_clear_auction(const bl_config* config, const double offers[2],
                           double* clearing_price, double quantities[2],
                           double profits[2]) {
  if (config == nullptr || offers == nullptr || clearing_price == nullptr ||
      quantities == nullptr || profits == nullptr) {
    return Fail(BL_ERR_INVALID_ARGUMENT, "null argument");
  }
  return Guard([&] {
    const bidlearn::ClearingResult r =
        bidlearn::ClearAuction(config->config.auction, {offers[0], offers[1]});
    *clearing_price = r.clearing_price;
    for (int i = 0; i < 2; ++i) {
      quantities[i] = r.quantities[i];
      profits[i] = r.profits[i];
    }
    return BL_OK;
  });
}

bl_status bl_ne_threshold(const bl_config* config, double* low_threshold,
                          double* high_price, int* regime) {
  if (config == nullptr || low_threshold == nullptr || high_price == nullptr ||
      regime == nullptr) {
    return Fail(BL_ERR_INVALID_ARGUMENT, "null argument");
  }
  return Guard([&] {
    const bidlearn::EquilibriumSpec spec =
        bidlearn::NeThreshold(config->config.auction);
    *low_threshold = spec.low_threshold;
    *high_price = spec.high_price;
    *regime = static_cast<int>(spec.regime);
    return BL_OK;
  });
}

}  // extern "C"
