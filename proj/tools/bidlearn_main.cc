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

// Command-line front end over the C API.
//
// Exit status: 0 success, 1 internal error, 2 usage or configuration error,
// 3 too many runs aborted on numeric failure, 4 I/O error.

#include <cstdio>
#include <cstdlib>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "bidlearn/bidlearn.h"

namespace {

constexpr int kExitInternal = 1;
constexpr int kExitConfig = 2;

int ExitCode(bl_status status) {
  switch (status) {
    case BL_OK:
      return 0;
    case BL_ERR_CONFIG:
    case BL_ERR_INVALID_ARGUMENT:
    case BL_ERR_RESOURCE:
      return kExitConfig;
    case BL_ERR_NUMERIC:
      return 3;
    case BL_ERR_IO:
      return 4;
    default:
      return kExitInternal;
  }
}

int Report(bl_status status) {
  std::fprintf(stderr, "bidlearn: %s: %s\n", bl_status_name(status),
               bl_last_error());
  return ExitCode(status);
}

struct Options {
  std::string config_path;
  std::vector<std::string> overrides;
  std::string output_dir;
  int workers = 0;
  bool quiet = false;
  double max_aborted_fraction = 0.1;
};

// File, then BIDLEARN_OUTPUT_DIR, then --set, then --output-dir.
bl_status BuildConfig(const Options& opts, bl_config** out) {
  bl_config* config = nullptr;
  bl_status status = bl_config_create(&config);
  if (status != BL_OK) return status;
  auto fail = [&](bl_status s) {
    bl_config_destroy(config);
    return s;
  };
  if (!opts.config_path.empty()) {
    status = bl_config_load_file(config, opts.config_path.c_str());
    if (status != BL_OK) return fail(status);
  }
  if (const char* env = std::getenv("BIDLEARN_OUTPUT_DIR");
      env != nullptr && *env != '\0') {
    status = bl_config_set(config, "output_dir", env);
    if (status != BL_OK) return fail(status);
  }
  for (const std::string& o : opts.overrides) {
    status = bl_config_parse_text(config, o.c_str());
    if (status != BL_OK) return fail(status);
  }
  if (!opts.output_dir.empty()) {
    status = bl_config_set(config, "output_dir", opts.output_dir.c_str());
    if (status != BL_OK) return fail(status);
  }
  *out = config;
  return BL_OK;
}

int Execute(const Options& opts, bl_command command) {
  bl_config* config = nullptr;
  bl_status status = BuildConfig(opts, &config);
  if (status != BL_OK) return Report(status);
  bl_exec_options exec = bl_exec_options_default();
  exec.workers = opts.workers;
  exec.quiet = opts.quiet;
  exec.max_aborted_fraction = opts.max_aborted_fraction;
  bl_report* report = nullptr;
  status = bl_execute(config, command, &exec, &report);
  bl_config_destroy(config);
  if (report != nullptr) {
    std::fputs(bl_report_summary(report), stdout);
    if (!opts.quiet) {
      for (size_t i = 0; i < bl_report_file_count(report); ++i) {
        std::fprintf(stderr, "wrote %s\n", bl_report_file(report, i));
      }
    }
    bl_report_destroy(report);
  }
  return status == BL_OK ? 0 : Report(status);
}

int PrintConfig(const Options& opts) {
  bl_config* config = nullptr;
  bl_status status = BuildConfig(opts, &config);
  if (status != BL_OK) return Report(status);
  const char* text = nullptr;
  status = bl_config_serialize(config, &text);
  if (status == BL_OK) std::fputs(text, stdout);
  bl_config_destroy(config);
  return status == BL_OK ? 0 : Report(status);
}

void AddCommonFlags(CLI::App* sub, Options& opts, bool execution) {
  sub->add_option("-c,--config", opts.config_path, "Configuration file")
      ->check(CLI::ExistingFile);
  sub->add_option("-s,--set", opts.overrides,
                  "Override a configuration key (key=value), repeatable");
  if (!execution) return;
  sub->add_option("-o,--output-dir", opts.output_dir,
                  "Output directory (overrides config and "
                  "BIDLEARN_OUTPUT_DIR)");
  sub->add_option("-j,--workers", opts.workers,
                  "Worker threads (0 = available cores)")
      ->check(CLI::NonNegativeNumber);
  sub->add_flag("-q,--quiet", opts.quiet, "Suppress progress output");
  sub->add_option("--max-aborted-fraction", opts.max_aborted_fraction,
                  "Fail with exit 3 above this fraction of aborted runs")
      ->check(CLI::Range(0.0, 1.0));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-seller auction bidding with multi-agent DDPG"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(bl_version()));

  Options opts;
  const std::map<std::string, std::pair<bl_command, std::string>> commands = {
      {"run", {BL_CMD_RUN, "Train run_count independent runs"}},
      {"sweep-lr", {BL_CMD_SWEEP_LR, "Actor/critic learning-rate grid"}},
      {"study-norm",
       {BL_CMD_STUDY_NORM, "Normalization x memory-mode comparison"}},
      {"sweep-buffer",
       {BL_CMD_SWEEP_BUFFER, "Replay buffer x noise decay sweep"}},
      {"oracle", {BL_CMD_ORACLE, "Analytic and grid equilibria"}},
  };
  std::map<CLI::App*, bl_command> lookup;
  for (const auto& [name, entry] : commands) {
    CLI::App* sub = app.add_subcommand(name, entry.second);
    AddCommonFlags(sub, opts, true);
    lookup[sub] = entry.first;
  }
  CLI::App* print = app.add_subcommand(
      "print-config", "Print the effective configuration");
  AddCommonFlags(print, opts, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  if (print->parsed()) return PrintConfig(opts);
  for (const auto& [sub, command] : lookup) {
    if (sub->parsed()) return Execute(opts, command);
  }
  return kExitInternal;
}
