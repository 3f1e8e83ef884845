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

#ifndef BIDLEARN_COMMANDS_H_
#define BIDLEARN_COMMANDS_H_

// Subcommand drivers: run a study from a RunConfig and write its artifacts
// and manifest into config.output_dir.

#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "bidlearn/config.h"

namespace bidlearn {

enum class Command { kRun, kSweepLr, kStudyNorm, kSweepBuffer, kOracle };

std::string_view ToString(Command command);
std::optional<Command> ParseCommand(std::string_view name);

struct ExecOptions {
  int workers = 0;  // 0 = hardware concurrency
  // Exceeding this fraction of aborted runs sets threshold_exceeded.
  double max_aborted_fraction = 0.1;
  std::ostream* progress = nullptr;  // per-run progress lines, if set
};

struct CommandReport {
  int runs = 0;
  int aborted = 0;
  bool threshold_exceeded = false;
  double wall_seconds = 0.0;
  std::string summary;  // human-readable result text
  std::vector<std::string> files;
};

// Throws ConfigError, IoError or ValidationError; numeric failures inside
// runs are counted, not thrown.
CommandReport ExecuteCommand(Command command, const RunConfig& config,
                             const ExecOptions& options);

}  // namespace bidlearn

#endif  // BIDLEARN_COMMANDS_H_
