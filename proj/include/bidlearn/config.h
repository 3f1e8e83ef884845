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

#ifndef BIDLEARN_CONFIG_H_
#define BIDLEARN_CONFIG_H_

// Run configuration: a flat `key = value` text format with dotted keys.
// The schema is documented in docs/config.md.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "bidlearn/agent.h"
#include "bidlearn/env.h"
#include "bidlearn/experiments.h"
#include "bidlearn/nn.h"

namespace bidlearn {

// Value lists for the sweep subcommands. Unset axes use study defaults.
struct SweepAxes {
  int runs_per_cell = 1;
  std::optional<std::vector<double>> lr_actor;
  std::optional<std::vector<double>> lr_critic;
  std::optional<std::vector<nn::Norm>> normalization;
  std::optional<std::vector<MemoryMode>> memory_mode;
  std::optional<std::vector<int>> buffer_capacity;
  std::optional<std::vector<double>> noise_decay;

  bool operator==(const SweepAxes&) const = default;
};

struct RunConfig {
  AuctionConfig auction;
  Hyperparams hyper;
  ClassifyOptions classify;
  SweepAxes sweep;
  std::string output_dir = "bidlearn_out";
  std::uint64_t base_seed = 1;
  bool emit_svg = false;
  int run_count = 1;
  double oracle_grid_step = 1.0;

  // Checks every nested invariant; throws ConfigError.
  void Validate() const;

  bool operator==(const RunConfig&) const = default;
};

using ConfigEntry = std::pair<std::string, std::string>;

// Splits configuration text into entries in file order. Blank lines and
// `#` comments are skipped; anything else must be `key = value`.
std::vector<ConfigEntry> ParseEntries(std::string_view text);

// Splits a `key=value` override.
ConfigEntry ParseOverride(std::string_view text);

// Applies entries on top of the defaults (later entries win) and validates.
// Unless auction.price_floor is given, it is set to -auction.price_cap.
RunConfig BuildConfig(const std::vector<ConfigEntry>& entries);

RunConfig ParseConfig(std::string_view text,
                      const std::vector<std::string>& overrides = {});

// Reads a file; IoError if it cannot be read.
RunConfig LoadConfig(const std::string& path,
                     const std::vector<std::string>& overrides = {});

// Canonical text form; ParseConfig(SerializeConfig(c)) == c.
std::string SerializeConfig(const RunConfig& config);

// Canonical text of a single key; ConfigError for unknown keys.
std::string GetConfigValue(const RunConfig& config, std::string_view key);

// Every accepted key, in schema order.
std::vector<std::string> ConfigKeys();

std::optional<nn::Norm> ParseNorm(std::string_view text);
std::optional<MemoryMode> ParseMemoryMode(std::string_view text);

}  // namespace bidlearn

#endif  // BIDLEARN_CONFIG_H_
