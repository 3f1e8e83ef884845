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

#include "bidlearn/config.h"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>

#include "bidlearn/error.h"
#include "text_util.h"

namespace bidlearn {
namespace {

using internal::FormatDouble;
using internal::Split;
using internal::Trim;

[[noreturn]] void Bad(std::string_view key, const std::string& why) {
  throw ConfigError(std::string(key) + ": " + why);
}

double ToDouble(std::string_view key, std::string_view text) {
  double value = 0.0;
  const char* end = text.data() + text.size();
  const auto res = std::from_chars(text.data(), end, value);
  if (text.empty() || res.ec != std::errc() || res.ptr != end ||
      !std::isfinite(value)) {
    Bad(key, "expected a finite number, got '" + std::string(text) + "'");
  }
  return value;
}

template <typename Int>
Int ToInt(std::string_view key, std::string_view text) {
  Int value = 0;
  const char* end = text.data() + text.size();
  const auto res = std::from_chars(text.data(), end, value);
  if (text.empty() || res.ec != std::errc() || res.ptr != end) {
    Bad(key, "expected an integer, got '" + std::string(text) + "'");
  }
  return value;
}

bool ToBool(std::string_view key, std::string_view text) {
  if (text == "true" || text == "1") return true;
  if (text == "false" || text == "0") return false;
  Bad(key, "expected true or false, got '" + std::string(text) + "'");
}

nn::Norm ToNorm(std::string_view key, std::string_view text) {
  if (auto norm = ParseNorm(text)) return *norm;
  Bad(key, "expected none, layer or batch, got '" + std::string(text) + "'");
}

MemoryMode ToMemory(std::string_view key, std::string_view text) {
  if (auto mode = ParseMemoryMode(text)) return *mode;
  Bad(key, "expected memoryless or last_actions, got '" + std::string(text) +
               "'");
}

template <typename T, typename Fn>
std::vector<T> ToList(std::string_view key, std::string_view text, Fn parse) {
  std::vector<T> out;
  for (std::string_view item : Split(text, ',')) out.push_back(parse(key, item));
  return out;
}

template <typename T, typename Fn>
std::string JoinList(const std::vector<T>& values, Fn format) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i > 0) out += ", ";
    out += format(values[i]);
  }
  return out;
}

std::string FormatNorm(nn::Norm norm) { return std::string(nn::ToString(norm)); }
std::string FormatMemory(MemoryMode mode) { return std::string(ToString(mode)); }
std::string FormatInt(long long v) { return std::to_string(v); }

struct KeySpec {
  std::string key;
  std::function<void(RunConfig&, std::string_view)> set;
  // Empty for write-only aliases and for unset optional lists.
  std::function<std::optional<std::string>(const RunConfig&)> get;
};

#define BL_DOUBLE(name, field)                                              \
  KeySpec {                                                                 \
    name, [](RunConfig& c, std::string_view v) { c.field = ToDouble(name, v); }, \
        [](const RunConfig& c) -> std::optional<std::string> {              \
          return FormatDouble(c.field);                                     \
        }                                                                   \
  }
#define BL_INT(name, field)                                                 \
  KeySpec {                                                                 \
    name,                                                                   \
        [](RunConfig& c, std::string_view v) { c.field = ToInt<int>(name, v); }, \
        [](const RunConfig& c) -> std::optional<std::string> {              \
          return FormatInt(c.field);                                        \
        }                                                                   \
  }
#define BL_LIST(name, field, type, parse, format)                           \
  KeySpec {                                                                 \
    name,                                                                   \
        [](RunConfig& c, std::string_view v) {                              \
          c.field = ToList<type>(name, v, parse);                           \
        },                                                                  \
        [](const RunConfig& c) -> std::optional<std::string> {              \
          if (!c.field) return std::nullopt;                                \
          return JoinList(*c.field, format);                                \
        }                                                                   \
  }

const std::vector<KeySpec>& Registry() {
  static const std::vector<KeySpec> registry = {
      {"output_dir",
       [](RunConfig& c, std::string_view v) { c.output_dir = std::string(v); },
       [](const RunConfig& c) -> std::optional<std::string> {
         return c.output_dir;
       }},
      {"base_seed",
       [](RunConfig& c, std::string_view v) {
         c.base_seed = ToInt<std::uint64_t>("base_seed", v);
       },
       [](const RunConfig& c) -> std::optional<std::string> {
         return std::to_string(c.base_seed);
       }},
      {"emit_svg",
       [](RunConfig& c, std::string_view v) {
         c.emit_svg = ToBool("emit_svg", v);
       },
       [](const RunConfig& c) -> std::optional<std::string> {
         return c.emit_svg ? "true" : "false";
       }},
      BL_INT("run_count", run_count),
      BL_DOUBLE("oracle.grid_step", oracle_grid_step),
      BL_DOUBLE("auction.capacity", auction.capacity_per_player),
      BL_DOUBLE("auction.marginal_cost", auction.marginal_cost),
      BL_DOUBLE("auction.price_cap", auction.price_cap),
      BL_DOUBLE("auction.price_floor", auction.price_floor),
      BL_DOUBLE("auction.demand", auction.demand),
      BL_DOUBLE("hyper.lr_actor", hyper.lr_actor),
      BL_DOUBLE("hyper.lr_critic", hyper.lr_critic),
      BL_DOUBLE("hyper.discount", hyper.discount),
      BL_DOUBLE("hyper.soft_update_rate", hyper.soft_update_rate),
      BL_INT("hyper.buffer_capacity", hyper.buffer_capacity),
      BL_INT("hyper.batch_size", hyper.batch_size),
      BL_DOUBLE("hyper.noise_mean", hyper.noise_mean),
      BL_DOUBLE("hyper.noise_std", hyper.noise_std),
      BL_DOUBLE("hyper.noise_regulation", hyper.noise_regulation),
      BL_DOUBLE("hyper.noise_decay", hyper.noise_decay),
      {"hyper.noise_decay_rate",
       [](RunConfig& c, std::string_view v) {
         c.hyper.noise_decay =
             DecayFactorFromRate(ToDouble("hyper.noise_decay_rate", v));
       },
       nullptr},
      BL_DOUBLE("hyper.noise_floor", hyper.noise_floor),
      {"hyper.normalization",
       [](RunConfig& c, std::string_view v) {
         c.hyper.normalization = ToNorm("hyper.normalization", v);
       },
       [](const RunConfig& c) -> std::optional<std::string> {
         return FormatNorm(c.hyper.normalization);
       }},
      {"hyper.memory_mode",
       [](RunConfig& c, std::string_view v) {
         c.hyper.memory_mode = ToMemory("hyper.memory_mode", v);
       },
       [](const RunConfig& c) -> std::optional<std::string> {
         return FormatMemory(c.hyper.memory_mode);
       }},
      BL_INT("hyper.episodes", hyper.episodes),
      BL_INT("hyper.hidden_1", hyper.hidden_1),
      BL_INT("hyper.hidden_2", hyper.hidden_2),
      BL_DOUBLE("classify.tol_cap", classify.tol_cap),
      BL_DOUBLE("classify.tol_cost", classify.tol_cost),
      BL_INT("classify.final_window", classify.final_window),
      BL_INT("classify.sustain_episodes", classify.sustain_episodes),
      BL_DOUBLE("classify.cdf_step", classify.cdf_step),
      BL_INT("classify.switch_window", classify.switch_window),
      BL_INT("classify.late_window", classify.late_window),
      BL_INT("sweep.runs_per_cell", sweep.runs_per_cell),
      BL_LIST("sweep.lr_actor", sweep.lr_actor, double, ToDouble,
              FormatDouble),
      BL_LIST("sweep.lr_critic", sweep.lr_critic, double, ToDouble,
              FormatDouble),
      BL_LIST("sweep.normalization", sweep.normalization, nn::Norm, ToNorm,
              FormatNorm),
      BL_LIST("sweep.memory_mode", sweep.memory_mode, MemoryMode, ToMemory,
              FormatMemory),
      BL_LIST("sweep.buffer_capacity", sweep.buffer_capacity, int, ToInt<int>,
              FormatInt),
      BL_LIST("sweep.noise_decay", sweep.noise_decay, double, ToDouble,
              FormatDouble),
  };
  return registry;
}

#undef BL_DOUBLE
#undef BL_INT
#undef BL_LIST

const KeySpec& Lookup(std::string_view key) {
  for (const KeySpec& spec : Registry()) {
    if (spec.key == key) return spec;
  }
  throw ConfigError("unknown configuration key '" + std::string(key) + "'");
}

template <typename T>
void CheckAxis(const std::optional<std::vector<T>>& axis, const char* key) {
  if (axis && axis->empty()) Bad(key, "value list is empty");
}

}  // namespace

std::optional<nn::Norm> ParseNorm(std::string_view text) {
  if (text == "none") return nn::Norm::kNone;
  if (text == "layer") return nn::Norm::kLayer;
  if (text == "batch") return nn::Norm::kBatch;
  return std::nullopt;
}

std::optional<MemoryMode> ParseMemoryMode(std::string_view text) {
  if (text == "memoryless") return MemoryMode::kMemoryless;
  if (text == "last_actions") return MemoryMode::kLastActions;
  return std::nullopt;
}

void RunConfig::Validate() const {
  auction.Validate();
  hyper.Validate();
  classify.Validate();
  if (output_dir.empty()) Bad("output_dir", "must not be empty");
  if (run_count < 1) Bad("run_count", "must be >= 1");
  if (!(oracle_grid_step > 0.0)) Bad("oracle.grid_step", "must be > 0");
  if (sweep.runs_per_cell < 1) Bad("sweep.runs_per_cell", "must be >= 1");
  CheckAxis(sweep.lr_actor, "sweep.lr_actor");
  CheckAxis(sweep.lr_critic, "sweep.lr_critic");
  CheckAxis(sweep.normalization, "sweep.normalization");
  CheckAxis(sweep.memory_mode, "sweep.memory_mode");
  CheckAxis(sweep.buffer_capacity, "sweep.buffer_capacity");
  CheckAxis(sweep.noise_decay, "sweep.noise_decay");
  // Every swept value must form valid hyperparameters on its own.
  auto check = [&](const auto& axis, auto assign) {
    if (!axis) return;
    for (const auto& value : *axis) {
      Hyperparams h = hyper;
      assign(h, value);
      h.Validate();
    }
  };
  check(sweep.lr_actor, [](Hyperparams& h, double v) { h.lr_actor = v; });
  check(sweep.lr_critic, [](Hyperparams& h, double v) { h.lr_critic = v; });
  check(sweep.buffer_capacity,
        [](Hyperparams& h, int v) { h.buffer_capacity = v; });
  check(sweep.noise_decay, [](Hyperparams& h, double v) { h.noise_decay = v; });
  check(sweep.normalization,
        [](Hyperparams& h, nn::Norm v) { h.normalization = v; });
}

std::vector<ConfigEntry> ParseEntries(std::string_view text) {
  std::vector<ConfigEntry> entries;
  int line_no = 0;
  for (std::string_view line : Split(text, '\n')) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string_view::npos) line = line.substr(0, hash);
    line = Trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("line " + std::to_string(line_no) +
                        ": expected 'key = value', got '" + std::string(line) +
                        "'");
    }
    const std::string_view key = Trim(line.substr(0, eq));
    if (key.empty()) {
      throw ConfigError("line " + std::to_string(line_no) + ": missing key");
    }
    entries.emplace_back(std::string(key),
                         std::string(Trim(line.substr(eq + 1))));
  }
  return entries;
}

ConfigEntry ParseOverride(std::string_view text) {
  const auto eq = text.find('=');
  if (eq == std::string_view::npos || Trim(text.substr(0, eq)).empty()) {
    throw ConfigError("override '" + std::string(text) +
                      "' is not of the form key=value");
  }
  return {std::string(Trim(text.substr(0, eq))),
          std::string(Trim(text.substr(eq + 1)))};
}

RunConfig BuildConfig(const std::vector<ConfigEntry>& entries) {
  RunConfig config;
  bool floor_given = false;
  for (const auto& [key, value] : entries) {
    Lookup(key).set(config, value);
    floor_given |= key == "auction.price_floor";
  }
  if (!floor_given) config.auction.price_floor = -config.auction.price_cap;
  config.Validate();
  return config;
}

RunConfig ParseConfig(std::string_view text,
                      const std::vector<std::string>& overrides) {
  std::vector<ConfigEntry> entries = ParseEntries(text);
  for (const std::string& o : overrides) entries.push_back(ParseOverride(o));
  return BuildConfig(entries);
}

RunConfig LoadConfig(const std::string& path,
                     const std::vector<std::string>& overrides) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read config file '" + path + "'");
  std::ostringstream text;
  text << in.rdbuf();
  if (in.bad()) throw IoError("error reading config file '" + path + "'");
  return ParseConfig(text.str(), overrides);
}

std::string SerializeConfig(const RunConfig& config) {
  std::string out;
  for (const KeySpec& spec : Registry()) {
    if (!spec.get) continue;
    if (const auto value = spec.get(config)) {
      out += spec.key + " = " + *value + "\n";
    }
  }
  return out;
}

std::string GetConfigValue(const RunConfig& config, std::string_view key) {
  const KeySpec& spec = Lookup(key);
  if (!spec.get) {
    Bad(key, "write-only alias; read hyper.noise_decay instead");
  }
  return spec.get(config).value_or("");
}

std::vector<std::string> ConfigKeys() {
  std::vector<std::string> keys;
  for (const KeySpec& spec : Registry()) keys.push_back(spec.key);
  return keys;
}

}  // namespace bidlearn
