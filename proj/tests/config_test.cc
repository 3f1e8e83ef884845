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

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>

#include <gtest/gtest.h>

#include "bidlearn/equilibrium.h"
#include "bidlearn/error.h"

namespace bidlearn {
namespace {

// Random valid configuration; values drawn with awkward decimal expansions
// so the round trip exercises full-precision formatting.
RunConfig RandomConfig(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> coin(0, 1);
  auto pick = [&](int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng); };

  RunConfig c;
  c.output_dir = "out_" + std::to_string(pick(1000));
  c.base_seed = rng() >> 1;
  c.emit_svg = coin(rng);
  c.run_count = 1 + pick(50);
  c.oracle_grid_step = coin(rng) ? 1.0 : 0.5;

  c.auction.capacity_per_player = 1.0 + 99.0 * unit(rng);
  c.auction.price_cap = 10.0 + 990.0 * unit(rng);
  c.auction.price_floor = -c.auction.price_cap * unit(rng);
  c.auction.marginal_cost = c.auction.price_cap * 0.9 * unit(rng);
  c.auction.demand = 0.1 + 200.0 * unit(rng);

  Hyperparams& h = c.hyper;
  h.lr_actor = std::pow(10.0, -6.0 + 4.0 * unit(rng));
  h.lr_critic = std::pow(10.0, -6.0 + 4.0 * unit(rng));
  h.discount = 0.999 * unit(rng);
  h.soft_update_rate = 1e-4 + (1.0 - 1e-4) * unit(rng);
  h.buffer_capacity = 2 + pick(100000);
  h.batch_size = 2 + pick(h.buffer_capacity - 1);
  h.noise_mean = unit(rng) - 0.5;
  h.noise_std = unit(rng);
  h.noise_regulation = 20.0 * unit(rng);
  h.noise_decay = 0.9 + 0.1 * unit(rng);
  h.noise_floor = 0.1 * unit(rng);
  h.normalization = static_cast<nn::Norm>(pick(3));
  h.memory_mode = static_cast<MemoryMode>(pick(2));
  h.episodes = pick(100000);
  h.hidden_1 = 2 + pick(500);
  h.hidden_2 = 2 + pick(500);

  ClassifyOptions& k = c.classify;
  k.tol_cap = 5.0 * unit(rng);
  k.tol_cost = 5.0 * unit(rng);
  k.final_window = 1 + pick(1000);
  k.sustain_episodes = 1 + pick(1000);
  k.cdf_step = 0.1 + unit(rng);
  k.switch_window = 1 + pick(500);
  k.late_window = 1 + pick(5000);

  c.sweep.runs_per_cell = 1 + pick(20);
  if (coin(rng)) {
    c.sweep.lr_actor = std::vector<double>{};
    for (int i = 0, n = 1 + pick(5); i < n; ++i) {
      c.sweep.lr_actor->push_back(std::pow(10.0, -6.0 + 4.0 * unit(rng)));
    }
  }
  if (coin(rng)) c.sweep.lr_critic = std::vector<double>{1e-3, 1e-5};
  if (coin(rng)) {
    c.sweep.normalization = std::vector<nn::Norm>{nn::Norm::kBatch,
                                                  nn::Norm::kNone};
  }
  if (coin(rng)) {
    c.sweep.memory_mode = std::vector<MemoryMode>{MemoryMode::kLastActions};
  }
  if (coin(rng)) {
    c.sweep.buffer_capacity =
        std::vector<int>{h.batch_size, h.batch_size + pick(1000)};
  }
  if (coin(rng)) c.sweep.noise_decay = std::vector<double>{0.9999, unit(rng)};
  if (c.sweep.noise_decay && (*c.sweep.noise_decay)[1] == 0.0) {
    c.sweep.noise_decay.reset();
  }
  return c;
}

TEST(ConfigTest, EmptyTextGivesDefaults) {
  const RunConfig c = ParseConfig("");
  EXPECT_EQ(c.hyper.discount, 0.99);
  EXPECT_EQ(c.hyper.soft_update_rate, 1e-3);
  EXPECT_EQ(c.hyper.buffer_capacity, 50000);
  EXPECT_EQ(c.hyper.batch_size, 128);
  EXPECT_EQ(c.hyper.noise_std, 0.1);
  EXPECT_EQ(c.hyper.noise_regulation, 10.0);
  EXPECT_EQ(c.hyper.lr_actor, 1e-4);
  EXPECT_EQ(c.hyper.lr_critic, 1e-3);
  EXPECT_EQ(c.hyper.episodes, 15000);
  EXPECT_EQ(c.auction.demand, 70.0);
  EXPECT_EQ(c.auction.capacity_per_player, 50.0);
  EXPECT_EQ(c.auction.marginal_cost, 20.0);
  EXPECT_EQ(c.auction.price_cap, 100.0);
  EXPECT_EQ(c.auction.price_floor, -100.0);
  EXPECT_EQ(c, RunConfig{});
}

TEST(ConfigTest, DemandOverrideSwitchesRegime) {
  const RunConfig c = ParseConfig("", {"auction.demand=50"});
  EXPECT_EQ(NeThreshold(c.auction).regime, Regime::kUnconstrained);
}

TEST(ConfigTest, FloorFollowsCapUnlessGiven) {
  EXPECT_EQ(ParseConfig("auction.price_cap = 200").auction.price_floor,
            -200.0);
  EXPECT_EQ(ParseConfig("auction.price_cap = 200\nauction.price_floor = 0")
                .auction.price_floor,
            0.0);
}

TEST(ConfigTest, BatchLargerThanBufferRejected) {
  try {
    ParseConfig("hyper.batch_size = 200\nhyper.buffer_capacity = 100");
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("hyper.batch_size"),
              std::string::npos);
  }
}

TEST(ConfigTest, UnknownKeyNamesKey) {
  try {
    ParseConfig("hyper.learning_rate = 0.1");
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("hyper.learning_rate"),
              std::string::npos);
  }
}

TEST(ConfigTest, MalformedInputRejected) {
  EXPECT_THROW(ParseConfig("just some words"), ConfigError);
  EXPECT_THROW(ParseConfig("= 3"), ConfigError);
  EXPECT_THROW(ParseConfig("hyper.batch_size = many"), ConfigError);
  EXPECT_THROW(ParseConfig("hyper.batch_size = 12.5"), ConfigError);
  EXPECT_THROW(ParseConfig("hyper.normalization = group"), ConfigError);
  EXPECT_THROW(ParseConfig("hyper.discount = 1"), ConfigError);
  EXPECT_THROW(ParseConfig("hyper.lr_actor = nan"), ConfigError);
  EXPECT_THROW(ParseConfig("sweep.lr_actor = "), ConfigError);
  EXPECT_THROW(ParseConfig("emit_svg = maybe"), ConfigError);
  EXPECT_THROW(ParseConfig("", {"no_equals_sign"}), ConfigError);
}

TEST(ConfigTest, CommentsAndWhitespace) {
  const RunConfig c = ParseConfig(
      "# market\n  auction.demand =  60   # constrained\n\n"
      "hyper.normalization=none\nsweep.lr_actor = 1e-4, 5e-3\n");
  EXPECT_EQ(c.auction.demand, 60.0);
  EXPECT_EQ(c.hyper.normalization, nn::Norm::kNone);
  EXPECT_EQ(c.sweep.lr_actor, (std::vector<double>{1e-4, 5e-3}));
}

TEST(ConfigTest, LaterEntriesWin) {
  const RunConfig c =
      ParseConfig("hyper.episodes = 10\nhyper.episodes = 20", {"hyper.episodes=30"});
  EXPECT_EQ(c.hyper.episodes, 30);
}

TEST(ConfigTest, DecayRateAlias) {
  const RunConfig c = ParseConfig("hyper.noise_decay_rate = 0.001");
  EXPECT_DOUBLE_EQ(c.hyper.noise_decay, std::exp(-0.001));
}

TEST(ConfigTest, RoundTripProperty) {
  std::mt19937_64 rng(61);
  for (int trial = 0; trial < 500; ++trial) {
    const RunConfig original = RandomConfig(rng);
    ASSERT_NO_THROW(original.Validate()) << trial;
    const std::string text = SerializeConfig(original);
    const RunConfig parsed = ParseConfig(text);
    ASSERT_EQ(parsed, original) << text;
    EXPECT_EQ(SerializeConfig(parsed), text);
  }
}

TEST(ConfigTest, GetValueForEveryKey) {
  const RunConfig c = ParseConfig("sweep.lr_actor = 0.001, 0.0001");
  for (const std::string& key : ConfigKeys()) {
    if (key == "hyper.noise_decay_rate") {
      EXPECT_THROW(GetConfigValue(c, key), ConfigError);
      continue;
    }
    EXPECT_NO_THROW(GetConfigValue(c, key)) << key;
  }
  EXPECT_EQ(GetConfigValue(c, "auction.demand"), "70");
  EXPECT_EQ(GetConfigValue(c, "hyper.normalization"), "layer");
  EXPECT_THROW(GetConfigValue(c, "auction.nope"), ConfigError);
}

TEST(ConfigTest, LoadFile) {
  const auto dir = std::filesystem::temp_directory_path() / "bidlearn_cfg";
  std::filesystem::create_directories(dir);
  const auto path = dir / "run.conf";
  std::ofstream(path) << "hyper.episodes = 42\n";
  EXPECT_EQ(LoadConfig(path.string()).hyper.episodes, 42);
  EXPECT_EQ(LoadConfig(path.string(), {"hyper.episodes=7"}).hyper.episodes, 7);
  EXPECT_THROW(LoadConfig((dir / "missing.conf").string()), IoError);
}

TEST(ConfigTest, NameParsers) {
  EXPECT_EQ(ParseNorm("batch"), nn::Norm::kBatch);
  EXPECT_FALSE(ParseNorm("Batch ").has_value());
  EXPECT_EQ(ParseMemoryMode("last_actions"), MemoryMode::kLastActions);
  EXPECT_FALSE(ParseMemoryMode("lstm").has_value());
}

}  // namespace
}  // namespace bidlearn
