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

#include "bidlearn/agent.h"

#include <cmath>
#include <random>
#include <set>
#include <vector>

#include <gtest/gtest.h>

#include "bidlearn/error.h"
#include "support/bandit.h"

namespace bidlearn {
namespace {

Hyperparams Small() {
  Hyperparams hyper;
  hyper.hidden_1 = 16;
  hyper.hidden_2 = 12;
  hyper.batch_size = 8;
  hyper.buffer_capacity = 64;
  return hyper;
}

Transition Make(double reward, int dim = 1) {
  return {std::vector<double>(dim, 0.0), 0.0, reward,
          std::vector<double>(dim, 0.0)};
}

void Fill(Agent& agent, int count, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  const int dim = agent.state_dim();
  for (int i = 0; i < count; ++i) {
    Transition t;
    for (int d = 0; d < dim; ++d) {
      t.state.push_back(unit(rng));
      t.next_state.push_back(unit(rng));
    }
    t.action = unit(rng);
    t.reward = unit(rng);
    agent.Remember(std::move(t));
  }
}

TEST(ReplayBufferTest, KeepsLastCapacityItemsInOrder) {
  for (int k : {1, 3, 5, 17}) {
    ReplayBuffer buffer(5);
    for (int i = 0; i < 5 + k; ++i) buffer.Push(Make(i));
    ASSERT_EQ(buffer.size(), 5);
    for (int i = 0; i < 5; ++i) EXPECT_EQ(buffer.at(i).reward, k + i);
  }
}

TEST(ReplayBufferTest, SamplingIsUniform) {
  ReplayBuffer buffer(100);
  for (int i = 0; i < 100; ++i) buffer.Push(Make(i));
  std::mt19937_64 rng(31);
  std::vector<int> counts(100, 0);
  const int draws = 10000;
  for (int i = 0; i < draws; ++i) ++counts[buffer.SampleIndices(1, rng)[0]];
  const double p = 0.01;
  const double sigma = std::sqrt(draws * p * (1 - p));
  for (int c : counts) EXPECT_LE(std::abs(c - draws * p), 5 * sigma);
}

TEST(ReplayBufferTest, BatchIndicesAreDistinct) {
  ReplayBuffer buffer(40);
  for (int i = 0; i < 40; ++i) buffer.Push(Make(i));
  std::mt19937_64 rng(32);
  for (int trial = 0; trial < 100; ++trial) {
    const std::vector<int> idx = buffer.SampleIndices(40, rng);
    EXPECT_EQ(std::set<int>(idx.begin(), idx.end()).size(), 40u);
  }
  EXPECT_THROW(buffer.SampleIndices(41, rng), StateError);
}

TEST(ReplayBufferTest, GatherBuildsMatrices) {
  ReplayBuffer buffer(4);
  buffer.Push({{0.1, 0.2}, 0.5, 1.0, {0.3, 0.4}});
  buffer.Push({{-0.1, -0.2}, -0.5, 2.0, {-0.3, -0.4}});
  const std::vector<int> idx{1, 0};
  const TransitionBatch b = buffer.Gather(idx);
  EXPECT_EQ(b.states(0, 1), -0.2);
  EXPECT_EQ(b.actions(1, 0), 0.5);
  EXPECT_EQ(b.rewards(0), 2.0);
  EXPECT_EQ(b.next_states(1, 0), 0.3);
}

TEST(NoiseTest, GeometricDecay) {
  NoiseProcess noise(0.0, 0.1, 10.0, 0.999, 0.01);
  double previous = noise.scale();
  for (int i = 0; i < 1000; ++i) {
    noise.Decay();
    EXPECT_LE(noise.scale(), previous);
    previous = noise.scale();
  }
  EXPECT_NEAR(noise.scale(), 10.0 * std::pow(0.999, 1000), 1e-9);
  EXPECT_NEAR(noise.scale(), 3.68, 5e-3);
}

TEST(NoiseTest, UnitDecayAndFloor) {
  NoiseProcess flat(0.0, 0.1, 2.0, 1.0, 0.01);
  for (int i = 0; i < 100; ++i) flat.Decay();
  EXPECT_EQ(flat.scale(), 2.0);

  NoiseProcess fast(0.0, 0.1, 1.0, 0.5, 0.2);
  for (int i = 0; i < 50; ++i) {
    fast.Decay();
    EXPECT_GE(fast.scale(), 0.2);
  }
  EXPECT_EQ(fast.scale(), 0.2);
}

TEST(NoiseTest, SampleMoments) {
  NoiseProcess noise(0.5, 0.2, 2.0, 1.0, 0.0);
  std::mt19937_64 rng(33);
  double sum = 0.0, sq = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double x = noise.Sample(rng);
    sum += x;
    sq += x * x;
  }
  const double mean = sum / n;
  const double var = sq / n - mean * mean;
  EXPECT_NEAR(mean, 1.0, 0.01);
  EXPECT_NEAR(std::sqrt(var), 0.4, 0.01);
}

TEST(MappingTest, Examples) {
  const AuctionConfig config;
  EXPECT_EQ(ActionToPrice(1.0, config), 100.0);
  EXPECT_EQ(ActionToPrice(-1.0, config), -100.0);
  EXPECT_NEAR(ActionToPrice(0.04, config), 4.0, 1e-12);
  EXPECT_THROW(ActionToPrice(1.0001, config), ValidationError);
  EXPECT_THROW(PriceToAction(-101.0, config), ValidationError);
}

TEST(MappingTest, InverseRoundTrip) {
  std::mt19937_64 rng(34);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::uniform_real_distribution<double> cap(1.0, 500.0);
  for (int i = 0; i < 1000; ++i) {
    AuctionConfig config;
    config.price_cap = cap(rng);
    config.price_floor = -config.price_cap * (i % 2 == 0 ? 1.0 : 0.3);
    const double a = unit(rng);
    EXPECT_NEAR(PriceToAction(ActionToPrice(a, config), config), a, 1e-12);
  }
}

TEST(AgentTest, GreedyIsDeterministic) {
  Agent agent(2, Small(), 5);
  const std::vector<double> s{0.3, -0.2};
  EXPECT_EQ(agent.Act(s, false), agent.Act(s, false));
}

TEST(AgentTest, SameSeedSameNetworks) {
  Agent a(1, Small(), 42);
  Agent b(1, Small(), 42);
  Agent c(1, Small(), 43);
  const std::vector<double> s{0.0};
  EXPECT_EQ(a.Greedy(s), b.Greedy(s));
  EXPECT_NE(a.Greedy(s), c.Greedy(s));
}

TEST(AgentTest, ZeroStdNoiseEqualsGreedy) {
  Hyperparams hyper = Small();
  hyper.noise_std = 0.0;
  Agent agent(1, hyper, 6);
  const std::vector<double> s{0.0};
  EXPECT_EQ(agent.Act(s, true), agent.Act(s, false));
}

TEST(AgentTest, ExplorationIsClamped) {
  Hyperparams hyper = Small();
  hyper.noise_mean = 5.0;
  hyper.noise_std = 0.0;
  Agent agent(1, hyper, 7);
  EXPECT_EQ(agent.Explore(0.99), 1.0);
  Hyperparams wide = Small();
  wide.noise_regulation = 1000.0;
  Agent noisy(1, wide, 8);
  for (int i = 0; i < 200; ++i) {
    const double a = noisy.Act(std::vector<double>{0.0}, true);
    EXPECT_GE(a, -1.0);
    EXPECT_LE(a, 1.0);
  }
}

TEST(AgentTest, WrongStateWidthIsConfigError) {
  Agent agent(2, Small(), 9);
  EXPECT_THROW(agent.Greedy(std::vector<double>{0.0}), ConfigError);
  EXPECT_THROW(agent.Remember(Make(0.0, 1)), ConfigError);
}

TEST(AgentTest, InvalidHyperparamsRejected) {
  Hyperparams hyper = Small();
  hyper.batch_size = 65;
  EXPECT_THROW(Agent(1, hyper, 1), ConfigError);
  hyper = Small();
  hyper.discount = 1.0;
  EXPECT_THROW(Agent(1, hyper, 1), ConfigError);
  hyper = Small();
  hyper.soft_update_rate = 0.0;
  EXPECT_THROW(Agent(1, hyper, 1), ConfigError);
  hyper = Small();
  hyper.noise_floor = -0.1;
  EXPECT_THROW(Agent(1, hyper, 1), ConfigError);
}

TEST(AgentTest, LearnStepSkipsUntilBatchAvailable) {
  Agent agent(1, Small(), 10);
  std::mt19937_64 rng(35);
  Fill(agent, 7, rng);
  EXPECT_FALSE(agent.LearnStep().has_value());
  Fill(agent, 1, rng);
  EXPECT_TRUE(agent.LearnStep().has_value());
}

TEST(AgentTest, ZeroDiscountTargetIsReward) {
  Hyperparams hyper = Small();
  hyper.discount = 0.0;
  Agent agent(2, hyper, 11);
  std::mt19937_64 rng(36);
  Fill(agent, 20, rng);
  const std::vector<int> idx{0, 3, 5, 19};
  const TransitionBatch batch = agent.buffer().Gather(idx);
  EXPECT_TRUE(agent.CriticTargets(batch) == batch.rewards);
}

TEST(AgentTest, TargetsUseOnlyTargetNetworks) {
  Agent agent(2, Small(), 12);
  std::mt19937_64 rng(37);
  Fill(agent, 30, rng);
  const std::vector<int> idx{1, 2, 8, 13, 21};
  const TransitionBatch batch = agent.buffer().Gather(idx);
  const nn::Vector before = agent.CriticTargets(batch);
  for (auto* net : {&agent.actor(), &agent.critic()}) {
    for (auto& layer : net->mutable_layers()) {
      layer.weights().array() += 0.5;
      layer.biases().array() -= 0.25;
    }
  }
  EXPECT_TRUE(agent.CriticTargets(batch) == before);
}

TEST(AgentTest, UnitSoftUpdateKeepsTwinsEqual) {
  for (nn::Norm norm : {nn::Norm::kNone, nn::Norm::kLayer, nn::Norm::kBatch}) {
    Hyperparams hyper = Small();
    hyper.soft_update_rate = 1.0;
    hyper.normalization = norm;
    Agent agent(2, hyper, 13);
    std::mt19937_64 rng(38);
    Fill(agent, 16, rng);
    for (int step = 0; step < 3; ++step) ASSERT_TRUE(agent.LearnStep());
    const auto& online = agent.critic().layers();
    const auto& target = agent.target_critic().layers();
    for (std::size_t l = 0; l < online.size(); ++l) {
      EXPECT_TRUE(online[l].weights() == target[l].weights());
      EXPECT_TRUE(online[l].batch_norm().running_var ==
                  target[l].batch_norm().running_var);
    }
    const auto& actor = agent.actor().layers();
    const auto& target_actor = agent.target_actor().layers();
    for (std::size_t l = 0; l < actor.size(); ++l) {
      EXPECT_TRUE(actor[l].weights() == target_actor[l].weights());
    }
  }
}

TEST(AgentTest, LearnStepReducesCriticLossOnFixedBatch) {
  Hyperparams hyper = Small();
  hyper.discount = 0.0;
  Agent agent(2, hyper, 14);
  std::mt19937_64 rng(39);
  Fill(agent, 8, rng);
  const std::vector<int> idx{0, 1, 2, 3, 4, 5, 6, 7};
  const TransitionBatch batch = agent.buffer().Gather(idx);
  const double first = agent.LearnOn(batch).critic_loss;
  double last = first;
  for (int i = 0; i < 300; ++i) last = agent.LearnOn(batch).critic_loss;
  EXPECT_LT(last, 0.1 * first);
}

TEST(BanditTest, ReachesOptimum) {
  const testing::BanditResult r =
      testing::RunBandit(testing::BanditHyperparams(), 1, 2000);
  EXPECT_NEAR(r.final_action, testing::kBanditOptimum, 0.05);
}

// Positive reward scaling changes step sizes but not where the greedy action
// heads.
TEST(BanditTest, RewardScalingKeepsDirectionOfImprovement) {
  const Hyperparams hyper = testing::BanditHyperparams();
  const double start = Agent(1, hyper, 2).Greedy(std::vector<double>{0.0});
  const double want = testing::kBanditOptimum - start;
  for (double scale : {0.25, 1.0, 4.0}) {
    const testing::BanditResult r = testing::RunBandit(hyper, 2, 2000, scale);
    const double moved = r.final_action - start;
    EXPECT_GT(moved * want, 0.0) << "scale " << scale;
    EXPECT_LT(std::abs(r.final_action - testing::kBanditOptimum),
              std::abs(want))
        << "scale " << scale;
  }
}

}  // namespace
}  // namespace bidlearn
