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

#ifndef BIDLEARN_AGENT_H_
#define BIDLEARN_AGENT_H_

// A single DDPG bidder: actor and critic with target twins, a FIFO replay
// buffer and decaying Gaussian exploration noise.

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "bidlearn/env.h"
#include "bidlearn/nn.h"

namespace bidlearn {

struct Hyperparams {
  double lr_actor = 1e-4;
  double lr_critic = 1e-3;
  double discount = 0.99;
  double soft_update_rate = 1e-3;
  int buffer_capacity = 50000;
  int batch_size = 128;
  double noise_mean = 0.0;
  double noise_std = 0.1;
  // Initial multiplier on each noise draw.
  double noise_regulation = 10.0;
  // Multiplicative per-episode factor on the noise multiplier.
  double noise_decay = 0.999;
  double noise_floor = 0.01;
  nn::Norm normalization = nn::Norm::kLayer;
  MemoryMode memory_mode = MemoryMode::kMemoryless;
  int episodes = 15000;
  int hidden_1 = 400;
  int hidden_2 = 300;

  // Throws ConfigError naming the offending field.
  void Validate() const;

  bool operator==(const Hyperparams&) const = default;
};

// Per-episode factor equivalent to an exponential decay rate.
double DecayFactorFromRate(double rate);

struct Transition {
  std::vector<double> state;
  double action = 0.0;  // normalized, in [-1, 1]
  double reward = 0.0;  // scaled profit
  std::vector<double> next_state;
};

// A batch of transitions in matrix form.
struct TransitionBatch {
  nn::Tensor2 states;
  nn::Tensor2 actions;  // rows x 1
  nn::Vector rewards;
  nn::Tensor2 next_states;
};

class ReplayBuffer {
 public:
  explicit ReplayBuffer(int capacity);

  // Appends, evicting the oldest entry when full.
  void Push(Transition transition);

  int size() const { return static_cast<int>(entries_.size()); }
  int capacity() const { return capacity_; }
  // i = 0 is the oldest entry still held.
  const Transition& at(int i) const;

  // `count` distinct indices drawn uniformly (partial Fisher-Yates).
  std::vector<int> SampleIndices(int count, std::mt19937_64& rng) const;
  TransitionBatch Gather(std::span<const int> indices) const;

 private:
  int capacity_;
  int head_ = 0;  // position of the oldest entry once full
  std::vector<Transition> entries_;
};

class NoiseProcess {
 public:
  NoiseProcess(double mean, double std, double scale, double decay,
               double floor);

  double Sample(std::mt19937_64& rng);
  // scale <- max(floor, scale * decay)
  void Decay();

  double mean() const { return mean_; }
  double std() const { return std_; }
  double scale() const { return scale_; }
  double decay() const { return decay_; }
  double floor() const { return floor_; }

 private:
  double mean_;
  double std_;
  double scale_;
  double decay_;
  double floor_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

// Affine map of a normalized action onto [price_floor, price_cap] and back.
// Throws ValidationError outside the respective domain.
double ActionToPrice(double action, const AuctionConfig& config);
double PriceToAction(double price, const AuctionConfig& config);

struct LearnDiagnostics {
  double critic_loss = 0.0;
  double actor_objective = 0.0;
};

class Agent {
 public:
  Agent(int state_dim, const Hyperparams& hyper, std::uint64_t seed);

  // Deterministic actor output (Eval mode), plus scaled noise when exploring,
  // clamped to [-1, 1]. Throws NumericError on a non-finite actor output.
  double Act(std::span<const double> state, bool explore);

  // The two halves of Act: the noise-free action, and a noisy copy of it.
  double Greedy(std::span<const double> state);
  double Explore(double greedy_action);

  void Remember(Transition transition);

  // Samples a batch and updates critic, actor and both targets. Returns
  // nothing when the buffer holds fewer than batch_size transitions.
  std::optional<LearnDiagnostics> LearnStep();

  // One update on an explicit batch.
  LearnDiagnostics LearnOn(const TransitionBatch& batch);

  // reward + discount * target_critic(next, target_actor(next)).
  nn::Vector CriticTargets(const TransitionBatch& batch);

  void DecayNoise() { noise_.Decay(); }

  int state_dim() const { return state_dim_; }
  const Hyperparams& hyperparams() const { return hyper_; }
  nn::Network& actor() { return actor_; }
  nn::Network& critic() { return critic_; }
  nn::Network& target_actor() { return target_actor_; }
  nn::Network& target_critic() { return target_critic_; }
  const ReplayBuffer& buffer() const { return buffer_; }
  const NoiseProcess& noise() const { return noise_; }

 private:
  int state_dim_;
  Hyperparams hyper_;
  std::mt19937_64 init_rng_;
  std::mt19937_64 noise_rng_;
  std::mt19937_64 sample_rng_;
  nn::Network actor_;
  nn::Network critic_;
  nn::Network target_actor_;
  nn::Network target_critic_;
  nn::AdamState actor_adam_;
  nn::AdamState critic_adam_;
  ReplayBuffer buffer_;
  NoiseProcess noise_;
};

}  // namespace bidlearn

#endif  // BIDLEARN_AGENT_H_
