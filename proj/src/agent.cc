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

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <string>
#include <utility>

#include "bidlearn/error.h"

namespace bidlearn {
namespace {

std::mt19937_64 StreamFor(std::uint64_t seed, std::uint32_t purpose) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32), purpose};
  return std::mt19937_64(seq);
}

// Stream tags; changing them changes every run.
constexpr std::uint32_t kInitStream = 0x494e4954;    // "INIT"
constexpr std::uint32_t kNoiseStream = 0x4e4f4953;   // "NOIS"
constexpr std::uint32_t kSampleStream = 0x53414d50;  // "SAMP"

nn::Tensor2 Concat(const nn::Tensor2& left, const nn::Tensor2& right) {
  nn::Tensor2 out(left.rows(), left.cols() + right.cols());
  out << left, right;
  return out;
}

const Hyperparams& Validated(const Hyperparams& hyper) {
  hyper.Validate();
  return hyper;
}

}  // namespace

void Hyperparams::Validate() const {
  auto fail = [](const char* key, const std::string& why) {
    throw ConfigError(std::string("hyper.") + key + ": " + why);
  };
  if (!(lr_actor > 0.0)) fail("lr_actor", "must be > 0");
  if (!(lr_critic > 0.0)) fail("lr_critic", "must be > 0");
  if (!(discount >= 0.0 && discount < 1.0)) fail("discount", "must be in [0, 1)");
  if (!(soft_update_rate > 0.0 && soft_update_rate <= 1.0)) {
    fail("soft_update_rate", "must be in (0, 1]");
  }
  if (buffer_capacity < 1) fail("buffer_capacity", "must be >= 1");
  if (batch_size < 1) fail("batch_size", "must be >= 1");
  if (batch_size > buffer_capacity) {
    fail("batch_size", "must not exceed buffer_capacity (" +
                           std::to_string(buffer_capacity) + ")");
  }
  if (normalization == nn::Norm::kBatch && batch_size < 2) {
    fail("batch_size", "batch normalization needs batches of at least 2");
  }
  if (!std::isfinite(noise_mean)) fail("noise_mean", "must be finite");
  if (!(noise_std >= 0.0) || !std::isfinite(noise_std)) {
    fail("noise_std", "must be >= 0");
  }
  if (!(noise_regulation >= 0.0) || !std::isfinite(noise_regulation)) {
    fail("noise_regulation", "must be >= 0");
  }
  if (!(noise_decay > 0.0 && noise_decay <= 1.0)) {
    fail("noise_decay", "must be in (0, 1]");
  }
  if (!(noise_floor >= 0.0) || !std::isfinite(noise_floor)) {
    fail("noise_floor", "must be >= 0");
  }
  if (episodes < 0) fail("episodes", "must be >= 0");
  if (hidden_1 < 2) fail("hidden_1", "must be >= 2");
  if (hidden_2 < 2) fail("hidden_2", "must be >= 2");
}

double DecayFactorFromRate(double rate) { return std::exp(-rate); }

ReplayBuffer::ReplayBuffer(int capacity) : capacity_(capacity) {
  if (capacity < 1) throw ConfigError("replay buffer capacity must be >= 1");
  entries_.reserve(static_cast<std::size_t>(std::min(capacity, 1 << 16)));
}

void ReplayBuffer::Push(Transition transition) {
  if (size() < capacity_) {
    entries_.push_back(std::move(transition));
    return;
  }
  entries_[head_] = std::move(transition);
  head_ = (head_ + 1) % capacity_;
}

const Transition& ReplayBuffer::at(int i) const {
  if (i < 0 || i >= size()) throw ValidationError("replay index out of range");
  return entries_[(head_ + i) % size()];
}

std::vector<int> ReplayBuffer::SampleIndices(int count,
                                             std::mt19937_64& rng) const {
  if (count > size()) {
    throw StateError("cannot sample " + std::to_string(count) +
                     " transitions from a buffer of " + std::to_string(size()));
  }
  std::vector<int> pool(size());
  std::iota(pool.begin(), pool.end(), 0);
  for (int i = 0; i < count; ++i) {
    std::uniform_int_distribution<int> pick(i, size() - 1);
    std::swap(pool[i], pool[pick(rng)]);
  }
  pool.resize(count);
  return pool;
}

TransitionBatch ReplayBuffer::Gather(std::span<const int> indices) const {
  TransitionBatch batch;
  const auto rows = static_cast<nn::Index>(indices.size());
  const auto dim = static_cast<nn::Index>(at(indices[0]).state.size());
  batch.states.resize(rows, dim);
  batch.next_states.resize(rows, dim);
  batch.actions.resize(rows, 1);
  batch.rewards.resize(rows);
  for (nn::Index r = 0; r < rows; ++r) {
    const Transition& t = at(indices[r]);
    for (nn::Index c = 0; c < dim; ++c) {
      batch.states(r, c) = t.state[c];
      batch.next_states(r, c) = t.next_state[c];
    }
    batch.actions(r, 0) = t.action;
    batch.rewards(r) = t.reward;
  }
  return batch;
}

NoiseProcess::NoiseProcess(double mean, double std, double scale, double decay,
                           double floor)
    : mean_(mean),
      std_(std),
      scale_(std::max(scale, floor)),
      decay_(decay),
      floor_(floor) {}

double NoiseProcess::Sample(std::mt19937_64& rng) {
  return scale_ * (mean_ + std_ * normal_(rng));
}

void NoiseProcess::Decay() { scale_ = std::max(floor_, scale_ * decay_); }

double ActionToPrice(double action, const AuctionConfig& config) {
  if (!(action >= -1.0 && action <= 1.0)) {
    std::ostringstream msg;
    msg << "normalized action " << action << " outside [-1, 1]";
    throw ValidationError(msg.str());
  }
  const double half_range = 0.5 * (config.price_cap - config.price_floor);
  return config.price_floor + (action + 1.0) * half_range;
}

double PriceToAction(double price, const AuctionConfig& config) {
  if (!(price >= config.price_floor && price <= config.price_cap)) {
    std::ostringstream msg;
    msg << "price " << price << " outside [" << config.price_floor << ", "
        << config.price_cap << "]";
    throw ValidationError(msg.str());
  }
  return NormalizePrice(price, config);
}

Agent::Agent(int state_dim, const Hyperparams& hyper, std::uint64_t seed)
    : state_dim_(state_dim),
      hyper_(Validated(hyper)),
      init_rng_(StreamFor(seed, kInitStream)),
      noise_rng_(StreamFor(seed, kNoiseStream)),
      sample_rng_(StreamFor(seed, kSampleStream)),
      actor_(nn::MakeActor(state_dim, hyper.hidden_1, hyper.hidden_2,
                           hyper.normalization, init_rng_)),
      critic_(nn::MakeCritic(state_dim, 1, hyper.hidden_1, hyper.hidden_2,
                             hyper.normalization, init_rng_)),
      target_actor_(actor_),
      target_critic_(critic_),
      actor_adam_(nn::MakeAdamState(actor_, hyper.lr_actor)),
      critic_adam_(nn::MakeAdamState(critic_, hyper.lr_critic)),
      buffer_(hyper.buffer_capacity),
      noise_(hyper.noise_mean, hyper.noise_std, hyper.noise_regulation,
             hyper.noise_decay, hyper.noise_floor) {}

double Agent::Greedy(std::span<const double> state) {
  if (static_cast<int>(state.size()) != state_dim_) {
    throw ConfigError("state has " + std::to_string(state.size()) +
                      " features, agent expects " + std::to_string(state_dim_));
  }
  nn::Tensor2 input(1, state_dim_);
  for (int i = 0; i < state_dim_; ++i) input(0, i) = state[i];
  const double raw = actor_.Forward(input, nn::Mode::kEval)(0, 0);
  if (!std::isfinite(raw)) {
    throw NumericError("actor produced a non-finite action");
  }
  return std::clamp(raw, -1.0, 1.0);
}

double Agent::Explore(double greedy_action) {
  return std::clamp(greedy_action + noise_.Sample(noise_rng_), -1.0, 1.0);
}

double Agent::Act(std::span<const double> state, bool explore) {
  const double action = Greedy(state);
  return explore ? Explore(action) : action;
}

void Agent::Remember(Transition transition) {
  if (static_cast<int>(transition.state.size()) != state_dim_ ||
      static_cast<int>(transition.next_state.size()) != state_dim_) {
    throw ConfigError("transition state width does not match the agent");
  }
  if (!(transition.action >= -1.0 && transition.action <= 1.0)) {
    throw ValidationError("transition action outside [-1, 1]");
  }
  buffer_.Push(std::move(transition));
}

std::optional<LearnDiagnostics> Agent::LearnStep() {
  if (buffer_.size() < hyper_.batch_size) return std::nullopt;
  const std::vector<int> indices =
      buffer_.SampleIndices(hyper_.batch_size, sample_rng_);
  return LearnOn(buffer_.Gather(indices));
}

nn::Vector Agent::CriticTargets(const TransitionBatch& batch) {
  const nn::Tensor2 next_actions =
      target_actor_.Forward(batch.next_states, nn::Mode::kEval);
  const nn::Tensor2 next_q = target_critic_.Forward(
      Concat(batch.next_states, next_actions), nn::Mode::kEval);
  return batch.rewards + hyper_.discount * next_q.col(0);
}

LearnDiagnostics Agent::LearnOn(const TransitionBatch& batch) {
  const auto rows = static_cast<double>(batch.states.rows());
  LearnDiagnostics diag;

  // Critic: minimize mean (Q(s, a) - y)^2.
  const nn::Vector targets = CriticTargets(batch);
  const nn::Tensor2 q =
      critic_.Forward(Concat(batch.states, batch.actions), nn::Mode::kTrain);
  const nn::Vector error = q.col(0) - targets;
  diag.critic_loss = error.squaredNorm() / rows;
  nn::Tensor2 d_q = (2.0 / rows) * error;
  nn::AdamStep(critic_, critic_.Backward(d_q), critic_adam_);

  // Actor: ascend mean Q(s, A(s)) through the critic's action input.
  const nn::Tensor2 actions = actor_.Forward(batch.states, nn::Mode::kTrain);
  const nn::Tensor2 q_pi =
      critic_.Forward(Concat(batch.states, actions), nn::Mode::kTrain);
  diag.actor_objective = q_pi.mean();
  const nn::Tensor2 d_objective = nn::Tensor2::Constant(q_pi.rows(), 1, -1.0 / rows);
  const nn::Gradients critic_grads = critic_.Backward(d_objective);
  const nn::Tensor2 d_action = critic_grads.input.rightCols(1);
  nn::AdamStep(actor_, actor_.Backward(d_action), actor_adam_);

  nn::SoftUpdate(target_critic_, critic_, hyper_.soft_update_rate);
  nn::SoftUpdate(target_actor_, actor_, hyper_.soft_update_rate);
  if (!std::isfinite(diag.critic_loss) || !std::isfinite(diag.actor_objective)) {
    throw NumericError("learn step produced a non-finite loss");
  }
  return diag;
}

}  // namespace bidlearn
