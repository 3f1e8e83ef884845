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

#include "bidlearn/nn.h"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>
#include <utility>

#include "bidlearn/error.h"

namespace bidlearn::nn {
namespace {

using RowVector = Eigen::Matrix<double, 1, Eigen::Dynamic>;

bool AllRowsEqual(const Tensor2& m) {
  for (Index r = 1; r < m.rows(); ++r) {
    if (m.row(r) != m.row(0)) return false;
  }
  return true;
}

// Returns the segment as one row if all its rows are identical.
Tensor2 MaybeTie(const Tensor2& segment, bool allow, bool* tied) {
  *tied = allow && segment.rows() > 1 && AllRowsEqual(segment);
  if (*tied) return segment.topRows(1);
  return segment;
}

void LayerNormForward(const Tensor2& pre, NormalizationCache& cache) {
  const Index n = pre.cols();
  if (n < 2) {
    throw ValidationError("layer normalization needs at least 2 features");
  }
  cache.normalized.resize(pre.rows(), n);
  cache.inv_std.resize(pre.rows());
  for (Index r = 0; r < pre.rows(); ++r) {
    const double mean = pre.row(r).mean();
    const RowVector centered = pre.row(r).array() - mean;
    const double var = centered.squaredNorm() / static_cast<double>(n);
    const double inv_std = 1.0 / std::sqrt(var + kNormEpsilon);
    cache.inv_std(r) = inv_std;
    cache.normalized.row(r) = centered * inv_std;
  }
}

void BatchNormTrainForward(const Tensor2& pre, BatchNormState& state,
                           NormalizationCache& cache) {
  const Index rows = pre.rows();
  if (rows < 2) {
    throw ValidationError(
        "batch normalization in train mode needs a batch of at least 2 rows");
  }
  const RowVector mean = pre.colwise().mean();
  const Tensor2 centered = pre.rowwise() - mean;
  const RowVector var =
      centered.array().square().colwise().sum() / static_cast<double>(rows);
  cache.inv_std = (var.array() + kNormEpsilon).rsqrt().transpose();
  cache.normalized = centered.array().rowwise() *
                     cache.inv_std.transpose().array();
  const double m = state.momentum;
  const double unbias = static_cast<double>(rows) / (rows - 1);
  state.running_mean = (1.0 - m) * state.running_mean + m * mean.transpose();
  state.running_var =
      (1.0 - m) * state.running_var + (m * unbias) * var.transpose();
}

void BatchNormEvalForward(const Tensor2& pre, const BatchNormState& state,
                          NormalizationCache& cache) {
  cache.inv_std = (state.running_var.array() + kNormEpsilon).rsqrt();
  cache.normalized = (pre.rowwise() - state.running_mean.transpose())
                         .array()
                         .rowwise() *
                     cache.inv_std.transpose().array();
}

Tensor2 Activate(Activation activation, const Tensor2& z) {
  switch (activation) {
    case Activation::kReLU:
      return z.cwiseMax(0.0);
    case Activation::kTanh:
      return z.array().tanh().matrix();
    case Activation::kLinear:
      return z;
  }
  return z;
}

// dL/dz from dL/dy, given z's activation output y.
Tensor2 ActivationBackward(Activation activation, const Tensor2& output,
                           const Tensor2& upstream) {
  switch (activation) {
    case Activation::kReLU:
      return (output.array() > 0.0).select(upstream.array(), 0.0).matrix();
    case Activation::kTanh:
      return (upstream.array() * (1.0 - output.array().square())).matrix();
    case Activation::kLinear:
      return upstream;
  }
  return upstream;
}

// Adds a one-row or full-height term into `acc`, broadcasting one-row terms.
void AccumulateRows(Tensor2& acc, const Tensor2& term) {
  if (term.rows() == acc.rows()) {
    acc += term;
  } else {
    acc.rowwise() += term.row(0);
  }
}

template <typename T>
void WriteLe(std::ostream& out, T value) {
  std::array<unsigned char, sizeof(T)> bytes;
  std::memcpy(bytes.data(), &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) {
    std::reverse(bytes.begin(), bytes.end());
  }
  out.write(reinterpret_cast<const char*>(bytes.data()), sizeof(T));
}

template <typename T>
T ReadLe(std::istream& in) {
  std::array<unsigned char, sizeof(T)> bytes;
  in.read(reinterpret_cast<char*>(bytes.data()), sizeof(T));
  if (!in) throw IoError("truncated network snapshot");
  if constexpr (std::endian::native == std::endian::big) {
    std::reverse(bytes.begin(), bytes.end());
  }
  T value;
  std::memcpy(&value, bytes.data(), sizeof(T));
  return value;
}

constexpr std::array<char, 4> kSnapshotMagic = {'B', 'L', 'N', 'N'};
constexpr std::uint32_t kSnapshotVersion = 1;

}  // namespace

std::string_view ToString(Activation activation) {
  switch (activation) {
    case Activation::kReLU:
      return "relu";
    case Activation::kTanh:
      return "tanh";
    case Activation::kLinear:
      return "linear";
  }
  return "?";
}

std::string_view ToString(Norm norm) {
  switch (norm) {
    case Norm::kNone:
      return "none";
    case Norm::kLayer:
      return "layer";
    case Norm::kBatch:
      return "batch";
  }
  return "?";
}

BatchNormState BatchNormState::Zero(Index features) {
  BatchNormState state;
  state.running_mean = Vector::Zero(features);
  state.running_var = Vector::Ones(features);
  return state;
}

Tensor2 ApplyNormalization(Norm scheme, const Tensor2& pre,
                           BatchNormState* state, Mode mode,
                           NormalizationCache* cache) {
  NormalizationCache local;
  NormalizationCache& c = cache != nullptr ? *cache : local;
  c.scheme = scheme;
  c.mode = mode;
  c.collapsed = false;
  switch (scheme) {
    case Norm::kNone:
      c.normalized = pre;
      c.inv_std.resize(0);
      break;
    case Norm::kLayer:
      LayerNormForward(pre, c);
      break;
    case Norm::kBatch:
      if (state == nullptr) {
        throw StateError("batch normalization requires running statistics");
      }
      if (state->running_mean.size() != pre.cols()) {
        throw ConfigError("batch-norm state width does not match input");
      }
      state->mode = mode;
      if (mode == Mode::kTrain) {
        BatchNormTrainForward(pre, *state, c);
      } else {
        BatchNormEvalForward(pre, *state, c);
      }
      break;
  }
  return c.normalized;
}

Tensor2 NormalizationBackward(const NormalizationCache& cache,
                              const Tensor2& upstream) {
  switch (cache.scheme) {
    case Norm::kNone:
      return upstream;
    case Norm::kLayer: {
      Tensor2 grad(upstream.rows(), upstream.cols());
      for (Index r = 0; r < upstream.rows(); ++r) {
        const double mean_dy = upstream.row(r).mean();
        const double mean_dy_xhat =
            upstream.row(r).dot(cache.normalized.row(r)) /
            static_cast<double>(upstream.cols());
        grad.row(r) = cache.inv_std(r) *
                      (upstream.row(r).array() - mean_dy -
                       cache.normalized.row(r).array() * mean_dy_xhat)
                          .matrix();
      }
      return grad;
    }
    case Norm::kBatch: {
      if (cache.collapsed) return Tensor2::Zero(upstream.rows(), upstream.cols());
      if (cache.mode == Mode::kEval) {
        return upstream.array().rowwise() * cache.inv_std.transpose().array();
      }
      const double rows = static_cast<double>(upstream.rows());
      const RowVector mean_dy = upstream.colwise().sum() / rows;
      const RowVector mean_dy_xhat =
          upstream.cwiseProduct(cache.normalized).colwise().sum() / rows;
      Tensor2 grad = upstream.rowwise() - mean_dy;
      grad -= (cache.normalized.array().rowwise() * mean_dy_xhat.array())
                  .matrix();
      return grad.array().rowwise() * cache.inv_std.transpose().array();
    }
  }
  return upstream;
}

DenseLayer::DenseLayer(Index input_dim, Index side_dim, Index output_dim,
                       Activation activation, Norm norm)
    : input_dim_(input_dim),
      side_dim_(side_dim),
      output_dim_(output_dim),
      activation_(activation),
      norm_(norm),
      weights_(Tensor2::Zero(output_dim, input_dim + side_dim)),
      biases_(Vector::Zero(output_dim)),
      batch_norm_(BatchNormState::Zero(output_dim)) {
  if (input_dim < 0 || side_dim < 0 || output_dim < 1 ||
      input_dim + side_dim < 1) {
    throw ConfigError("dense layer dimensions must be positive");
  }
  if (norm == Norm::kLayer && output_dim < 2) {
    throw ConfigError("layer normalization needs at least 2 features");
  }
}

void DenseLayer::InitializeUniform(std::mt19937_64& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in()));
  std::uniform_real_distribution<double> dist(-bound, bound);
  for (Index i = 0; i < weights_.size(); ++i) weights_.data()[i] = dist(rng);
  for (Index i = 0; i < biases_.size(); ++i) biases_(i) = dist(rng);
}

std::vector<std::span<const double>> Gradients::Blocks() const {
  std::vector<std::span<const double>> blocks;
  blocks.reserve(2 * layers.size());
  for (const auto& layer : layers) {
    blocks.emplace_back(layer.weights.data(),
                        static_cast<std::size_t>(layer.weights.size()));
    blocks.emplace_back(layer.biases.data(),
                        static_cast<std::size_t>(layer.biases.size()));
  }
  return blocks;
}

Network::Network(std::vector<DenseLayer> layers) : layers_(std::move(layers)) {
  if (layers_.empty()) throw ConfigError("network needs at least one layer");
  input_dim_ = layers_.front().input_dim() + layers_.front().side_dim();
  for (std::size_t l = 1; l < layers_.size(); ++l) {
    if (layers_[l].input_dim() != layers_[l - 1].output_dim()) {
      throw ConfigError("layer " + std::to_string(l) + " expects " +
                        std::to_string(layers_[l].input_dim()) +
                        " inputs but the previous layer emits " +
                        std::to_string(layers_[l - 1].output_dim()));
    }
    input_dim_ += layers_[l].side_dim();
  }
  if (layers_.front().side_dim() != 0) {
    throw ConfigError("the first layer cannot take a side input");
  }
}

Tensor2 Network::Forward(const Tensor2& batch, Mode mode) {
  if (batch.cols() != input_dim_) {
    throw ConfigError("network expects " + std::to_string(input_dim_) +
                      " input columns, got " + std::to_string(batch.cols()));
  }
  if (batch.rows() < 1) throw ConfigError("empty input batch");
  const Index rows = batch.rows();
  has_cache_ = false;
  cache_.assign(layers_.size(), LayerCache{});

  Index side_offset = layers_.front().input_dim();
  Tensor2 current =
      MaybeTie(batch.leftCols(layers_.front().input_dim()),
               tie_identical_rows_, &cache_[0].main_tied);
  bool current_tied = cache_[0].main_tied;

  for (std::size_t l = 0; l < layers_.size(); ++l) {
    DenseLayer& layer = layers_[l];
    LayerCache& c = cache_[l];
    c.main_tied = current_tied;
    c.main = std::move(current);
    const Index in = layer.input_dim();
    const Index side = layer.side_dim();
    if (side > 0) {
      c.side = MaybeTie(batch.middleCols(side_offset, side),
                        tie_identical_rows_, &c.side_tied);
      side_offset += side;
    }
    c.out_tied = c.main_tied && (side == 0 || c.side_tied);

    const Index pre_rows = c.out_tied ? 1 : rows;
    Tensor2 pre(pre_rows, layer.output_dim());
    pre.rowwise() = layer.biases().transpose();
    AccumulateRows(pre, c.main * layer.weights().leftCols(in).transpose());
    if (side > 0) {
      AccumulateRows(pre, c.side * layer.weights().rightCols(side).transpose());
    }

    Tensor2 normalized;
    if (layer.norm() == Norm::kBatch && mode == Mode::kTrain && c.out_tied) {
      // Identical rows: batch statistics give zero variance and x-hat = 0.
      if (rows < 2) {
        throw ValidationError(
            "batch normalization in train mode needs a batch of at least 2 "
            "rows");
      }
      BatchNormState& bn = layer.batch_norm();
      bn.mode = mode;
      bn.running_mean = (1.0 - bn.momentum) * bn.running_mean +
                        bn.momentum * pre.row(0).transpose();
      bn.running_var *= (1.0 - bn.momentum);
      c.norm = NormalizationCache{};
      c.norm.scheme = Norm::kBatch;
      c.norm.mode = mode;
      c.norm.collapsed = true;
      normalized = Tensor2::Zero(1, layer.output_dim());
      c.norm.normalized = normalized;
    } else {
      normalized = ApplyNormalization(layer.norm(), pre, &layer.batch_norm(),
                                      mode, &c.norm);
    }
    c.output = Activate(layer.activation(), normalized);
    if (!c.output.allFinite()) {
      throw NumericError("non-finite output in layer " + std::to_string(l) +
                         " (" + std::string(ToString(layer.activation())) +
                         ")");
    }
    current = c.output;
    current_tied = c.out_tied;
  }
  cached_rows_ = rows;
  has_cache_ = true;
  if (current_tied && rows > 1) {
    return current.replicate(rows, 1);
  }
  return current;
}

Gradients Network::Backward(const Tensor2& upstream) const {
  if (!has_cache_) throw StateError("Backward called before Forward");
  if (upstream.rows() != cached_rows_ || upstream.cols() != output_dim()) {
    throw ConfigError("upstream gradient shape does not match the output");
  }
  const Index rows = cached_rows_;
  Gradients grads;
  grads.layers.resize(layers_.size());
  grads.input.resize(rows, input_dim_);

  Tensor2 d_out = cache_.back().out_tied ? Tensor2(upstream.colwise().sum())
                                         : upstream;
  // Side inputs sit after the main input, in layer order.
  Index side_offset = input_dim_;
  for (std::size_t li = layers_.size(); li-- > 0;) {
    const DenseLayer& layer = layers_[li];
    const LayerCache& c = cache_[li];
    const Tensor2 d_norm =
        ActivationBackward(layer.activation(), c.output, d_out);
    const Tensor2 d_pre = NormalizationBackward(c.norm, d_norm);

    LayerGradients& g = grads.layers[li];
    g.biases = d_pre.colwise().sum().transpose();
    const Index in = layer.input_dim();
    const Index side = layer.side_dim();

    // A tied input only sees the row sum of d_pre.
    const Tensor2 d_pre_main =
        (c.main_tied && d_pre.rows() > 1) ? Tensor2(d_pre.colwise().sum())
                                          : d_pre;
    g.weights.resize(layer.output_dim(), layer.fan_in());
    g.weights.leftCols(in).noalias() = d_pre_main.transpose() * c.main;
    Tensor2 d_main = d_pre_main * layer.weights().leftCols(in);

    if (side > 0) {
      side_offset -= side;
      const Tensor2 d_pre_side =
          (c.side_tied && d_pre.rows() > 1) ? Tensor2(d_pre.colwise().sum())
                                            : d_pre;
      g.weights.rightCols(side).noalias() = d_pre_side.transpose() * c.side;
      const Tensor2 d_side = d_pre_side * layer.weights().rightCols(side);
      if (c.side_tied) {
        grads.input.middleCols(side_offset, side).rowwise() =
            d_side.row(0) / static_cast<double>(rows);
      } else {
        grads.input.middleCols(side_offset, side) = d_side;
      }
    }

    if (li == 0) {
      if (c.main_tied) {
        grads.input.leftCols(in).rowwise() =
            d_main.row(0) / static_cast<double>(rows);
      } else {
        grads.input.leftCols(in) = d_main;
      }
    } else {
      d_out = std::move(d_main);
    }
  }
  return grads;
}

std::vector<std::span<double>> Network::ParameterBlocks() {
  std::vector<std::span<double>> blocks;
  blocks.reserve(2 * layers_.size());
  for (auto& layer : layers_) {
    blocks.emplace_back(layer.weights().data(),
                        static_cast<std::size_t>(layer.weights().size()));
    blocks.emplace_back(layer.biases().data(),
                        static_cast<std::size_t>(layer.biases().size()));
  }
  return blocks;
}

std::vector<std::span<const double>> Network::ParameterBlocks() const {
  std::vector<std::span<const double>> blocks;
  blocks.reserve(2 * layers_.size());
  for (const auto& layer : layers_) {
    blocks.emplace_back(layer.weights().data(),
                        static_cast<std::size_t>(layer.weights().size()));
    blocks.emplace_back(layer.biases().data(),
                        static_cast<std::size_t>(layer.biases().size()));
  }
  return blocks;
}

Index Network::ParameterCount() const {
  Index count = 0;
  for (const auto& layer : layers_) {
    count += layer.weights().size() + layer.biases().size();
  }
  return count;
}

bool Network::SameArchitecture(const Network& other) const {
  if (layers_.size() != other.layers_.size()) return false;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const DenseLayer& a = layers_[l];
    const DenseLayer& b = other.layers_[l];
    if (a.input_dim() != b.input_dim() || a.side_dim() != b.side_dim() ||
        a.output_dim() != b.output_dim() || a.activation() != b.activation() ||
        a.norm() != b.norm()) {
      return false;
    }
  }
  return true;
}

void Network::ClearCache() {
  cache_.clear();
  has_cache_ = false;
  cached_rows_ = 0;
}

Network MakeActor(Index state_dim, Index hidden1, Index hidden2, Norm norm,
                  std::mt19937_64& rng) {
  std::vector<DenseLayer> layers;
  layers.emplace_back(state_dim, 0, hidden1, Activation::kReLU, norm);
  layers.emplace_back(hidden1, 0, hidden2, Activation::kReLU, norm);
  layers.emplace_back(hidden2, 0, 1, Activation::kTanh, Norm::kNone);
  for (auto& layer : layers) layer.InitializeUniform(rng);
  return Network(std::move(layers));
}

Network MakeCritic(Index state_dim, Index action_dim, Index hidden1,
                   Index hidden2, Norm norm, std::mt19937_64& rng) {
  std::vector<DenseLayer> layers;
  layers.emplace_back(state_dim, 0, hidden1, Activation::kReLU, norm);
  layers.emplace_back(hidden1, action_dim, hidden2, Activation::kReLU, norm);
  layers.emplace_back(hidden2, 0, 1, Activation::kLinear, Norm::kNone);
  for (auto& layer : layers) layer.InitializeUniform(rng);
  return Network(std::move(layers));
}

AdamState MakeAdamState(const Network& network, double lr) {
  if (!(lr > 0.0)) throw ValidationError("Adam learning rate must be > 0");
  AdamState state;
  state.lr = lr;
  for (const auto& block : network.ParameterBlocks()) {
    const auto n = static_cast<Index>(block.size());
    state.first_moment.push_back(Eigen::ArrayXd::Zero(n));
    state.second_moment.push_back(Eigen::ArrayXd::Zero(n));
  }
  return state;
}

void AdamStep(std::span<const std::span<double>> params,
              std::span<const std::span<const double>> grads,
              AdamState& state) {
  if (params.size() != grads.size()) {
    throw ValidationError("Adam: parameter and gradient block counts differ");
  }
  if (state.first_moment.empty()) {
    for (const auto& block : params) {
      const auto n = static_cast<Index>(block.size());
      state.first_moment.push_back(Eigen::ArrayXd::Zero(n));
      state.second_moment.push_back(Eigen::ArrayXd::Zero(n));
    }
  }
  if (state.first_moment.size() != params.size()) {
    throw ValidationError("Adam: moment block count does not match");
  }
  for (std::size_t b = 0; b < params.size(); ++b) {
    if (params[b].size() != grads[b].size() ||
        static_cast<Index>(params[b].size()) != state.first_moment[b].size()) {
      throw ValidationError("Adam: block " + std::to_string(b) +
                            " shape mismatch");
    }
  }

  ++state.step_count;
  const double t = static_cast<double>(state.step_count);
  const double correction1 = 1.0 - std::pow(state.beta1, t);
  const double correction2 = 1.0 - std::pow(state.beta2, t);
  const double step = state.lr / correction1;
  const double inv_sqrt_c2 = 1.0 / std::sqrt(correction2);
  for (std::size_t b = 0; b < params.size(); ++b) {
    const auto n = static_cast<Index>(params[b].size());
    Eigen::Map<Eigen::ArrayXd> p(params[b].data(), n);
    Eigen::Map<const Eigen::ArrayXd> g(grads[b].data(), n);
    Eigen::ArrayXd& m = state.first_moment[b];
    Eigen::ArrayXd& v = state.second_moment[b];
    m = state.beta1 * m + (1.0 - state.beta1) * g;
    v = state.beta2 * v + (1.0 - state.beta2) * g.square();
    // p -= lr * m_hat / (sqrt(v_hat) + eps)
    p -= step * m / (v.sqrt() * inv_sqrt_c2 + state.epsilon);
  }
}

void AdamStep(Network& network, const Gradients& grads, AdamState& state) {
  const auto params = network.ParameterBlocks();
  const auto blocks = grads.Blocks();
  AdamStep(params, blocks, state);
}

void SoftUpdate(Network& target, const Network& source, double tau) {
  if (!(tau > 0.0 && tau <= 1.0)) {
    throw ValidationError("soft update rate must lie in (0, 1]");
  }
  if (!target.SameArchitecture(source)) {
    throw ConfigError("soft update between different architectures");
  }
  auto& dst = target.mutable_layers();
  const auto& src = source.layers();
  for (std::size_t l = 0; l < dst.size(); ++l) {
    if (tau == 1.0) {
      dst[l].weights() = src[l].weights();
      dst[l].biases() = src[l].biases();
      dst[l].batch_norm().running_mean = src[l].batch_norm().running_mean;
      dst[l].batch_norm().running_var = src[l].batch_norm().running_var;
      continue;
    }
    dst[l].weights() = tau * src[l].weights() + (1.0 - tau) * dst[l].weights();
    dst[l].biases() = tau * src[l].biases() + (1.0 - tau) * dst[l].biases();
    BatchNormState& bn = dst[l].batch_norm();
    bn.running_mean =
        tau * src[l].batch_norm().running_mean + (1.0 - tau) * bn.running_mean;
    bn.running_var =
        tau * src[l].batch_norm().running_var + (1.0 - tau) * bn.running_var;
  }
}

void SaveSnapshot(const Network& network, std::ostream& out) {
  out.write(kSnapshotMagic.data(), kSnapshotMagic.size());
  WriteLe<std::uint32_t>(out, kSnapshotVersion);
  WriteLe<std::uint32_t>(out, static_cast<std::uint32_t>(network.layers().size()));
  for (const auto& layer : network.layers()) {
    WriteLe<std::uint32_t>(out, static_cast<std::uint32_t>(layer.input_dim()));
    WriteLe<std::uint32_t>(out, static_cast<std::uint32_t>(layer.side_dim()));
    WriteLe<std::uint32_t>(out, static_cast<std::uint32_t>(layer.output_dim()));
    WriteLe<std::uint8_t>(out, static_cast<std::uint8_t>(layer.activation()));
    WriteLe<std::uint8_t>(out, static_cast<std::uint8_t>(layer.norm()));
  }
  for (const auto& layer : network.layers()) {
    for (Index i = 0; i < layer.weights().size(); ++i) {
      WriteLe<double>(out, layer.weights().data()[i]);
    }
    for (Index i = 0; i < layer.biases().size(); ++i) {
      WriteLe<double>(out, layer.biases()(i));
    }
    if (layer.norm() == Norm::kBatch) {
      for (Index i = 0; i < layer.output_dim(); ++i) {
        WriteLe<double>(out, layer.batch_norm().running_mean(i));
      }
      for (Index i = 0; i < layer.output_dim(); ++i) {
        WriteLe<double>(out, layer.batch_norm().running_var(i));
      }
    }
  }
  if (!out) throw IoError("failed to write network snapshot");
}

Network LoadSnapshot(std::istream& in) {
  std::array<char, 4> magic{};
  in.read(magic.data(), magic.size());
  if (!in || magic != kSnapshotMagic) {
    throw IoError("not a network snapshot (bad magic)");
  }
  const auto version = ReadLe<std::uint32_t>(in);
  if (version != kSnapshotVersion) {
    throw IoError("unsupported snapshot version " + std::to_string(version));
  }
  const auto count = ReadLe<std::uint32_t>(in);
  if (count == 0 || count > 64) throw IoError("implausible layer count");
  std::vector<DenseLayer> layers;
  for (std::uint32_t l = 0; l < count; ++l) {
    const auto input = ReadLe<std::uint32_t>(in);
    const auto side = ReadLe<std::uint32_t>(in);
    const auto output = ReadLe<std::uint32_t>(in);
    const auto activation = ReadLe<std::uint8_t>(in);
    const auto norm = ReadLe<std::uint8_t>(in);
    if (activation > 2 || norm > 2) throw IoError("bad layer tag in snapshot");
    layers.emplace_back(input, side, output,
                        static_cast<Activation>(activation),
                        static_cast<Norm>(norm));
  }
  for (auto& layer : layers) {
    for (Index i = 0; i < layer.weights().size(); ++i) {
      layer.weights().data()[i] = ReadLe<double>(in);
    }
    for (Index i = 0; i < layer.biases().size(); ++i) {
      layer.biases()(i) = ReadLe<double>(in);
    }
    if (layer.norm() == Norm::kBatch) {
      for (Index i = 0; i < layer.output_dim(); ++i) {
        layer.batch_norm().running_mean(i) = ReadLe<double>(in);
      }
      for (Index i = 0; i < layer.output_dim(); ++i) {
        layer.batch_norm().running_var(i) = ReadLe<double>(in);
      }
    }
  }
  return Network(std::move(layers));
}

}  // namespace bidlearn::nn
