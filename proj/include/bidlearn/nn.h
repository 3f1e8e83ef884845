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

#ifndef BIDLEARN_NN_H_
#define BIDLEARN_NN_H_

// Small fixed-shape multilayer perceptrons with hand-written reverse mode,
// Adam, soft (Polyak) target updates and layer/batch normalization.
//
// A network is an ordered list of dense layers. Any layer may take a "side"
// input that is concatenated to the previous layer's output; the critic uses
// this to inject the action at its second layer. The input batch of a network
// is laid out as [main input | side input of layer 1 | side input of layer 2
// | ...] in layer order.
//
// Tied rows: when every row of an input segment (the main input or one side
// input) is identical, the segment is evaluated once and treated as a single
// input shared by the whole batch. The forward result is the same as the
// row-by-row computation. In Backward, the gradient of such a segment is the
// sum over rows; Gradients::input spreads it evenly over the rows. Parameter
// gradients are exact either way.

#include <cstdint>
#include <iosfwd>
#include <random>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace bidlearn::nn {

using Index = Eigen::Index;
using Tensor2 =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

enum class Activation { kReLU, kTanh, kLinear };
enum class Norm { kNone, kLayer, kBatch };
enum class Mode { kTrain, kEval };

inline constexpr double kNormEpsilon = 1e-5;
inline constexpr double kBatchNormMomentum = 0.1;

std::string_view ToString(Activation activation);
std::string_view ToString(Norm norm);

struct BatchNormState {
  Vector running_mean;  // starts at 0
  Vector running_var;   // starts at 1, never negative
  double momentum = kBatchNormMomentum;
  Mode mode = Mode::kTrain;  // mode of the most recent forward pass

  static BatchNormState Zero(Index features);
};

// Saved by ApplyNormalization for the backward pass.
struct NormalizationCache {
  Norm scheme = Norm::kNone;
  Mode mode = Mode::kEval;
  Tensor2 normalized;  // x-hat
  Vector inv_std;      // per row (layer) or per column (batch)
  bool collapsed = false;
};

// Normalizes a batch of pre-activations. `state` is only read for kBatch and
// may be null otherwise. Batch statistics in Train mode need at least two
// rows; fewer throws ValidationError.
Tensor2 ApplyNormalization(Norm scheme, const Tensor2& pre,
                           BatchNormState* state, Mode mode,
                           NormalizationCache* cache = nullptr);

// Vector-Jacobian product of ApplyNormalization at the cached point.
Tensor2 NormalizationBackward(const NormalizationCache& cache,
                              const Tensor2& upstream);

class DenseLayer {
 public:
  DenseLayer(Index input_dim, Index side_dim, Index output_dim,
             Activation activation, Norm norm);

  Index input_dim() const { return input_dim_; }
  Index side_dim() const { return side_dim_; }
  Index output_dim() const { return output_dim_; }
  Index fan_in() const { return input_dim_ + side_dim_; }
  Activation activation() const { return activation_; }
  Norm norm() const { return norm_; }

  // output_dim x fan_in; the last side_dim columns act on the side input.
  Tensor2& weights() { return weights_; }
  const Tensor2& weights() const { return weights_; }
  Vector& biases() { return biases_; }
  const Vector& biases() const { return biases_; }
  BatchNormState& batch_norm() { return batch_norm_; }
  const BatchNormState& batch_norm() const { return batch_norm_; }

  // Weights and biases uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)].
  void InitializeUniform(std::mt19937_64& rng);

 private:
  Index input_dim_;
  Index side_dim_;
  Index output_dim_;
  Activation activation_;
  Norm norm_;
  Tensor2 weights_;
  Vector biases_;
  BatchNormState batch_norm_;
};

struct LayerGradients {
  Tensor2 weights;
  Vector biases;
};

struct Gradients {
  std::vector<LayerGradients> layers;
  Tensor2 input;  // rows x network input_dim

  std::vector<std::span<const double>> Blocks() const;
};

class Network {
 public:
  explicit Network(std::vector<DenseLayer> layers);

  Index input_dim() const { return input_dim_; }
  Index output_dim() const { return layers_.back().output_dim(); }
  const std::vector<DenseLayer>& layers() const { return layers_; }
  std::vector<DenseLayer>& mutable_layers() { return layers_; }

  // Evaluates the batch and caches everything Backward needs. Throws
  // ConfigError on a dimension mismatch and NumericError naming the layer if
  // any output is not finite.
  Tensor2 Forward(const Tensor2& batch, Mode mode);

  // Gradients of sum(upstream .* output) with respect to every parameter and
  // the input, at the most recent Forward. Parameters are not modified.
  // Throws StateError without a preceding Forward.
  Gradients Backward(const Tensor2& upstream) const;

  // Weights then biases of each layer, in layer order.
  std::vector<std::span<double>> ParameterBlocks();
  std::vector<std::span<const double>> ParameterBlocks() const;
  Index ParameterCount() const;

  bool SameArchitecture(const Network& other) const;

  // Row tying is on by default; turning it off forces the row-by-row path.
  void set_tie_identical_rows(bool enabled) { tie_identical_rows_ = enabled; }
  void ClearCache();

 private:
  struct LayerCache {
    Tensor2 main;  // one row when tied
    bool main_tied = false;
    Tensor2 side;
    bool side_tied = false;
    bool out_tied = false;
    NormalizationCache norm;
    Tensor2 output;
  };

  std::vector<DenseLayer> layers_;
  Index input_dim_ = 0;
  std::vector<LayerCache> cache_;
  Index cached_rows_ = 0;
  bool has_cache_ = false;
  bool tie_identical_rows_ = true;
};

// Actor: state -> h1 (ReLU) -> h2 (ReLU) -> 1 (Tanh).
Network MakeActor(Index state_dim, Index hidden1, Index hidden2, Norm norm,
                  std::mt19937_64& rng);

// Critic: state -> h1 (ReLU); [h1, action] -> h2 (ReLU); h2 -> 1 (linear).
// The action enters at the second layer, so the state passes through one more
// layer than the action does.
Network MakeCritic(Index state_dim, Index action_dim, Index hidden1,
                   Index hidden2, Norm norm, std::mt19937_64& rng);

struct AdamState {
  std::vector<Eigen::ArrayXd> first_moment;
  std::vector<Eigen::ArrayXd> second_moment;
  std::int64_t step_count = 0;
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

AdamState MakeAdamState(const Network& network, double lr);

// One bias-corrected Adam step over matching parameter/gradient blocks.
// Zero-sized moments are allocated on first use.
void AdamStep(std::span<const std::span<double>> params,
              std::span<const std::span<const double>> grads,
              AdamState& state);
void AdamStep(Network& network, const Gradients& grads, AdamState& state);

// target <- tau * source + (1 - tau) * target for every parameter, and for
// batch-norm running statistics.
void SoftUpdate(Network& target, const Network& source, double tau);

// Binary snapshot; layout in docs/snapshot_format.md.
void SaveSnapshot(const Network& network, std::ostream& out);
Network LoadSnapshot(std::istream& in);

}  // namespace bidlearn::nn

#endif  // BIDLEARN_NN_H_
