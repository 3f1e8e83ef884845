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

#include <cmath>
#include <limits>
#include <random>
#include <span>
#include <sstream>
#include <vector>

#include <gtest/gtest.h>

#include "bidlearn/error.h"
#include "support/gradient_check.h"
#include "support/reference_net.h"

namespace bidlearn::nn {
namespace {

using testing::ReferenceForward;
using testing::Rows;
using testing::ToRows;
using testing::ToTensor;

Tensor2 Matrix(std::initializer_list<std::initializer_list<double>> rows) {
  Rows r;
  for (const auto& row : rows) r.emplace_back(row);
  return ToTensor(r);
}

Network SingleLayer(Index in, Index out, Activation a, Norm n = Norm::kNone) {
  std::vector<DenseLayer> layers;
  layers.emplace_back(in, 0, out, a, n);
  layers[0].weights().setZero();
  layers[0].biases().setZero();
  return Network(std::move(layers));
}

TEST(ForwardTest, ZeroLinearNetGivesZeros) {
  Network net = SingleLayer(3, 2, Activation::kLinear);
  const Tensor2 y = net.Forward(Matrix({{1, -2, 3}, {4, 5, 6}}), Mode::kEval);
  EXPECT_TRUE((y.array() == 0.0).all());
}

TEST(ForwardTest, TanhOfZeroIsZero) {
  Network net = SingleLayer(1, 1, Activation::kTanh);
  net.mutable_layers()[0].weights()(0, 0) = 1.0;
  EXPECT_EQ(net.Forward(Matrix({{0.0}}), Mode::kEval)(0, 0), 0.0);
}

TEST(ForwardTest, HandMultiply) {
  Network net = SingleLayer(2, 1, Activation::kLinear);
  net.mutable_layers()[0].weights() << 1.0, 2.0;
  net.mutable_layers()[0].biases() << 0.5;
  EXPECT_DOUBLE_EQ(net.Forward(Matrix({{3, 4}}), Mode::kEval)(0, 0), 11.5);
}

TEST(ForwardTest, TanhOutputBounded) {
  std::mt19937_64 rng(3);
  Network actor = MakeActor(2, 8, 6, Norm::kNone, rng);
  std::uniform_real_distribution<double> wide(-1e6, 1e6);
  for (int trial = 0; trial < 200; ++trial) {
    const Tensor2 y =
        actor.Forward(Matrix({{wide(rng), wide(rng)}}), Mode::kEval);
    EXPECT_GE(y(0, 0), -1.0);
    EXPECT_LE(y(0, 0), 1.0);
  }
  // Away from double-precision saturation the bound is strict.
  Network net = SingleLayer(1, 1, Activation::kTanh);
  net.mutable_layers()[0].weights()(0, 0) = 1.0;
  for (double x : {-15.0, -1.0, 0.5, 15.0}) {
    const double y = net.Forward(Matrix({{x}}), Mode::kEval)(0, 0);
    EXPECT_GT(y, -1.0);
    EXPECT_LT(y, 1.0);
  }
}

TEST(ForwardTest, DimensionMismatchIsConfigError) {
  Network net = SingleLayer(3, 2, Activation::kLinear);
  EXPECT_THROW(net.Forward(Matrix({{1, 2}}), Mode::kEval), ConfigError);
}

TEST(ForwardTest, NonFiniteOutputNamesLayer) {
  Network net = SingleLayer(1, 1, Activation::kLinear);
  net.mutable_layers()[0].weights()(0, 0) = 1.0;
  const double inf = std::numeric_limits<double>::infinity();
  try {
    net.Forward(Matrix({{inf}}), Mode::kEval);
    FAIL() << "expected NumericError";
  } catch (const NumericError& e) {
    EXPECT_NE(std::string(e.what()).find("layer 0"), std::string::npos);
  }
}

TEST(ForwardTest, EvalIsBitDeterministic) {
  std::mt19937_64 rng(5);
  Network critic = MakeCritic(2, 1, 16, 12, Norm::kLayer, rng);
  const Tensor2 x = Matrix({{0.1, -0.4, 0.7}, {0.3, 0.2, -0.9}});
  const Tensor2 a = critic.Forward(x, Mode::kEval);
  const Tensor2 b = critic.Forward(x, Mode::kEval);
  EXPECT_TRUE((a.array() == b.array()).all());
}

TEST(ForwardTest, MatchesScalarReference) {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (Norm norm : {Norm::kNone, Norm::kLayer, Norm::kBatch}) {
    for (Mode mode : {Mode::kTrain, Mode::kEval}) {
      Network critic = MakeCritic(3, 1, 9, 7, norm, rng);
      Rows x(6, std::vector<double>(4));
      for (auto& row : x) {
        for (double& v : row) v = normal(rng);
      }
      const Rows want = ReferenceForward(critic, x, mode);
      const Rows got = ToRows(critic.Forward(ToTensor(x), mode));
      for (std::size_t r = 0; r < want.size(); ++r) {
        EXPECT_NEAR(got[r][0], want[r][0], 1e-12)
            << ToString(norm) << " row " << r;
      }
    }
  }
}

TEST(BackwardTest, LinearWeightGradEqualsInput) {
  Network net = SingleLayer(3, 1, Activation::kLinear);
  net.Forward(Matrix({{2, -1, 5}}), Mode::kEval);
  const Gradients g = net.Backward(Matrix({{1.0}}));
  EXPECT_EQ(g.layers[0].weights(0, 0), 2.0);
  EXPECT_EQ(g.layers[0].weights(0, 1), -1.0);
  EXPECT_EQ(g.layers[0].weights(0, 2), 5.0);
  EXPECT_EQ(g.layers[0].biases(0), 1.0);
}

TEST(BackwardTest, TanhAtZeroPassesWeight) {
  Network net = SingleLayer(1, 1, Activation::kTanh);
  net.mutable_layers()[0].weights()(0, 0) = 0.7;
  net.Forward(Matrix({{0.0}}), Mode::kEval);
  EXPECT_DOUBLE_EQ(net.Backward(Matrix({{1.0}})).input(0, 0), 0.7);
}

TEST(BackwardTest, BeforeForwardIsStateError) {
  Network net = SingleLayer(2, 1, Activation::kLinear);
  EXPECT_THROW(net.Backward(Matrix({{1.0}})), StateError);
}

TEST(BackwardTest, LeavesParametersUnchanged) {
  std::mt19937_64 rng(2);
  Network critic = MakeCritic(2, 1, 8, 8, Norm::kLayer, rng);
  const Network before = critic;
  critic.Forward(Matrix({{0.1, 0.2, 0.3}, {0.4, 0.5, 0.6}}), Mode::kTrain);
  critic.Backward(Matrix({{1.0}, {-1.0}}));
  for (std::size_t l = 0; l < critic.layers().size(); ++l) {
    EXPECT_TRUE(critic.layers()[l].weights() == before.layers()[l].weights());
    EXPECT_TRUE(critic.layers()[l].biases() == before.layers()[l].biases());
  }
}

TEST(GradientCheckTest, EveryCombinationAgreesWithFiniteDifferences) {
  std::mt19937_64 rng(20260101);
  for (const testing::GradientCase& gc : testing::AllGradientCases()) {
    for (int trial = 0; trial < 10; ++trial) {
      const testing::GradientCheckResult r = RunGradientCheck(gc, rng);
      EXPECT_LE(r.relative_error, 1e-4) << Describe(gc) << " trial " << trial;
      EXPECT_GT(r.fd_norm, 0.0) << Describe(gc);
    }
  }
}

// The tied-row shortcut must be invisible: same outputs and gradients as the
// row-by-row computation.
TEST(TiedRowsTest, MatchesNaivePath) {
  for (Norm norm : {Norm::kNone, Norm::kLayer, Norm::kBatch}) {
    std::mt19937_64 rng(7);
    Network tied = MakeCritic(1, 1, 12, 10, norm, rng);
    Network naive = tied;
    naive.set_tie_identical_rows(false);
    std::normal_distribution<double> normal(0.0, 1.0);
    Rows x(5, {0.25, 0.0});
    for (auto& row : x) row[1] = normal(rng);
    Rows up(5, {0.0});
    for (auto& row : up) row[0] = normal(rng);
    for (Mode mode : {Mode::kTrain, Mode::kEval}) {
      const Tensor2 a = tied.Forward(ToTensor(x), mode);
      const Tensor2 b = naive.Forward(ToTensor(x), mode);
      EXPECT_LT((a - b).cwiseAbs().maxCoeff(), 1e-12) << ToString(norm);
      const Gradients ga = tied.Backward(ToTensor(up));
      const Gradients gb = naive.Backward(ToTensor(up));
      for (std::size_t l = 0; l < ga.layers.size(); ++l) {
        EXPECT_LT((ga.layers[l].weights - gb.layers[l].weights)
                      .cwiseAbs()
                      .maxCoeff(),
                  1e-10)
            << ToString(norm) << " layer " << l;
        EXPECT_LT(
            (ga.layers[l].biases - gb.layers[l].biases).cwiseAbs().maxCoeff(),
            1e-10);
      }
      EXPECT_LT(std::abs(ga.input.col(0).sum() - gb.input.col(0).sum()),
                1e-10);
      EXPECT_LT((ga.input.col(1) - gb.input.col(1)).cwiseAbs().maxCoeff(),
                1e-10);
    }
    for (std::size_t l = 0; l < tied.layers().size(); ++l) {
      const auto& sa = tied.layers()[l].batch_norm();
      const auto& sb = naive.layers()[l].batch_norm();
      EXPECT_LT((sa.running_mean - sb.running_mean).cwiseAbs().maxCoeff(),
                1e-12);
      EXPECT_LT((sa.running_var - sb.running_var).cwiseAbs().maxCoeff(),
                1e-12);
    }
  }
}

TEST(NormalizationTest, NoneIsIdentity) {
  const Tensor2 x = Matrix({{1, -2}, {3, 4}});
  EXPECT_TRUE(ApplyNormalization(Norm::kNone, x, nullptr, Mode::kTrain) == x);
}

TEST(NormalizationTest, LayerExample) {
  const Tensor2 y =
      ApplyNormalization(Norm::kLayer, Matrix({{1, 3}}), nullptr, Mode::kEval);
  EXPECT_NEAR(y(0, 0), -1.0, 1e-5);
  EXPECT_NEAR(y(0, 1), 1.0, 1e-5);
}

TEST(NormalizationTest, BatchTrainExample) {
  BatchNormState state = BatchNormState::Zero(1);
  const Tensor2 y = ApplyNormalization(Norm::kBatch, Matrix({{0}, {2}, {4}}),
                                       &state, Mode::kTrain);
  EXPECT_NEAR(y(0, 0), -1.2247, 1e-4);
  EXPECT_NEAR(y(1, 0), 0.0, 1e-12);
  EXPECT_NEAR(y(2, 0), 1.2247, 1e-4);
  // Running stats move by momentum 0.1 towards batch mean 2 and unbiased
  // variance 4.
  EXPECT_NEAR(state.running_mean(0), 0.2, 1e-12);
  EXPECT_NEAR(state.running_var(0), 0.9 * 1.0 + 0.1 * 4.0, 1e-12);
}

TEST(NormalizationTest, BatchEvalUsesRunningStats) {
  BatchNormState state = BatchNormState::Zero(1);
  state.running_mean(0) = 1.0;
  state.running_var(0) = 4.0;
  const Tensor2 y =
      ApplyNormalization(Norm::kBatch, Matrix({{5}}), &state, Mode::kEval);
  EXPECT_NEAR(y(0, 0), 4.0 / std::sqrt(4.0 + kNormEpsilon), 1e-12);
}

TEST(NormalizationTest, BatchTrainSingleRowFails) {
  BatchNormState state = BatchNormState::Zero(2);
  EXPECT_THROW(ApplyNormalization(Norm::kBatch, Matrix({{1, 2}}), &state,
                                  Mode::kTrain),
               ValidationError);
}

TEST(NormalizationTest, LayerNeedsTwoFeatures) {
  EXPECT_THROW(ApplyNormalization(Norm::kLayer, Matrix({{1}}), nullptr,
                                  Mode::kTrain),
               ValidationError);
}

TEST(NormalizationTest, LayerRowMomentsProperty) {
  std::mt19937_64 rng(13);
  std::uniform_int_distribution<int> width(2, 40);
  std::normal_distribution<double> normal(0.0, 5.0);
  for (int trial = 0; trial < 200; ++trial) {
    const int cols = width(rng);
    Tensor2 x(3, cols);
    for (Index i = 0; i < x.size(); ++i) x.data()[i] = normal(rng) + trial;
    const Tensor2 y = ApplyNormalization(Norm::kLayer, x, nullptr, Mode::kEval);
    for (Index r = 0; r < y.rows(); ++r) {
      const double mean = y.row(r).mean();
      const double var = (y.row(r).array() - mean).square().mean();
      const double mx = x.row(r).mean();
      const double vx = (x.row(r).array() - mx).square().mean();
      EXPECT_NEAR(mean, 0.0, 1e-6);
      EXPECT_NEAR(var, vx / (vx + kNormEpsilon), 1e-9);
    }
  }
}

TEST(BatchNormStateTest, RunningVarStaysNonNegative) {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> normal(0.0, 1.0);
  BatchNormState state = BatchNormState::Zero(4);
  for (int step = 0; step < 500; ++step) {
    Tensor2 x(step % 7 == 0 ? 2 : 8, 4);
    for (Index i = 0; i < x.size(); ++i) x.data()[i] = normal(rng);
    if (step % 11 == 0) x.row(1) = x.row(0);
    ApplyNormalization(Norm::kBatch, x, &state, Mode::kTrain);
    EXPECT_TRUE((state.running_var.array() >= 0.0).all());
  }
}

TEST(AdamTest, ZeroGradientIsFixedPoint) {
  std::mt19937_64 rng(1);
  Network net = MakeActor(2, 4, 3, Norm::kLayer, rng);
  const Network before = net;
  AdamState state = MakeAdamState(net, 1e-3);
  net.Forward(Matrix({{0.1, 0.2}, {0.3, 0.4}}), Mode::kTrain);
  Gradients g = net.Backward(Matrix({{0.0}, {0.0}}));
  for (int i = 0; i < 5; ++i) AdamStep(net, g, state);
  for (std::size_t l = 0; l < net.layers().size(); ++l) {
    EXPECT_TRUE(net.layers()[l].weights() == before.layers()[l].weights());
    EXPECT_TRUE(net.layers()[l].biases() == before.layers()[l].biases());
  }
  EXPECT_EQ(state.step_count, 5);
}

TEST(AdamTest, FirstStepByHand) {
  double param = 0.0;
  const double grad = 1.0;
  std::vector<std::span<double>> params{std::span<double>(&param, 1)};
  std::vector<std::span<const double>> grads{
      std::span<const double>(&grad, 1)};
  AdamState state;
  state.lr = 0.1;
  AdamStep(params, grads, state);
  // m_hat = 1, v_hat = 1, step = 0.1 / (1 + 1e-8).
  EXPECT_NEAR(param, -0.1 / (1.0 + 1e-8), 1e-15);
  EXPECT_EQ(state.step_count, 1);
}

TEST(AdamTest, ConvergesOnQuadratic) {
  double x = 1.0;
  double grad = 0.0;
  std::vector<std::span<double>> params{std::span<double>(&x, 1)};
  std::vector<std::span<const double>> grads{
      std::span<const double>(&grad, 1)};
  AdamState state;
  state.lr = 1e-2;
  for (int i = 0; i < 500; ++i) {
    grad = 2.0 * x;
    AdamStep(params, grads, state);
  }
  EXPECT_LT(std::abs(x), 1e-2);
}

TEST(AdamTest, RejectsNonPositiveRate) {
  std::mt19937_64 rng(1);
  Network net = MakeActor(1, 3, 3, Norm::kNone, rng);
  EXPECT_THROW(MakeAdamState(net, 0.0), ValidationError);
}

TEST(SoftUpdateTest, TauOneCopiesExactly) {
  std::mt19937_64 rng(4);
  Network source = MakeCritic(2, 1, 6, 5, Norm::kBatch, rng);
  Network target = MakeCritic(2, 1, 6, 5, Norm::kBatch, rng);
  source.mutable_layers()[0].batch_norm().running_mean.setConstant(0.3);
  SoftUpdate(target, source, 1.0);
  for (std::size_t l = 0; l < source.layers().size(); ++l) {
    EXPECT_TRUE(target.layers()[l].weights() == source.layers()[l].weights());
    EXPECT_TRUE(target.layers()[l].biases() == source.layers()[l].biases());
    EXPECT_TRUE(target.layers()[l].batch_norm().running_mean ==
                source.layers()[l].batch_norm().running_mean);
  }
}

TEST(SoftUpdateTest, MidpointAndGeometricRecursion) {
  Network target = SingleLayer(1, 1, Activation::kLinear);
  Network source = SingleLayer(1, 1, Activation::kLinear);
  source.mutable_layers()[0].weights()(0, 0) = 2.0;
  SoftUpdate(target, source, 0.5);
  EXPECT_DOUBLE_EQ(target.layers()[0].weights()(0, 0), 1.0);

  target.mutable_layers()[0].weights()(0, 0) = 0.0;
  source.mutable_layers()[0].weights()(0, 0) = 1.0;
  for (int i = 0; i < 1000; ++i) SoftUpdate(target, source, 1e-3);
  EXPECT_NEAR(target.layers()[0].weights()(0, 0),
              1.0 - std::pow(1.0 - 1e-3, 1000), 1e-12);
  EXPECT_NEAR(target.layers()[0].weights()(0, 0), 0.632, 1e-3);
}

TEST(SoftUpdateTest, ArchitectureMismatchIsConfigError) {
  Network a = SingleLayer(2, 1, Activation::kLinear);
  Network b = SingleLayer(3, 1, Activation::kLinear);
  EXPECT_THROW(SoftUpdate(a, b, 0.5), ConfigError);
  EXPECT_THROW(SoftUpdate(a, a, 0.0), ValidationError);
}

TEST(SnapshotTest, RoundTripIsExact) {
  std::mt19937_64 rng(9);
  Network critic = MakeCritic(2, 1, 7, 5, Norm::kBatch, rng);
  critic.mutable_layers()[1].batch_norm().running_var.setConstant(2.5);
  std::stringstream buffer;
  SaveSnapshot(critic, buffer);
  Network loaded = LoadSnapshot(buffer);
  ASSERT_TRUE(loaded.SameArchitecture(critic));
  for (std::size_t l = 0; l < critic.layers().size(); ++l) {
    EXPECT_TRUE(loaded.layers()[l].weights() == critic.layers()[l].weights());
    EXPECT_TRUE(loaded.layers()[l].biases() == critic.layers()[l].biases());
    EXPECT_TRUE(loaded.layers()[l].batch_norm().running_var ==
                critic.layers()[l].batch_norm().running_var);
  }
}

TEST(SnapshotTest, RejectsGarbageAndTruncation) {
  std::stringstream garbage("not a snapshot at all");
  EXPECT_THROW(LoadSnapshot(garbage), IoError);

  std::mt19937_64 rng(9);
  Network actor = MakeActor(1, 4, 4, Norm::kNone, rng);
  std::stringstream full;
  SaveSnapshot(actor, full);
  const std::string bytes = full.str();
  std::stringstream cut(bytes.substr(0, bytes.size() / 2));
  EXPECT_THROW(LoadSnapshot(cut), IoError);
}

TEST(ArchitectureTest, ActorAndCriticShapes) {
  std::mt19937_64 rng(1);
  Network actor = MakeActor(2, 400, 300, Norm::kLayer, rng);
  Network critic = MakeCritic(2, 1, 400, 300, Norm::kLayer, rng);
  EXPECT_EQ(actor.input_dim(), 2);
  EXPECT_EQ(actor.output_dim(), 1);
  EXPECT_EQ(critic.input_dim(), 3);
  EXPECT_EQ(critic.output_dim(), 1);
  EXPECT_EQ(critic.layers()[1].side_dim(), 1);
  EXPECT_EQ(actor.layers().back().norm(), Norm::kNone);
  EXPECT_EQ(critic.layers().back().norm(), Norm::kNone);
  for (const DenseLayer& layer : actor.layers()) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(layer.fan_in()));
    EXPECT_LE(layer.weights().cwiseAbs().maxCoeff(), bound);
    EXPECT_LE(layer.biases().cwiseAbs().maxCoeff(), bound);
  }
}

}  // namespace
}  // namespace bidlearn::nn
