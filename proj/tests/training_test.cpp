// Copyright 2026 The permsym Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "permsym/training.hpp"
#include "support/test_util.hpp"

namespace permsym {
namespace {

using testing::random_network;

Network scalar_net(double w) {
  Network net;
  net.hidden_activation = Activation::identity;
  net.output_activation = Activation::identity;
  net.layers.push_back({Matrix{{w}}, std::nullopt});
  return net;
}

// 2-3-1 tanh regression fixture: 8 samples of y = x1 * x2 + 0.5 x1.
Network fixture_231() {
  Network net;
  net.hidden_activation = Activation::tanh;
  net.output_activation = Activation::identity;
  net.layers.push_back({Matrix{{0.5, -0.3}, {0.2, 0.8}, {-0.6, 0.1}}, std::vector<double>{0.1, -0.2, 0.05}});
  net.layers.push_back({Matrix{{0.7, -0.4, 0.3}}, std::vector<double>{0.0}});
  return net;
}

Dataset fixture_data() {
  Dataset data;
  const double xs[8][2] = {{-1, -1}, {-1, 0.5}, {-0.5, 1}, {0, 0}, {0.25, -0.75}, {0.5, 0.5}, {1, -0.5}, {1, 1}};
  for (const auto& x : xs) data.samples.push_back({{x[0], x[1]}, {x[0] * x[1] + 0.5 * x[0]}});
  return data;
}

// Frozen from a reference run of the fixture below (200 steps, lr 0.05).
constexpr double kToyFinalLoss = 0.17611895611965289;

double relative_gradient_error(const GradientSet& a, const GradientSet& b) {
  return max_deviation(a, b);
}

TEST(Backprop, ZeroAtExactFit) {
  Network net;
  net.hidden_activation = Activation::tanh;
  net.layers.push_back({Matrix{{0.3, -0.2}, {0.1, 0.4}}, std::vector<double>{0.0, 0.1}});
  net.layers.push_back({Matrix{{1.0, -1.0}}, std::nullopt});
  Dataset data;
  for (const auto& x : std::vector<std::vector<double>>{{1, 2}, {-0.5, 0.25}})
    data.samples.push_back({x, predict(net, x)});
  const auto g = backprop(net, data);
  for (double v : testing::flatten(g.layers)) EXPECT_EQ(v, 0.0);
}

TEST(Backprop, SingleLayerLeastSquaresClosedForm) {
  // W = [[1,2],[3,4]], x = (1,1), y = (0,1): residual Wx - y = (3, 6);
  // gradient 2 r x^T / n_L = [[3,3],[6,6]].
  Network net;
  net.hidden_activation = Activation::identity;
  net.layers.push_back({Matrix{{1, 2}, {3, 4}}, std::nullopt});
  const Dataset data{{{{1, 1}, {0, 1}}}};
  const auto g = backprop(net, data);
  EXPECT_EQ(g.layers[0].weights, (Matrix{{3, 3}, {6, 6}}));
  EXPECT_DOUBLE_EQ(loss(net, data), 22.5);
}

TEST(Backprop, MatchesFiniteDifferencesOnTanhNet) {
  Rng rng(21);
  const auto net = random_network(rng, {2, 3, 1}, Activation::tanh, Activation::identity, true);
  const auto data = testing::random_dataset(rng, net, 6);
  EXPECT_LE(relative_gradient_error(backprop(net, data), finite_diff(net, data)), 1e-5);
}

TEST(Backprop, MatchesFiniteDifferencesAcrossActivations) {
  Rng rng(22);
  for (int trial = 0; trial < 80; ++trial) {
    const auto arch = testing::random_architecture(rng, 1 + rng.below(3), 5);
    const auto net = random_network(rng, arch, kAllActivations[trial % 4],
                                    kAllActivations[(trial / 4) % 4], trial % 2 == 0);
    const auto data = testing::random_dataset(rng, net, 1 + rng.below(5));
    EXPECT_LE(relative_gradient_error(backprop(net, data), finite_diff(net, data)), 1e-5)
        << "trial " << trial;
  }
}

TEST(Backprop, RejectsMismatchedData) {
  const auto net = fixture_231();
  EXPECT_THROW(backprop(net, Dataset{{{{1, 2, 3}, {1}}}}), InputError);
  EXPECT_THROW(backprop(net, Dataset{}), InputError);
}

TEST(FiniteDiff, ZeroForConstantOutput) {
  Network net;
  net.hidden_activation = Activation::identity;
  net.layers.push_back({Matrix(2, 3), std::nullopt});
  net.layers.push_back({Matrix(1, 2), std::nullopt});
  const Dataset data{{{{0, 0, 0}, {0}}, {{0, 0, 0}, {0}}}};
  for (double v : testing::flatten(finite_diff(net, data).layers)) EXPECT_EQ(v, 0.0);
}

TEST(FiniteDiff, QuadraticOneParameter) {
  // L(w) = (w - 0)^2 at w = 3 -> 6.
  const auto g = finite_diff(scalar_net(3.0), Dataset{{{{1}, {0}}}});
  EXPECT_NEAR(g.layers[0].weights(0, 0), 6.0, 1e-8);
  EXPECT_THROW(finite_diff(scalar_net(3.0), Dataset{{{{1}, {0}}}}, LossKind::mean_squared_error, 0.0),
               InputError);
}

TEST(GradientEquivariance, PermutingNetPermutesGradient) {
  Rng rng(23);
  for (int trial = 0; trial < 50; ++trial) {
    const auto net = random_network(rng, {3, 4, 2}, testing::random_activation(rng),
                                    Activation::identity, trial % 2 == 0);
    const auto data = testing::random_dataset(rng, net, 5);
    const auto p = NetworkPermutation::random(net.hidden_widths(), rng);
    const auto lhs = backprop(apply_permutation(net, p), data);
    const auto rhs = apply_permutation(backprop(net, data), p);
    EXPECT_LE(max_deviation(lhs, rhs), 1e-9);
  }
}

TEST(SgdTrain, FixedPointStaysPut) {
  const auto net = scalar_net(0.0);
  const auto traj = sgd_train(net, Dataset{{{{1}, {0}}}}, {0.1, 5, 0, LossKind::mean_squared_error});
  ASSERT_EQ(traj.size(), 6u);
  for (const auto& n : traj) EXPECT_EQ(n, net);
}

TEST(SgdTrain, QuadraticHalvesEachStep) {
  const auto traj = sgd_train(scalar_net(3.0), Dataset{{{{1}, {0}}}}, {0.25, 3, 0, LossKind::mean_squared_error});
  ASSERT_EQ(traj.size(), 4u);
  EXPECT_EQ(traj[1].layers[0].weights(0, 0), 1.5);
  EXPECT_EQ(traj[2].layers[0].weights(0, 0), 0.75);
  EXPECT_EQ(traj[3].layers[0].weights(0, 0), 0.375);
}

TEST(SgdTrain, ToyRegressionFixture) {
  const auto net = fixture_231();
  const auto data = fixture_data();
  const auto traj = sgd_train(net, data, {0.05, 200, 0, LossKind::mean_squared_error});
  ASSERT_EQ(traj.size(), 201u);
  double previous = loss(traj[0], data);
  for (std::size_t k = 1; k < traj.size(); ++k) {
    const double current = loss(traj[k], data);
    EXPECT_LT(current, previous) << "step " << k;
    previous = current;
  }
  EXPECT_NEAR(previous, kToyFinalLoss, 1e-12);
  EXPECT_EQ(traj, sgd_train(net, data, {0.05, 200, 0, LossKind::mean_squared_error}));
}

TEST(SgdTrain, DivergenceNamesStep) {
  // lr 10 on L = w^2 multiplies w by -19 per step until it overflows.
  try {
    sgd_train(scalar_net(3.0), Dataset{{{{1}, {0}}}}, {10.0, 1000, 0, LossKind::mean_squared_error});
    FAIL() << "expected divergence";
  } catch (const DivergenceError& e) {
    EXPECT_GT(e.step(), 100u);
    EXPECT_LT(e.step(), 300u);
  }
}

TEST(SgdTrain, RejectsBadConfig) {
  const Dataset data{{{{1}, {0}}}};
  EXPECT_THROW(sgd_train(scalar_net(1), data, {0.0, 1, 0, LossKind::mean_squared_error}), InputError);
  EXPECT_THROW(sgd_train(scalar_net(1), data, {0.1, 0, 0, LossKind::mean_squared_error}), InputError);
}

TEST(EquivarianceExperiment, IdentityGivesExactZero) {
  const auto net = fixture_231();
  const auto p = NetworkPermutation::identity(net.hidden_widths());
  const auto r = equivariance_experiment(net, p, fixture_data(), {0.05, 50, 0, LossKind::mean_squared_error});
  EXPECT_EQ(r.max_gradient_deviation, 0.0);
  EXPECT_EQ(r.max_trajectory_deviation, 0.0);
  EXPECT_EQ(r.steps_compared, 51u);
}

TEST(EquivarianceExperiment, SingleSwitchTracksTrajectory) {
  const auto net = fixture_231();
  const auto p = NetworkPermutation::switch_of(net.hidden_widths(), 0, 0, 2);
  const auto r = equivariance_experiment(net, p, fixture_data(), {0.05, 50, 0, LossKind::mean_squared_error});
  EXPECT_LE(r.max_trajectory_deviation, 1e-6);
  EXPECT_LE(r.max_gradient_deviation, 1e-9);
  EXPECT_NEAR(r.final_loss, r.final_loss_permuted, 1e-12);
}

TEST(EquivarianceExperiment, RandomThreeFourTwoGradient) {
  Rng rng(24);
  const auto net = random_network(rng, {3, 4, 2}, Activation::sigmoid, Activation::identity, true);
  const auto data = testing::random_dataset(rng, net, 10);
  const auto p = NetworkPermutation::random(net.hidden_widths(), rng);
  const auto r = equivariance_experiment(net, p, data, {0.1, 20, 0, LossKind::mean_squared_error});
  EXPECT_LE(r.max_gradient_deviation, 1e-9);
  EXPECT_LE(r.max_trajectory_deviation, 1e-6);
}

}  // namespace
}  // namespace permsym
