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

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "permsym/common.hpp"
#include "permsym/network.hpp"
#include "permsym/permutation.hpp"
#include "permsym/symmetry.hpp"

namespace permsym {

/// Loss gradient, one entry per weight and bias, laid out like the network.
struct GradientSet {
  std::vector<LayerWeights> layers;

  friend bool operator==(const GradientSet&, const GradientSet&) = default;
};

inline GradientSet zero_gradient(const Network& net) {
  GradientSet g;
  for (const auto& layer : net.layers) {
    LayerWeights z{Matrix(layer.weights.rows(), layer.weights.cols()), std::nullopt};
    if (layer.bias) z.bias = std::vector<double>(layer.bias->size(), 0.0);
    g.layers.push_back(std::move(z));
  }
  return g;
}

/// A permutation acts on gradients exactly as on weights.
inline GradientSet apply_permutation(const GradientSet& g, const NetworkPermutation& p) {
  return {detail::permute_layers(g.layers, p)};
}

inline double max_deviation(const GradientSet& a, const GradientSet& b) {
  return detail::layers_deviation(a.layers, b.layers);
}

/// Visits every parameter in a fixed order: per layer, weights row-major,
/// then bias.
template <typename Layers, typename Fn>
void for_each_parameter(Layers& layers, Fn&& fn) {
  for (auto& layer : layers) {
    for (auto& w : layer.weights.values()) fn(w);
    if (layer.bias)
      for (auto& b : *layer.bias) fn(b);
  }
}

/// Exact loss gradient by reverse-mode differentiation, samples accumulated
/// in index order.
inline GradientSet backprop(const Network& net, const Dataset& data,
                            LossKind kind = LossKind::mean_squared_error) {
  (void)kind;
  require_valid(net);
  check_dataset(net, data);
  const std::size_t depth = net.layers.size();
  const double scale =
      2.0 / (static_cast<double>(data.size()) * static_cast<double>(net.output_size()));
  GradientSet grad = zero_gradient(net);

  std::vector<std::vector<double>> pre(depth);
  std::vector<std::vector<double>> post(depth);
  for (const auto& sample : data.samples) {
    std::span<const double> previous = sample.input;
    for (std::size_t l = 0; l < depth; ++l) {
      pre[l] = detail::affine(net.layers[l], previous);
      post[l] = pre[l];
      const Activation f = detail::activation_for(net, l);
      for (double& v : post[l]) v = activate(f, v);
      previous = post[l];
    }

    std::vector<double> delta(net.output_size());
    for (std::size_t k = 0; k < delta.size(); ++k)
      delta[k] = scale * (post[depth - 1][k] - sample.target[k]) *
                 activate_derivative(net.output_activation, pre[depth - 1][k]);

    for (std::size_t l = depth; l-- > 0;) {
      const auto& layer = net.layers[l];
      std::span<const double> input = l == 0 ? std::span<const double>(sample.input) : post[l - 1];
      auto& g = grad.layers[l];
      for (std::size_t i = 0; i < layer.neurons(); ++i) {
        auto row = g.weights.row(i);
        for (std::size_t j = 0; j < row.size(); ++j) row[j] += delta[i] * input[j];
        if (g.bias) (*g.bias)[i] += delta[i];
      }
      if (l == 0) break;
      std::vector<double> below(layer.inputs(), 0.0);
      for (std::size_t i = 0; i < layer.neurons(); ++i) {
        const auto row = layer.weights.row(i);
        for (std::size_t j = 0; j < row.size(); ++j) below[j] += row[j] * delta[i];
      }
      for (std::size_t j = 0; j < below.size(); ++j)
        below[j] *= activate_derivative(net.hidden_activation, pre[l - 1][j]);
      delta = std::move(below);
    }
  }
  return grad;
}

/// Central differences (L(w + eps) - L(w - eps)) / (2 eps), one parameter at a time.
inline GradientSet finite_diff(const Network& net, const Dataset& data,
                               LossKind kind = LossKind::mean_squared_error, double eps = 1e-6) {
  if (!(eps > 0.0)) throw InputError("finite_diff: eps must be positive");
  require_valid(net);
  check_dataset(net, data);
  GradientSet grad = zero_gradient(net);
  std::vector<double*> slots;
  for_each_parameter(grad.layers, [&](double& v) { slots.push_back(&v); });

  Network probe = net;
  std::size_t index = 0;
  for_each_parameter(probe.layers, [&](double& w) {
    const double saved = w;
    w = saved + eps;
    const double up = loss(probe, data, kind);
    w = saved - eps;
    const double down = loss(probe, data, kind);
    w = saved;
    *slots[index++] = (up - down) / (2.0 * eps);
  });
  return grad;
}

struct TrainConfig {
  double learning_rate = 0.01;
  std::size_t steps = 100;
  std::uint64_t seed = 0;
  LossKind loss = LossKind::mean_squared_error;
};

inline void validate(const TrainConfig& cfg) {
  if (!(cfg.learning_rate > 0.0) || !std::isfinite(cfg.learning_rate))
    throw InputError("learning rate must be positive and finite");
  if (cfg.steps < 1) throw InputError("steps must be at least 1");
}

/// Full-batch gradient descent. The trajectory holds the initial network
/// followed by the network after each step (steps + 1 entries).
inline std::vector<Network> sgd_train(const Network& net, const Dataset& data,
                                      const TrainConfig& cfg) {
  validate(cfg);
  require_valid(net);
  check_dataset(net, data);
  std::vector<Network> trajectory;
  trajectory.reserve(cfg.steps + 1);
  trajectory.push_back(net);
  for (std::size_t step = 1; step <= cfg.steps; ++step) {
    Network next = trajectory.back();
    GradientSet grad = backprop(next, data, cfg.loss);
    std::vector<const double*> g;
    for_each_parameter(grad.layers, [&](double& v) { g.push_back(&v); });
    std::size_t k = 0;
    bool finite = true;
    for_each_parameter(next.layers, [&](double& w) {
      w -= cfg.learning_rate * *g[k++];
      finite = finite && std::isfinite(w);
    });
    if (!finite) throw DivergenceError(step);
    trajectory.push_back(std::move(next));
  }
  return trajectory;
}

struct EquivarianceReport {
  double max_gradient_deviation = 0.0;
  double max_trajectory_deviation = 0.0;
  std::size_t steps_compared = 0;
  double final_loss = 0.0;           // run started from net
  double final_loss_permuted = 0.0;  // run started from the relabeled net
};

/// Trains from `net` and from apply_permutation(net, p) with the same
/// config, then checks that relabeling commutes with the gradient and with
/// every step of the trajectory.
inline EquivarianceReport equivariance_experiment(const Network& net, const NetworkPermutation& p,
                                                  const Dataset& data, const TrainConfig& cfg) {
  const Network permuted = apply_permutation(net, p);
  EquivarianceReport report;
  report.max_gradient_deviation =
      max_deviation(apply_permutation(backprop(net, data, cfg.loss), p),
                    backprop(permuted, data, cfg.loss));

  const auto original_run = sgd_train(net, data, cfg);
  const auto permuted_run = sgd_train(permuted, data, cfg);
  for (std::size_t k = 0; k < original_run.size(); ++k)
    report.max_trajectory_deviation =
        std::max(report.max_trajectory_deviation,
                 max_deviation(apply_permutation(original_run[k], p), permuted_run[k]));
  report.steps_compared = original_run.size();
  report.final_loss = loss(original_run.back(), data, cfg.loss);
  report.final_loss_permuted = loss(permuted_run.back(), data, cfg.loss);
  return report;
}

}  // namespace permsym
