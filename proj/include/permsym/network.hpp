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

#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "permsym/activation.hpp"
#include "permsym/common.hpp"
#include "permsym/matrix.hpp"

namespace permsym {

/// Weights into one layer: row i holds the incoming weights of neuron i.
struct LayerWeights {
  Matrix weights;
  std::optional<std::vector<double>> bias;

  std::size_t neurons() const noexcept { return weights.rows(); }
  std::size_t inputs() const noexcept { return weights.cols(); }

  friend bool operator==(const LayerWeights&, const LayerWeights&) = default;
};

/// Feed-forward network. layers[0] maps the input to the first hidden
/// layer; layers.back() produces the output. Hidden layers share one
/// activation, the output layer has its own.
struct Network {
  std::vector<LayerWeights> layers;
  Activation hidden_activation = Activation::tanh;
  Activation output_activation = Activation::identity;

  std::size_t depth() const noexcept { return layers.size(); }
  std::size_t input_size() const { return layers.front().inputs(); }
  std::size_t output_size() const { return layers.back().neurons(); }

  /// (n_0, n_1, ..., n_L).
  std::vector<std::size_t> architecture() const {
    std::vector<std::size_t> arch;
    if (layers.empty()) return arch;
    arch.push_back(layers.front().inputs());
    for (const auto& layer : layers) arch.push_back(layer.neurons());
    return arch;
  }

  /// (n_1, ..., n_{L-1}); empty for a single-layer network.
  std::vector<std::size_t> hidden_widths() const {
    std::vector<std::size_t> widths;
    for (std::size_t l = 0; l + 1 < layers.size(); ++l) widths.push_back(layers[l].neurons());
    return widths;
  }

  std::size_t parameter_count() const {
    std::size_t n = 0;
    for (const auto& layer : layers)
      n += layer.weights.size() + (layer.bias ? layer.bias->size() : 0);
    return n;
  }

  friend bool operator==(const Network&, const Network&) = default;
};

struct Sample {
  std::vector<double> input;
  std::vector<double> target;
};

struct Dataset {
  std::vector<Sample> samples;

  bool empty() const noexcept { return samples.empty(); }
  std::size_t size() const noexcept { return samples.size(); }
};

enum class LossKind { mean_squared_error };

struct ValidationIssue {
  std::size_t layer;  // one-based
  std::string message;
};

struct ValidationReport {
  std::vector<ValidationIssue> issues;

  bool ok() const noexcept { return issues.empty(); }
  explicit operator bool() const noexcept { return ok(); }

  std::string summary() const {
    std::string out;
    for (const auto& issue : issues) {
      if (!out.empty()) out += "; ";
      out += "layer " + std::to_string(issue.layer) + ": " + issue.message;
    }
    return out;
  }
};

/// Lists every violated invariant. Layer indices in the report are one-based.
inline ValidationReport validate(const Network& net) {
  ValidationReport report;
  if (net.layers.empty()) {
    report.issues.push_back({0, "network has no layers"});
    return report;
  }
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    const auto& layer = net.layers[l];
    const std::size_t index = l + 1;
    if (layer.weights.rows() == 0 || layer.weights.cols() == 0)
      report.issues.push_back({index, "weight matrix must have at least one row and column"});
    if (l > 0 && layer.weights.cols() != net.layers[l - 1].weights.rows())
      report.issues.push_back(
          {index, "shape mismatch: " + std::to_string(layer.weights.cols()) +
                      " columns but previous layer has " +
                      std::to_string(net.layers[l - 1].weights.rows()) + " neurons"});
    for (std::size_t r = 0; r < layer.weights.rows(); ++r) {
      bool bad = false;
      for (std::size_t c = 0; c < layer.weights.cols(); ++c) {
        if (!std::isfinite(layer.weights(r, c))) {
          report.issues.push_back({index, "non-finite weight at row " + std::to_string(r + 1) +
                                              ", column " + std::to_string(c + 1)});
          bad = true;
          break;
        }
      }
      if (bad) break;
    }
    if (layer.bias) {
      if (layer.bias->size() != layer.weights.rows())
        report.issues.push_back({index, "bias length " + std::to_string(layer.bias->size()) +
                                            " does not match " +
                                            std::to_string(layer.weights.rows()) + " neurons"});
      for (std::size_t i = 0; i < layer.bias->size(); ++i) {
        if (!std::isfinite((*layer.bias)[i])) {
          report.issues.push_back({index, "non-finite bias at entry " + std::to_string(i + 1)});
          break;
        }
      }
    }
  }
  return report;
}

inline void require_valid(const Network& net) {
  if (auto report = validate(net); !report) throw InputError("invalid network: " + report.summary());
}

namespace detail {

inline void check_input(const Network& net, std::span<const double> x) {
  if (x.size() != net.input_size())
    throw InputError("input has " + std::to_string(x.size()) + " components, network expects " +
                     std::to_string(net.input_size()));
}

// z = W a + b, each dot product summed in ascending column order.
inline std::vector<double> affine(const LayerWeights& layer, std::span<const double> a) {
  std::vector<double> z(layer.neurons());
  for (std::size_t i = 0; i < layer.neurons(); ++i) {
    double sum = 0.0;
    const auto row = layer.weights.row(i);
    for (std::size_t j = 0; j < row.size(); ++j) sum += row[j] * a[j];
    if (layer.bias) sum += (*layer.bias)[i];
    z[i] = sum;
  }
  return z;
}

inline Activation activation_for(const Network& net, std::size_t l) {
  return l + 1 == net.layers.size() ? net.output_activation : net.hidden_activation;
}

}  // namespace detail

/// Activations a^(1)..a^(L). The input itself is not included.
inline std::vector<std::vector<double>> forward(const Network& net, std::span<const double> x) {
  require_valid(net);
  detail::check_input(net, x);
  std::vector<std::vector<double>> out;
  out.reserve(net.layers.size());
  std::span<const double> previous = x;
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    auto z = detail::affine(net.layers[l], previous);
    const Activation f = detail::activation_for(net, l);
    for (double& v : z) v = activate(f, v);
    out.push_back(std::move(z));
    previous = out.back();
  }
  return out;
}

inline std::vector<double> predict(const Network& net, std::span<const double> x) {
  auto activations = forward(net, x);
  return std::move(activations.back());
}

inline void check_dataset(const Network& net, const Dataset& data) {
  if (data.empty()) throw InputError("dataset is empty");
  for (std::size_t s = 0; s < data.size(); ++s) {
    const auto& sample = data.samples[s];
    if (sample.input.size() != net.input_size() || sample.target.size() != net.output_size())
      throw InputError("sample " + std::to_string(s + 1) + " has shape (" +
                       std::to_string(sample.input.size()) + ", " +
                       std::to_string(sample.target.size()) + "), network expects (" +
                       std::to_string(net.input_size()) + ", " +
                       std::to_string(net.output_size()) + ")");
  }
}

/// Mean over samples of the per-sample mean squared error.
inline double loss(const Network& net, const Dataset& data,
                   LossKind kind = LossKind::mean_squared_error) {
  (void)kind;
  require_valid(net);
  check_dataset(net, data);
  double total = 0.0;
  for (const auto& sample : data.samples) {
    const auto y = predict(net, sample.input);
    double sq = 0.0;
    for (std::size_t k = 0; k < y.size(); ++k) {
      const double d = y[k] - sample.target[k];
      sq += d * d;
    }
    total += sq / static_cast<double>(y.size());
  }
  return total / static_cast<double>(data.size());
}

}  // namespace permsym
