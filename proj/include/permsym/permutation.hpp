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
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "permsym/common.hpp"

namespace permsym {

/// Bijection on the neurons of one layer, stored zero-based. image(i) is
/// the position neuron i moves to.
class LayerPermutation {
 public:
  LayerPermutation() = default;

  explicit LayerPermutation(std::vector<std::size_t> images) : images_(std::move(images)) {
    std::vector<bool> seen(images_.size(), false);
    for (std::size_t v : images_) {
      if (v >= images_.size() || seen[v])
        throw InputError("not a permutation of " + std::to_string(images_.size()) + " elements");
      seen[v] = true;
    }
  }

  static LayerPermutation identity(std::size_t n) {
    std::vector<std::size_t> images(n);
    std::iota(images.begin(), images.end(), std::size_t{0});
    return LayerPermutation(std::move(images));
  }

  static LayerPermutation transposition(std::size_t n, std::size_t i, std::size_t j) {
    if (i >= n || j >= n) throw InputError("transposition index out of range");
    auto p = identity(n);
    std::swap(p.images_[i], p.images_[j]);
    return p;
  }

  /// From one-based images as written in permutation files.
  static LayerPermutation from_one_based(std::span<const long long> images) {
    std::vector<std::size_t> zero_based;
    zero_based.reserve(images.size());
    for (long long v : images) {
      if (v < 1 || static_cast<std::size_t>(v) > images.size())
        throw InputError("permutation image " + std::to_string(v) + " outside 1.." +
                         std::to_string(images.size()));
      zero_based.push_back(static_cast<std::size_t>(v - 1));
    }
    return LayerPermutation(std::move(zero_based));
  }

  std::vector<long long> one_based() const {
    std::vector<long long> out;
    out.reserve(images_.size());
    for (std::size_t v : images_) out.push_back(static_cast<long long>(v) + 1);
    return out;
  }

  std::size_t size() const noexcept { return images_.size(); }
  std::size_t operator()(std::size_t i) const { return images_.at(i); }
  std::span<const std::size_t> images() const noexcept { return images_; }

  bool is_identity() const {
    for (std::size_t i = 0; i < images_.size(); ++i)
      if (images_[i] != i) return false;
    return true;
  }

  /// Functional composition: (p * q)(i) = p(q(i)).
  friend LayerPermutation operator*(const LayerPermutation& p, const LayerPermutation& q) {
    if (p.size() != q.size()) throw InputError("cannot compose permutations of different sizes");
    std::vector<std::size_t> images(q.size());
    for (std::size_t i = 0; i < q.size(); ++i) images[i] = p.images_[q.images_[i]];
    LayerPermutation r;
    r.images_ = std::move(images);
    return r;
  }

  LayerPermutation inverse() const {
    std::vector<std::size_t> images(images_.size());
    for (std::size_t i = 0; i < images_.size(); ++i) images[images_[i]] = i;
    LayerPermutation r;
    r.images_ = std::move(images);
    return r;
  }

  /// Transpositions t_1..t_k (as index pairs) with p = t_1 * t_2 * ... * t_k.
  std::vector<std::pair<std::size_t, std::size_t>> transpositions() const {
    std::vector<std::pair<std::size_t, std::size_t>> out;
    std::vector<bool> done(images_.size(), false);
    for (std::size_t start = 0; start < images_.size(); ++start) {
      if (done[start]) continue;
      // Cycle (start c1 c2 ... ck) = (start ck) ... (start c2)(start c1).
      std::vector<std::size_t> cycle;
      for (std::size_t i = start; !done[i]; i = images_[i]) {
        done[i] = true;
        cycle.push_back(i);
      }
      for (std::size_t k = cycle.size(); k-- > 1;) out.emplace_back(start, cycle[k]);
    }
    return out;
  }

  /// Uniform draw (Fisher-Yates).
  static LayerPermutation random(std::size_t n, Rng& rng) {
    auto p = identity(n);
    for (std::size_t i = n; i > 1; --i) {
      const auto j = static_cast<std::size_t>(rng.below(i));
      std::swap(p.images_[i - 1], p.images_[j]);
    }
    return p;
  }

  friend bool operator==(const LayerPermutation&, const LayerPermutation&) = default;

 private:
  std::vector<std::size_t> images_;
};

/// One LayerPermutation per hidden layer. Input and output neurons are
/// never relabeled.
class NetworkPermutation {
 public:
  NetworkPermutation() = default;
  explicit NetworkPermutation(std::vector<LayerPermutation> per_layer)
      : per_layer_(std::move(per_layer)) {}

  static NetworkPermutation identity(std::span<const std::size_t> widths) {
    std::vector<LayerPermutation> layers;
    for (std::size_t n : widths) layers.push_back(LayerPermutation::identity(n));
    return NetworkPermutation(std::move(layers));
  }

  static NetworkPermutation random(std::span<const std::size_t> widths, Rng& rng) {
    std::vector<LayerPermutation> layers;
    for (std::size_t n : widths) layers.push_back(LayerPermutation::random(n, rng));
    return NetworkPermutation(std::move(layers));
  }

  /// A single transposition of neurons i, j in hidden layer `layer` (all zero-based).
  static NetworkPermutation switch_of(std::span<const std::size_t> widths, std::size_t layer,
                                      std::size_t i, std::size_t j) {
    if (layer >= widths.size()) throw InputError("hidden layer index out of range");
    auto p = identity(widths);
    p.per_layer_[layer] = LayerPermutation::transposition(widths[layer], i, j);
    return p;
  }

  std::size_t layers() const noexcept { return per_layer_.size(); }
  const LayerPermutation& operator[](std::size_t l) const { return per_layer_.at(l); }
  LayerPermutation& operator[](std::size_t l) { return per_layer_.at(l); }
  std::span<const LayerPermutation> per_layer() const noexcept { return per_layer_; }

  std::vector<std::size_t> widths() const {
    std::vector<std::size_t> w;
    for (const auto& p : per_layer_) w.push_back(p.size());
    return w;
  }

  bool is_identity() const {
    return std::all_of(per_layer_.begin(), per_layer_.end(),
                       [](const LayerPermutation& p) { return p.is_identity(); });
  }

  friend bool operator==(const NetworkPermutation&, const NetworkPermutation&) = default;

 private:
  std::vector<LayerPermutation> per_layer_;
};

/// Per-layer composition, p applied after q.
inline NetworkPermutation compose(const NetworkPermutation& p, const NetworkPermutation& q) {
  if (p.widths() != q.widths()) throw InputError("compose: permutation shapes differ");
  std::vector<LayerPermutation> layers;
  for (std::size_t l = 0; l < p.layers(); ++l) layers.push_back(p[l] * q[l]);
  return NetworkPermutation(std::move(layers));
}

inline NetworkPermutation inverse(const NetworkPermutation& p) {
  std::vector<LayerPermutation> layers;
  for (const auto& lp : p.per_layer()) layers.push_back(lp.inverse());
  return NetworkPermutation(std::move(layers));
}

}  // namespace permsym
