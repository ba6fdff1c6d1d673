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
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "permsym/common.hpp"
#include "permsym/network.hpp"
#include "permsym/permutation.hpp"

namespace permsym {

// All layer and neuron indices in this header are zero-based. Hidden layer
// h is the output side of layers[h] and the input side of layers[h + 1].

namespace detail {

inline void check_hidden_index(const std::vector<LayerWeights>& layers, std::size_t hidden) {
  if (layers.size() < 2 || hidden >= layers.size() - 1)
    throw InputError("hidden layer index " + std::to_string(hidden) + " out of range (network has " +
                     std::to_string(layers.size() < 2 ? 0 : layers.size() - 1) +
                     " hidden layers)");
}

inline void check_permutation_shape(const std::vector<LayerWeights>& layers,
                                    const NetworkPermutation& p) {
  const std::size_t hidden = layers.empty() ? 0 : layers.size() - 1;
  if (p.layers() != hidden)
    throw InputError("permutation has " + std::to_string(p.layers()) +
                     " layers, network has " + std::to_string(hidden) + " hidden layers");
  for (std::size_t h = 0; h < hidden; ++h)
    if (p[h].size() != layers[h].neurons())
      throw InputError("permutation for hidden layer " + std::to_string(h + 1) + " has size " +
                       std::to_string(p[h].size()) + ", layer has " +
                       std::to_string(layers[h].neurons()) + " neurons");
}

// Neuron i of hidden layer h moves to position p(i): rows (and bias) of
// layers[h], columns of layers[h + 1].
inline void relabel_hidden(std::vector<LayerWeights>& layers, std::size_t h,
                           const LayerPermutation& p) {
  auto& in = layers[h];
  Matrix rows(in.weights.rows(), in.weights.cols());
  for (std::size_t i = 0; i < p.size(); ++i) {
    const auto src = in.weights.row(i);
    std::copy(src.begin(), src.end(), rows.row(p(i)).begin());
  }
  in.weights = std::move(rows);
  if (in.bias) {
    std::vector<double> bias(in.bias->size());
    for (std::size_t i = 0; i < p.size(); ++i) bias[p(i)] = (*in.bias)[i];
    in.bias = std::move(bias);
  }

  auto& out = layers[h + 1];
  Matrix cols(out.weights.rows(), out.weights.cols());
  for (std::size_t r = 0; r < out.weights.rows(); ++r)
    for (std::size_t i = 0; i < p.size(); ++i) cols(r, p(i)) = out.weights(r, i);
  out.weights = std::move(cols);
}

inline std::vector<LayerWeights> permute_layers(std::vector<LayerWeights> layers,
                                                const NetworkPermutation& p) {
  check_permutation_shape(layers, p);
  for (std::size_t h = 0; h < p.layers(); ++h)
    if (!p[h].is_identity()) relabel_hidden(layers, h, p[h]);
  return layers;
}

inline double layers_deviation(const std::vector<LayerWeights>& a,
                               const std::vector<LayerWeights>& b) {
  double worst = 0.0;
  for (std::size_t l = 0; l < a.size(); ++l) {
    const auto va = a[l].weights.values();
    const auto vb = b[l].weights.values();
    for (std::size_t k = 0; k < va.size(); ++k) worst = std::max(worst, scaled_deviation(va[k], vb[k]));
    if (a[l].bias && b[l].bias)
      for (std::size_t k = 0; k < a[l].bias->size(); ++k)
        worst = std::max(worst, scaled_deviation((*a[l].bias)[k], (*b[l].bias)[k]));
  }
  return worst;
}

}  // namespace detail

/// Generalized neuron switch: swaps rows i, j of layers[hidden] (and the
/// matching bias entries) together with columns i, j of layers[hidden + 1].
inline Network neuron_switch(const Network& net, std::size_t hidden, std::size_t i, std::size_t j) {
  detail::check_hidden_index(net.layers, hidden);
  const std::size_t n = net.layers[hidden].neurons();
  if (i >= n || j >= n)
    throw InputError("neuron index out of range: layer has " + std::to_string(n) + " neurons");
  Network out = net;
  if (i == j) return out;
  auto& in = out.layers[hidden];
  std::swap_ranges(in.weights.row(i).begin(), in.weights.row(i).end(), in.weights.row(j).begin());
  if (in.bias) std::swap((*in.bias)[i], (*in.bias)[j]);
  auto& next = out.layers[hidden + 1];
  for (std::size_t r = 0; r < next.weights.rows(); ++r) std::swap(next.weights(r, i), next.weights(r, j));
  return out;
}

/// Relabels every hidden layer at once; neuron i of hidden layer h ends up
/// at position p[h](i). apply_permutation(apply_permutation(n, q), p) equals
/// apply_permutation(n, compose(p, q)).
inline Network apply_permutation(const Network& net, const NetworkPermutation& p) {
  Network out;
  out.hidden_activation = net.hidden_activation;
  out.output_activation = net.output_activation;
  out.layers = detail::permute_layers(net.layers, p);
  return out;
}

/// Largest entrywise scaled deviation between two networks of identical shape.
inline double max_deviation(const Network& a, const Network& b) {
  return detail::layers_deviation(a.layers, b.layers);
}

// ---------------------------------------------------------------------------
// Orbit size

using BigInt = boost::multiprecision::cpp_int;

/// Number of weight sets reachable by relabeling hidden neurons.
struct OrbitCount {
  BigInt exact;
  double log10 = 0.0;

  std::string decimal() const { return exact.str(); }
  std::size_t digits() const { return decimal().size(); }

  /// m in [1, 10) with exact ~= m * 10^floor(log10).
  double mantissa() const { return std::pow(10.0, log10 - std::floor(log10)); }
};

inline OrbitCount orbit_size(std::span<const std::size_t> hidden_widths) {
  if (hidden_widths.empty()) throw InputError("orbit_size: at least one hidden width is required");
  OrbitCount count;
  count.exact = 1;
  for (std::size_t n : hidden_widths) {
    if (n == 0) throw InputError("orbit_size: widths must be positive");
    for (std::size_t k = 2; k <= n; ++k) count.exact *= k;
    count.log10 += std::lgamma(static_cast<double>(n) + 1.0);
  }
  count.log10 /= std::log(10.0);
  return count;
}

inline OrbitCount orbit_size(const Network& net) {
  const auto widths = net.hidden_widths();
  return orbit_size(widths);
}

// ---------------------------------------------------------------------------
// Random siblings

struct Sibling {
  Network network;
  NetworkPermutation permutation;
};

/// A uniformly drawn member of the orbit of `net`, reproducible from `seed`.
inline Sibling random_sibling(const Network& net, std::uint64_t seed) {
  require_valid(net);
  Rng rng(seed);
  const auto widths = net.hidden_widths();
  auto p = NetworkPermutation::random(widths, rng);
  return {apply_permutation(net, p), std::move(p)};
}

// ---------------------------------------------------------------------------
// Canonical form

/// Run [begin, end) of canonical positions in one hidden layer whose sort
/// keys are exactly equal.
struct TiedBlock {
  std::size_t layer;
  std::size_t begin;
  std::size_t end;
};

struct CanonicalForm {
  Network network;
  NetworkPermutation permutation;  // network == apply_permutation(input, permutation)
  std::vector<TiedBlock> ties;
};

namespace detail {

inline int compare_keys(const LayerWeights& layer, std::size_t a, std::size_t b) {
  const auto ra = layer.weights.row(a);
  const auto rb = layer.weights.row(b);
  for (std::size_t c = 0; c < ra.size(); ++c) {
    if (ra[c] < rb[c]) return -1;
    if (rb[c] < ra[c]) return 1;
  }
  if (layer.bias) {
    const double ba = (*layer.bias)[a];
    const double bb = (*layer.bias)[b];
    if (ba < bb) return -1;
    if (bb < ba) return 1;
  }
  return 0;
}

}  // namespace detail

/// Sorts the neurons of each hidden layer, first to last, ascending by
/// (incoming weight row, bias) in lexicographic order. Later layers see the
/// column order fixed by earlier ones. Stable: exact ties keep their order.
inline CanonicalForm canonicalize(const Network& net) {
  require_valid(net);
  CanonicalForm form;
  form.network = net;
  std::vector<LayerPermutation> per_layer;
  const std::size_t hidden = net.layers.size() - 1;
  for (std::size_t h = 0; h < hidden; ++h) {
    const auto& layer = form.network.layers[h];
    const std::size_t n = layer.neurons();
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return detail::compare_keys(layer, a, b) < 0;
    });
    for (std::size_t k = 0; k < n;) {
      std::size_t e = k + 1;
      while (e < n && detail::compare_keys(layer, order[k], order[e]) == 0) ++e;
      if (e - k > 1) form.ties.push_back({h, k, e});
      k = e;
    }
    std::vector<std::size_t> images(n);
    for (std::size_t k = 0; k < n; ++k) images[order[k]] = k;
    LayerPermutation p(std::move(images));
    if (!p.is_identity()) detail::relabel_hidden(form.network.layers, h, p);
    per_layer.push_back(std::move(p));
  }
  form.permutation = NetworkPermutation(std::move(per_layer));
  return form;
}

// ---------------------------------------------------------------------------
// Equivalence

enum class EquivalenceMode { canonical, brute_force };

inline constexpr std::uint64_t kBruteForceBudget = 1'000'000;

struct EquivalenceVerdict {
  bool equivalent = false;
  std::optional<NetworkPermutation> witness;  // apply_permutation(a, *witness) ~= b
  double max_deviation = 0.0;                 // best deviation over the permutations tried
  std::size_t tied_neurons = 0;               // neurons in exact-tie blocks (canonical mode)
};

namespace detail {

inline void check_same_architecture(const Network& a, const Network& b) {
  require_valid(a);
  require_valid(b);
  if (a.architecture() != b.architecture())
    throw InputError("networks have different architectures");
  if (a.hidden_activation != b.hidden_activation || a.output_activation != b.output_activation)
    throw InputError("networks have different activations");
  for (std::size_t l = 0; l < a.layers.size(); ++l)
    if (a.layers[l].bias.has_value() != b.layers[l].bias.has_value())
      throw InputError("layer " + std::to_string(l + 1) + ": bias present in only one network");
}

// Number of tuples in the product of the given factorials, or nullopt when
// it exceeds `cap`.
inline std::optional<std::uint64_t> bounded_factorial_product(std::span<const std::size_t> ns,
                                                              std::uint64_t cap) {
  std::uint64_t total = 1;
  for (std::size_t n : ns)
    for (std::uint64_t k = 2; k <= n; ++k) {
      total *= k;
      if (total > cap) return std::nullopt;
    }
  return total;
}

// Steps `images` to the lexicographic successor of the concatenated tuple.
// Returns false after the last tuple.
inline bool next_tuple(std::vector<std::vector<std::size_t>>& images) {
  for (std::size_t l = images.size(); l-- > 0;)
    if (std::next_permutation(images[l].begin(), images[l].end())) return true;
  return false;
}

inline NetworkPermutation to_permutation(const std::vector<std::vector<std::size_t>>& images) {
  std::vector<LayerPermutation> layers;
  for (const auto& v : images) layers.emplace_back(v);
  return NetworkPermutation(std::move(layers));
}

// Search over relabelings that only move neurons within tied blocks of `a`.
inline std::optional<NetworkPermutation> search_ties(const Network& a, const Network& b,
                                                     const std::vector<TiedBlock>& ties,
                                                     double tol, double& best) {
  std::vector<std::size_t> block_sizes;
  for (const auto& t : ties) block_sizes.push_back(t.end - t.begin);
  if (!bounded_factorial_product(block_sizes, kBruteForceBudget))
    throw InputError("canonical tie resolution exceeds the brute-force budget of " +
                     std::to_string(kBruteForceBudget) + " permutations");
  std::vector<std::vector<std::size_t>> blocks;
  for (std::size_t s : block_sizes) {
    std::vector<std::size_t> v(s);
    for (std::size_t i = 0; i < s; ++i) v[i] = i;
    blocks.push_back(std::move(v));
  }
  const auto widths = a.hidden_widths();
  do {
    auto p = NetworkPermutation::identity(widths);
    for (std::size_t t = 0; t < ties.size(); ++t) {
      std::vector<std::size_t> images(p[ties[t].layer].images().begin(),
                                      p[ties[t].layer].images().end());
      for (std::size_t i = 0; i < blocks[t].size(); ++i)
        images[ties[t].begin + i] = ties[t].begin + blocks[t][i];
      p[ties[t].layer] = LayerPermutation(std::move(images));
    }
    const double dev = max_deviation(apply_permutation(a, p), b);
    best = std::min(best, dev);
    if (dev <= tol) return p;
  } while (next_tuple(blocks));
  return std::nullopt;
}

}  // namespace detail

/// Decides whether `b` is a hidden-neuron relabeling of `a` up to `tol`
/// (relative for magnitudes >= 1, absolute below).
///
/// canonical: compares canonical forms; exact ties in the sort key are
/// resolved by searching relabelings inside each tied block.
/// brute_force: tries every relabeling in lexicographic order of the
/// concatenated per-layer images and returns the first match. Requires
/// prod n_l! <= kBruteForceBudget.
inline EquivalenceVerdict equivalent(const Network& a, const Network& b,
                                     double tol = kDefaultTolerance,
                                     EquivalenceMode mode = EquivalenceMode::canonical) {
  if (!(tol >= 0.0)) throw InputError("tolerance must be non-negative");
  detail::check_same_architecture(a, b);
  const auto widths = a.hidden_widths();
  EquivalenceVerdict verdict;

  if (mode == EquivalenceMode::brute_force) {
    if (!detail::bounded_factorial_product(widths, kBruteForceBudget))
      throw InputError("brute-force search requires the product of hidden-width factorials to be "
                       "at most " + std::to_string(kBruteForceBudget));
    std::vector<std::vector<std::size_t>> images;
    for (std::size_t n : widths) {
      std::vector<std::size_t> v(n);
      for (std::size_t i = 0; i < n; ++i) v[i] = i;
      images.push_back(std::move(v));
    }
    double best = std::numeric_limits<double>::infinity();
    do {
      auto p = detail::to_permutation(images);
      const double dev = max_deviation(apply_permutation(a, p), b);
      best = std::min(best, dev);
      if (dev <= tol) {
        verdict.equivalent = true;
        verdict.witness = std::move(p);
        verdict.max_deviation = dev;
        return verdict;
      }
    } while (detail::next_tuple(images));
    verdict.max_deviation = best;
    return verdict;
  }

  const auto ca = canonicalize(a);
  const auto cb = canonicalize(b);
  for (const auto& t : ca.ties) verdict.tied_neurons += t.end - t.begin;
  const auto back = inverse(cb.permutation);
  double best = max_deviation(ca.network, cb.network);
  std::optional<NetworkPermutation> inner;
  if (best <= tol) {
    inner = NetworkPermutation::identity(widths);
  } else if (!ca.ties.empty()) {
    inner = detail::search_ties(ca.network, cb.network, ca.ties, tol, best);
  }
  if (inner) {
    auto witness = compose(back, compose(*inner, ca.permutation));
    verdict.max_deviation = max_deviation(apply_permutation(a, witness), b);
    verdict.equivalent = verdict.max_deviation <= tol;
    verdict.witness = std::move(witness);
  } else {
    verdict.max_deviation = best;
  }
  return verdict;
}

}  // namespace permsym
