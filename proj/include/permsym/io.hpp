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

#include <charconv>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include <nlohmann/json.hpp>

#include "permsym/common.hpp"
#include "permsym/network.hpp"
#include "permsym/permutation.hpp"
#include "permsym/symmetry.hpp"
#include "permsym/training.hpp"

namespace permsym::io {

using Json = nlohmann::ordered_json;

// Model files:
//   {"hidden_activation": "tanh", "output_activation": "identity",
//    "layers": [{"weights": [[...], ...], "bias": [...]}, ...]}
// "bias" may be omitted per layer; "output_activation" defaults to identity.
// Doubles are written in shortest round-trip form, so parse(serialize(n))
// reproduces every weight bit for bit.

namespace detail {

[[noreturn]] inline void fail(const std::string& field, const std::string& what) {
  throw InputError(field + ": " + what);
}

inline std::size_t line_of(std::string_view text, std::size_t byte) {
  std::size_t line = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i)
    if (text[i] == '\n') ++line;
  return line;
}

inline Json parse_document(std::string_view text) {
  try {
    return Json::parse(text.begin(), text.end());
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError("line " + std::to_string(line_of(text, e.byte == 0 ? 0 : e.byte - 1)) +
                     ": malformed JSON (" + e.what() + ")");
  }
}

inline double number_at(const Json& j, const std::string& field) {
  if (!j.is_number()) fail(field, "expected a number");
  return j.get<double>();
}

inline std::vector<double> vector_at(const Json& j, const std::string& field) {
  if (!j.is_array()) fail(field, "expected an array of numbers");
  std::vector<double> out;
  out.reserve(j.size());
  for (std::size_t i = 0; i < j.size(); ++i)
    out.push_back(number_at(j[i], field + "[" + std::to_string(i) + "]"));
  return out;
}

inline Activation activation_at(const Json& j, const std::string& field) {
  if (!j.is_string()) fail(field, "expected an activation name");
  const auto name = j.get<std::string>();
  if (auto a = parse_activation(name)) return *a;
  fail(field, "unknown activation '" + name + "'");
}

}  // namespace detail

inline Json model_to_json(const Network& net) {
  Json doc;
  doc["hidden_activation"] = std::string(to_string(net.hidden_activation));
  doc["output_activation"] = std::string(to_string(net.output_activation));
  Json layers = Json::array();
  for (const auto& layer : net.layers) {
    Json l;
    Json rows = Json::array();
    for (std::size_t r = 0; r < layer.weights.rows(); ++r) {
      const auto row = layer.weights.row(r);
      rows.push_back(Json(std::vector<double>(row.begin(), row.end())));
    }
    l["weights"] = std::move(rows);
    if (layer.bias) l["bias"] = *layer.bias;
    layers.push_back(std::move(l));
  }
  doc["layers"] = std::move(layers);
  return doc;
}

inline std::string serialize_model(const Network& net) { return model_to_json(net).dump(2) + "\n"; }

inline Network model_from_json(const Json& doc) {
  if (!doc.is_object()) detail::fail("model", "expected a JSON object");
  Network net;
  if (!doc.contains("hidden_activation")) detail::fail("hidden_activation", "missing");
  net.hidden_activation = detail::activation_at(doc["hidden_activation"], "hidden_activation");
  net.output_activation = doc.contains("output_activation")
                              ? detail::activation_at(doc["output_activation"], "output_activation")
                              : Activation::identity;
  if (!doc.contains("layers") || !doc["layers"].is_array() || doc["layers"].empty())
    detail::fail("layers", "expected a non-empty array");
  const auto& layers = doc["layers"];
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const std::string field = "layers[" + std::to_string(l) + "]";
    const auto& lj = layers[l];
    if (!lj.is_object() || !lj.contains("weights")) detail::fail(field, "expected {\"weights\": ...}");
    const auto& wj = lj["weights"];
    if (!wj.is_array() || wj.empty()) detail::fail(field + ".weights", "expected a non-empty matrix");
    LayerWeights layer;
    std::vector<std::vector<double>> rows;
    for (std::size_t r = 0; r < wj.size(); ++r)
      rows.push_back(detail::vector_at(wj[r], field + ".weights[" + std::to_string(r) + "]"));
    const std::size_t cols = rows.front().size();
    if (cols == 0) detail::fail(field + ".weights[0]", "empty row");
    layer.weights = Matrix(rows.size(), cols);
    for (std::size_t r = 0; r < rows.size(); ++r) {
      if (rows[r].size() != cols)
        detail::fail(field + ".weights[" + std::to_string(r) + "]",
                     "row has " + std::to_string(rows[r].size()) + " entries, expected " +
                         std::to_string(cols));
      std::copy(rows[r].begin(), rows[r].end(), layer.weights.row(r).begin());
    }
    if (lj.contains("bias") && !lj["bias"].is_null())
      layer.bias = detail::vector_at(lj["bias"], field + ".bias");
    net.layers.push_back(std::move(layer));
  }
  if (auto report = validate(net); !report) throw InputError("invalid model: " + report.summary());
  return net;
}

inline Network parse_model(std::string_view text) { return model_from_json(detail::parse_document(text)); }

// Permutation files: {"per_layer": [[2, 1, 3], [1, 2]]}, one-based images,
// one array per hidden layer.

inline Json permutation_to_json(const NetworkPermutation& p) {
  Json layers = Json::array();
  for (const auto& lp : p.per_layer()) layers.push_back(lp.one_based());
  Json doc;
  doc["per_layer"] = std::move(layers);
  return doc;
}

inline std::string serialize_permutation(const NetworkPermutation& p) {
  return permutation_to_json(p).dump() + "\n";
}

inline NetworkPermutation permutation_from_json(const Json& doc) {
  if (!doc.is_object() || !doc.contains("per_layer") || !doc["per_layer"].is_array())
    detail::fail("per_layer", "expected an array of arrays");
  std::vector<LayerPermutation> layers;
  const auto& pl = doc["per_layer"];
  for (std::size_t l = 0; l < pl.size(); ++l) {
    const std::string field = "per_layer[" + std::to_string(l) + "]";
    if (!pl[l].is_array()) detail::fail(field, "expected an array of integers");
    std::vector<long long> images;
    for (const auto& v : pl[l]) {
      if (!v.is_number_integer()) detail::fail(field, "expected integers");
      images.push_back(v.get<long long>());
    }
    try {
      layers.push_back(LayerPermutation::from_one_based(images));
    } catch (const InputError& e) {
      detail::fail(field, e.what());
    }
  }
  return NetworkPermutation(std::move(layers));
}

inline NetworkPermutation parse_permutation(std::string_view text) {
  return permutation_from_json(detail::parse_document(text));
}

// Report fragments.

inline Json to_json(const OrbitCount& count) {
  Json j;
  j["exact"] = count.decimal();
  j["digits"] = count.digits();
  j["log10"] = count.log10;
  return j;
}

inline Json to_json(const EquivalenceVerdict& v) {
  Json j;
  j["equivalent"] = v.equivalent;
  j["witness"] = v.witness ? permutation_to_json(*v.witness) : Json(nullptr);
  j["max_deviation"] = v.max_deviation;
  j["tied_neurons"] = v.tied_neurons;
  return j;
}

inline Json to_json(const EquivarianceReport& r) {
  Json j;
  j["max_gradient_deviation"] = r.max_gradient_deviation;
  j["max_trajectory_deviation"] = r.max_trajectory_deviation;
  j["steps_compared"] = r.steps_compared;
  j["final_loss"] = r.final_loss;
  j["final_loss_permuted"] = r.final_loss_permuted;
  return j;
}

// Dataset CSV: one sample per line, `inputs` input columns followed by
// `targets` target columns. Blank lines are skipped.
inline Dataset parse_dataset(std::string_view text, std::size_t inputs, std::size_t targets) {
  Dataset data;
  std::size_t line_no = 0;
  while (!text.empty()) {
    ++line_no;
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.find_first_not_of(" \t") == std::string_view::npos) continue;

    std::vector<double> values;
    std::size_t pos = 0;
    while (true) {
      const auto comma = line.find(',', pos);
      std::string_view cell = line.substr(pos, comma == std::string_view::npos ? line.npos : comma - pos);
      while (!cell.empty() && (cell.front() == ' ' || cell.front() == '\t')) cell.remove_prefix(1);
      while (!cell.empty() && (cell.back() == ' ' || cell.back() == '\t')) cell.remove_suffix(1);
      double v = 0.0;
      const auto [end, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (cell.empty() || ec != std::errc{} || end != cell.data() + cell.size() || !std::isfinite(v))
        throw InputError("line " + std::to_string(line_no) + ": column " +
                         std::to_string(values.size() + 1) + " is not a finite number");
      values.push_back(v);
      if (comma == std::string_view::npos) break;
      pos = comma + 1;
    }
    if (values.size() != inputs + targets)
      throw InputError("line " + std::to_string(line_no) + ": expected " +
                       std::to_string(inputs + targets) + " columns, found " +
                       std::to_string(values.size()));
    data.samples.push_back({std::vector<double>(values.begin(), values.begin() + inputs),
                            std::vector<double>(values.begin() + inputs, values.end())});
  }
  if (data.empty()) throw InputError("dataset has no samples");
  return data;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

inline void write_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot write '" + path + "'");
  out << contents;
  if (!out) throw InputError("failed writing '" + path + "'");
}

}  // namespace permsym::io
