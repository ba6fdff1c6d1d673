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
#include <cstring>
#include <limits>
#include <string>

#include <gtest/gtest.h>

#include "permsym/io.hpp"
#include "support/test_util.hpp"

namespace permsym {
namespace {

bool bitwise_equal(const Network& a, const Network& b) {
  const auto fa = testing::flatten(a.layers);
  const auto fb = testing::flatten(b.layers);
  if (fa.size() != fb.size()) return false;
  return std::memcmp(fa.data(), fb.data(), fa.size() * sizeof(double)) == 0 &&
         a.architecture() == b.architecture() && a.hidden_activation == b.hidden_activation &&
         a.output_activation == b.output_activation;
}

TEST(ModelJson, RoundTripIsBitwiseLossless) {
  Rng rng(31);
  for (int trial = 0; trial < 100; ++trial) {
    const auto arch = testing::random_architecture(rng, rng.below(3), 5);
    auto net = testing::random_network(rng, arch, testing::random_activation(rng),
                                       testing::random_activation(rng), trial % 2 == 0);
    // Awkward values: tiny, huge, negative zero, subnormal, non-terminating.
    auto& w = net.layers.front().weights;
    w(0, 0) = std::ldexp(rng.unit(), static_cast<int>(rng.below(2000)) - 1000);
    if (w.size() > 1) w.values()[1] = -0.0;
    if (w.size() > 2) w.values()[2] = std::numeric_limits<double>::denorm_min();
    if (w.size() > 3) w.values()[3] = 1.0 / 3.0;
    const auto back = io::parse_model(io::serialize_model(net));
    EXPECT_TRUE(bitwise_equal(back, net));
    EXPECT_EQ(io::serialize_model(back), io::serialize_model(net));
  }
}

TEST(ModelJson, OutputActivationDefaultsToIdentity) {
  const auto net = io::parse_model(R"({"hidden_activation": "relu", "layers": [
      {"weights": [[1, 2], [3, 4]], "bias": [0.5, 1]}, {"weights": [[1, -1]]}]})");
  EXPECT_EQ(net.hidden_activation, Activation::relu);
  EXPECT_EQ(net.output_activation, Activation::identity);
  EXPECT_EQ(*net.layers[0].bias, (std::vector<double>{0.5, 1}));
  EXPECT_FALSE(net.layers[1].bias);
}

TEST(ModelJson, DiagnosticsNameTheField) {
  auto message = [](const std::string& text) {
    try {
      io::parse_model(text);
    } catch (const InputError& e) {
      return std::string(e.what());
    }
    return std::string("no error");
  };
  EXPECT_NE(message("{\n\"layers\": [\n").find("line 3"), std::string::npos);
  EXPECT_NE(message(R"({"hidden_activation": "swish", "layers": [{"weights": [[1]]}]})")
                .find("hidden_activation"),
            std::string::npos);
  EXPECT_NE(message(R"({"hidden_activation": "tanh", "layers": [{"weights": [[1, "x"]]}]})")
                .find("layers[0].weights[0][1]"),
            std::string::npos);
  EXPECT_NE(message(R"({"hidden_activation": "tanh", "layers": [{"weights": [[1, 2], [3]]}]})")
                .find("layers[0].weights[1]"),
            std::string::npos);
  EXPECT_NE(message(R"({"hidden_activation": "tanh", "layers":
                        [{"weights": [[1, 2]]}, {"weights": [[1, 2]]}]})")
                .find("layer 2"),
            std::string::npos);
  EXPECT_NE(message(R"({"hidden_activation": "tanh", "layers": []})").find("layers"), std::string::npos);
}

TEST(PermutationJson, OneBasedFormat) {
  const auto p = io::parse_permutation(R"({"per_layer": [[2,1,3],[1,2]]})");
  EXPECT_EQ(p, testing::from_images({{1, 0, 2}, {0, 1}}));
  EXPECT_EQ(io::serialize_permutation(p), "{\"per_layer\":[[2,1,3],[1,2]]}\n");
  EXPECT_THROW(io::parse_permutation(R"({"per_layer": [[1,1]]})"), InputError);
  EXPECT_THROW(io::parse_permutation(R"({"per_layer": [[0,1]]})"), InputError);
  EXPECT_THROW(io::parse_permutation(R"({"per_layer": [[1.5,1]]})"), InputError);
  EXPECT_THROW(io::parse_permutation(R"([1,2])"), InputError);
}

TEST(ReportJson, ExactCountParsesBack) {
  const std::vector<std::size_t> w{128, 128, 128};
  const auto count = orbit_size(w);
  const auto j = io::to_json(count);
  EXPECT_EQ(BigInt(j["exact"].get<std::string>()), count.exact);
  EXPECT_EQ(j["digits"].get<std::size_t>(), 647u);
}

TEST(DatasetCsv, ParsesAndDiagnoses) {
  const auto data = io::parse_dataset("1, 2, 3\n\n-0.5,1e-3,4\r\n", 2, 1);
  ASSERT_EQ(data.size(), 2u);
  EXPECT_EQ(data.samples[1].input, (std::vector<double>{-0.5, 1e-3}));
  EXPECT_EQ(data.samples[1].target, (std::vector<double>{4}));

  auto message = [](std::string_view text) {
    try {
      io::parse_dataset(text, 2, 1);
    } catch (const InputError& e) {
      return std::string(e.what());
    }
    return std::string("no error");
  };
  EXPECT_NE(message("1,2,3\n1,2\n").find("line 2"), std::string::npos);
  EXPECT_NE(message("1,2,3\n1,2,3\n1,x,3\n").find("line 3"), std::string::npos);
  EXPECT_NE(message("1,,3\n").find("line 1"), std::string::npos);
  EXPECT_NE(message("").find("no samples"), std::string::npos);
  EXPECT_NE(message("\n\n").find("no samples"), std::string::npos);
}

}  // namespace
}  // namespace permsym
