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

// permsym: command-line front end for the permutation-symmetry library.
//
// Exit codes: 0 success / equivalent / check passed, 1 checked and
// negative, 2 usage, parse or shape error.

#include <cstdint>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "permsym/io.hpp"
#include "permsym/permsym.hpp"

namespace {

using permsym::io::Json;

constexpr int kOk = 0;
constexpr int kNegative = 1;
constexpr int kError = 2;

void emit_report(const Json& report, const std::string& out) {
  if (out.empty())
    std::cout << report.dump(2) << "\n";
  else
    permsym::io::write_file(out, report.dump(2) + "\n");
}

permsym::Network load_model(const std::string& path) {
  try {
    return permsym::io::parse_model(permsym::io::read_file(path));
  } catch (const permsym::InputError& e) {
    throw permsym::InputError(path + ": " + e.what());
  }
}

permsym::NetworkPermutation load_permutation(const std::string& path) {
  try {
    return permsym::io::parse_permutation(permsym::io::read_file(path));
  } catch (const permsym::InputError& e) {
    throw permsym::InputError(path + ": " + e.what());
  }
}

permsym::Dataset load_dataset(const std::string& path, const permsym::Network& net) {
  try {
    return permsym::io::parse_dataset(permsym::io::read_file(path), net.input_size(),
                                      net.output_size());
  } catch (const permsym::InputError& e) {
    throw permsym::InputError(path + ": " + e.what());
  }
}

std::string default_perm_path(const std::string& out) {
  std::filesystem::path p(out);
  p.replace_extension(".perm.json");
  return p.string();
}

// One-based hidden widths from a comma list, rejecting anything below 1.
std::vector<std::size_t> to_widths(const std::vector<long long>& raw) {
  std::vector<std::size_t> widths;
  for (long long w : raw) {
    if (w < 1) throw permsym::InputError("widths must be positive, got " + std::to_string(w));
    widths.push_back(static_cast<std::size_t>(w));
  }
  return widths;
}

struct Options {
  std::vector<long long> widths;
  std::string model, model_b, perm, out, perm_out, data, model_out;
  std::optional<std::uint64_t> seed;
  double tol = permsym::kDefaultTolerance;
  double trajectory_tol = 1e-6;
  std::string mode = "canonical";
  std::size_t samples = 100;
  std::size_t layer = 0, i = 0, j = 0;
  double lr = 0.05;
  std::size_t steps = 50;
  bool inject_fault = false;
};

int run_count(const Options& o) {
  const auto count = permsym::orbit_size(to_widths(o.widths));
  std::cout << "exact: " << count.decimal() << "\n"
            << "digits: " << count.digits() << "\n"
            << "log10: " << std::setprecision(12) << count.log10 << "\n";
  if (!o.out.empty()) {
    Json report;
    report["command"] = "count";
    report["widths"] = o.widths;
    report["orbit_count"] = permsym::io::to_json(count);
    permsym::io::write_file(o.out, report.dump(2) + "\n");
  }
  return kOk;
}

int run_permute(const Options& o) {
  const auto net = load_model(o.model);
  permsym::NetworkPermutation p;
  if (!o.perm.empty()) {
    p = load_permutation(o.perm);
  } else if (o.seed) {
    p = permsym::random_sibling(net, *o.seed).permutation;
  } else {
    throw permsym::InputError("permute needs --perm or --seed");
  }
  const auto permuted = permsym::apply_permutation(net, p);
  permsym::io::write_file(o.out, permsym::io::serialize_model(permuted));
  if (o.seed || !o.perm_out.empty())
    permsym::io::write_file(o.perm_out.empty() ? default_perm_path(o.out) : o.perm_out,
                            permsym::io::serialize_permutation(p));
  return kOk;
}

int run_switch(const Options& o) {
  const auto net = load_model(o.model);
  if (o.layer < 1 || o.i < 1 || o.j < 1)
    throw permsym::InputError("--layer, --i and --j are one-based");
  const auto switched = permsym::neuron_switch(net, o.layer - 1, o.i - 1, o.j - 1);
  permsym::io::write_file(o.out, permsym::io::serialize_model(switched));
  return kOk;
}

int run_canon(const Options& o) {
  const auto net = load_model(o.model);
  const auto form = permsym::canonicalize(net);
  permsym::io::write_file(o.out, permsym::io::serialize_model(form.network));
  permsym::io::write_file(o.perm_out.empty() ? default_perm_path(o.out) : o.perm_out,
                          permsym::io::serialize_permutation(form.permutation));
  return kOk;
}

permsym::EquivalenceMode parse_mode(const std::string& mode) {
  if (mode == "canonical") return permsym::EquivalenceMode::canonical;
  if (mode == "brute-force" || mode == "brute_force") return permsym::EquivalenceMode::brute_force;
  throw permsym::InputError("unknown --mode '" + mode + "'");
}

int run_equiv(const Options& o) {
  const auto a = load_model(o.model);
  const auto b = load_model(o.model_b);
  const auto verdict = permsym::equivalent(a, b, o.tol, parse_mode(o.mode));
  Json report;
  report["command"] = "equiv";
  report["tolerance"] = o.tol;
  report["mode"] = o.mode;
  report["verdict"] = permsym::io::to_json(verdict);
  emit_report(report, o.out);
  return verdict.equivalent ? kOk : kNegative;
}

int run_verify(const Options& o) {
  const auto net = load_model(o.model);
  if (o.samples < 1) throw permsym::InputError("--samples must be at least 1");
  const std::uint64_t seed = o.seed.value_or(0);
  auto sibling = permsym::random_sibling(net, seed);
  if (o.inject_fault) sibling.network.layers.front().weights(0, 0) += 1.0;

  permsym::Rng rng(seed ^ 0x5eedf00dULL);
  permsym::Dataset data;
  for (std::size_t s = 0; s < o.samples; ++s) {
    permsym::Sample sample;
    for (std::size_t k = 0; k < net.input_size(); ++k) sample.input.push_back(rng.uniform(-1, 1));
    for (std::size_t k = 0; k < net.output_size(); ++k) sample.target.push_back(rng.uniform(-1, 1));
    data.samples.push_back(std::move(sample));
  }
  double prediction_dev = 0.0;
  for (const auto& sample : data.samples) {
    const auto ya = permsym::predict(net, sample.input);
    const auto yb = permsym::predict(sibling.network, sample.input);
    for (std::size_t k = 0; k < ya.size(); ++k)
      prediction_dev = std::max(prediction_dev, permsym::scaled_deviation(ya[k], yb[k]));
  }
  const double la = permsym::loss(net, data);
  const double lb = permsym::loss(sibling.network, data);
  const double loss_dev = permsym::scaled_deviation(la, lb);
  const bool pass = prediction_dev <= o.tol && loss_dev <= o.tol;

  Json report;
  report["command"] = "verify";
  report["samples"] = o.samples;
  report["seed"] = seed;
  report["tolerance"] = o.tol;
  report["permutation"] = permsym::io::permutation_to_json(sibling.permutation);
  if (const auto widths = net.hidden_widths(); !widths.empty())
    report["orbit_count"] = permsym::io::to_json(permsym::orbit_size(widths));
  report["max_prediction_deviation"] = prediction_dev;
  report["loss_deviation"] = loss_dev;
  report["pass"] = pass;
  emit_report(report, o.out);
  return pass ? kOk : kNegative;
}

permsym::TrainConfig train_config(const Options& o) {
  permsym::TrainConfig cfg;
  cfg.learning_rate = o.lr;
  cfg.steps = o.steps;
  cfg.seed = o.seed.value_or(0);
  permsym::validate(cfg);
  return cfg;
}

int run_train(const Options& o) {
  const auto net = load_model(o.model);
  const auto data = load_dataset(o.data, net);
  const auto cfg = train_config(o);
  const auto trajectory = permsym::sgd_train(net, data, cfg);
  Json losses = Json::array();
  for (const auto& n : trajectory) losses.push_back(permsym::loss(n, data));
  Json report;
  report["command"] = "train";
  report["learning_rate"] = cfg.learning_rate;
  report["steps"] = cfg.steps;
  report["losses"] = std::move(losses);
  report["final_model"] = permsym::io::model_to_json(trajectory.back());
  if (!o.model_out.empty())
    permsym::io::write_file(o.model_out, permsym::io::serialize_model(trajectory.back()));
  emit_report(report, o.out);
  return kOk;
}

int run_equivariance(const Options& o) {
  const auto net = load_model(o.model);
  const auto data = load_dataset(o.data, net);
  const auto cfg = train_config(o);
  permsym::NetworkPermutation p;
  if (!o.perm.empty())
    p = load_permutation(o.perm);
  else
    p = permsym::random_sibling(net, o.seed.value_or(0)).permutation;
  const auto result = permsym::equivariance_experiment(net, p, data, cfg);
  const bool pass =
      result.max_gradient_deviation <= o.tol && result.max_trajectory_deviation <= o.trajectory_tol;
  Json report;
  report["command"] = "equivariance";
  report["permutation"] = permsym::io::permutation_to_json(p);
  report["gradient_tolerance"] = o.tol;
  report["trajectory_tolerance"] = o.trajectory_tol;
  report["result"] = permsym::io::to_json(result);
  report["pass"] = pass;
  emit_report(report, o.out);
  return pass ? kOk : kNegative;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Permutation symmetry of feed-forward networks"};
  app.require_subcommand(1);
  Options o;

  auto* count = app.add_subcommand("count", "Number of equivalent weight sets for hidden widths");
  count->add_option("--widths", o.widths, "Hidden-layer widths, e.g. 128,128,128")
      ->required()
      ->delimiter(',');
  count->add_option("--out", o.out, "Write a JSON report");

  auto* permute = app.add_subcommand("permute", "Relabel hidden neurons of a model");
  permute->add_option("--model", o.model)->required();
  auto* perm_opt = permute->add_option("--perm", o.perm, "Permutation JSON file");
  permute->add_option("--seed", o.seed, "Draw a uniform random permutation")->excludes(perm_opt);
  permute->add_option("--out", o.out)->required();
  permute->add_option("--perm-out", o.perm_out, "Where to write the permutation used");

  auto* sw = app.add_subcommand("switch", "Generalized neuron switch (one-based indices)");
  sw->add_option("--model", o.model)->required();
  sw->add_option("--layer", o.layer, "Hidden layer, 1..L-1")->required();
  sw->add_option("--i", o.i)->required();
  sw->add_option("--j", o.j)->required();
  sw->add_option("--out", o.out)->required();

  auto* canon = app.add_subcommand("canon", "Canonical orbit representative");
  canon->add_option("--model", o.model)->required();
  canon->add_option("--out", o.out)->required();
  canon->add_option("--perm-out", o.perm_out);

  auto* equiv = app.add_subcommand("equiv", "Decide equivalence of two models");
  equiv->add_option("a", o.model, "First model")->required();
  equiv->add_option("b", o.model_b, "Second model")->required();
  equiv->add_option("--tol", o.tol)->check(CLI::NonNegativeNumber);
  equiv->add_option("--mode", o.mode)->check(CLI::IsMember({"canonical", "brute-force"}));
  equiv->add_option("--out", o.out);

  auto* verify = app.add_subcommand("verify", "Check prediction and loss invariance on random inputs");
  verify->add_option("--model", o.model)->required();
  verify->add_option("--samples", o.samples);
  verify->add_option("--seed", o.seed);
  verify->add_option("--tol", o.tol)->check(CLI::NonNegativeNumber);
  verify->add_flag("--inject-fault", o.inject_fault, "Corrupt the permuted model (test hook)");
  verify->add_option("--out", o.out);

  auto* train = app.add_subcommand("train", "Full-batch gradient descent");
  auto* equivariance =
      app.add_subcommand("equivariance", "Compare training runs from a model and its relabeling");
  for (auto* sub : {train, equivariance}) {
    sub->add_option("--model", o.model)->required();
    sub->add_option("--data", o.data, "CSV: inputs then targets per line")->required();
    sub->add_option("--lr", o.lr);
    sub->add_option("--steps", o.steps);
    sub->add_option("--seed", o.seed);
    sub->add_option("--out", o.out);
  }
  train->add_option("--model-out", o.model_out);
  equivariance->add_option("--perm", o.perm);
  equivariance->add_option("--tol", o.tol, "Gradient tolerance")->check(CLI::NonNegativeNumber);
  equivariance->add_option("--trajectory-tol", o.trajectory_tol)->check(CLI::NonNegativeNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kError;
  }

  try {
    if (*count) return run_count(o);
    if (*permute) return run_permute(o);
    if (*sw) return run_switch(o);
    if (*canon) return run_canon(o);
    if (*equiv) return run_equiv(o);
    if (*verify) return run_verify(o);
    if (*train) return run_train(o);
    if (*equivariance) return run_equivariance(o);
  } catch (const permsym::DivergenceError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kError;
  } catch (const permsym::InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kError;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kError;
  }
  return kError;
}
