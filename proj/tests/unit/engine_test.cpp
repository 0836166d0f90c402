/* Copyright 2026 The cprune Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "cprune/engine.hpp"
#include "cprune/error.hpp"
#include "cprune/pruner.hpp"
#include "cprune/ranking.hpp"
#include "cprune/synth.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace cprune;
using namespace cprune::engine;
using nnir::LayerKind;
using nnir::Network;
using nnir::NetworkBuilder;

namespace {

Network single_conv(nnir::ActivationDims in, LayerKind kind, int c_out, int k, int stride,
                    int pad, bool bias, float weight) {
  NetworkBuilder b(in, 0);
  auto x = b.conv("c", kind, b.input(), c_out, k, stride, pad, bias);
  Network n = std::move(b).finish("output", x);
  auto& w = n.node("c").weights->values;
  std::fill(w.begin(), w.end(), weight);
  std::fill(n.node("c").bias.begin(), n.node("c").bias.end(), 0.0f);
  return n;
}

double max_abs_diff(const Activation& a, const Activation& b) {
  REQUIRE(a.values.size() == b.values.size());
  double m = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i)
    m = std::max(m, std::abs(static_cast<double>(a.values[i]) - b.values[i]));
  return m;
}

double max_abs_diff(const std::vector<Activation>& a, const std::vector<Activation>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, max_abs_diff(a[i], b[i]));
  return m;
}

// Reorders the filters of `layer` and the matching channels of everything it
// feeds, following a depthwise consumer through to its pointwise consumer.
void permute_layer(Network& n, const std::string& layer, const std::vector<std::size_t>& perm) {
  auto permute_out = [&](nnir::Node& node) {
    auto& t = *node.weights;
    const std::size_t fs = t.dims.filter_size();
    std::vector<float> v(t.values.size());
    for (std::size_t o = 0; o < perm.size(); ++o)
      std::copy_n(t.values.begin() + perm[o] * fs, fs, v.begin() + o * fs);
    t.values = std::move(v);
    if (!node.bias.empty()) {
      std::vector<float> bias(node.bias.size());
      for (std::size_t o = 0; o < perm.size(); ++o) bias[o] = node.bias[perm[o]];
      node.bias = std::move(bias);
    }
  };
  auto permute_in = [&](nnir::Node& node) {
    auto& t = *node.weights;
    const std::size_t k = static_cast<std::size_t>(t.dims.kh) * t.dims.kw;
    std::vector<float> v(t.values.size());
    for (int o = 0; o < t.dims.c_out; ++o)
      for (std::size_t i = 0; i < perm.size(); ++i)
        std::copy_n(t.values.begin() + (o * perm.size() + perm[i]) * k, k,
                    v.begin() + (o * perm.size() + i) * k);
    t.values = std::move(v);
  };
  permute_out(n.node(layer));
  std::vector<std::string> frontier = n.consumers(layer);
  while (!frontier.empty()) {
    std::vector<std::string> next;
    for (const auto& id : frontier) {
      auto& node = n.node(id);
      if (node.spec.kind == LayerKind::kConvDepthwise) {
        permute_out(node);
      } else if (node.is_conv()) {
        permute_in(node);
        continue;
      }
      for (auto& c : n.consumers(id)) next.push_back(c);
    }
    frontier = std::move(next);
  }
}

}  // namespace

TEST_CASE("forward examples") {
  SUBCASE("scalar pointwise") {
    const Network n = single_conv({1, 1, 1}, LayerKind::kConvPointwise, 1, 1, 1, 0, false, 2.0f);
    const auto y = forward(n, {{1, 1, 1}, {0.375f}});
    CHECK(y.values[0] == doctest::Approx(0.75));
  }
  SUBCASE("all-ones 3x3 sums the input") {
    const Network n = single_conv({1, 3, 3}, LayerKind::kConvStandard, 1, 3, 1, 0, false, 1.0f);
    Activation in{{1, 3, 3}, {1, 2, 3, 4, 5, 6, 7, 8, 9}};
    const auto y = forward(n, in);
    REQUIRE(y.values.size() == 1);
    CHECK(y.values[0] == doctest::Approx(45.0));
  }
  SUBCASE("all-zero weights give zeros") {
    Network n = nnir::synth_model({nnir::Family::kSqueezenetLike, 2, 4, 1, 3, 12});
    for (auto& node : n.nodes) {
      if (!node.weights) continue;
      std::fill(node.weights->values.begin(), node.weights->values.end(), 0.0f);
      std::fill(node.bias.begin(), node.bias.end(), 0.0f);
    }
    const auto probes = make_probes(n.input_dims, 4, 3);
    for (const auto& y : forward_all(n, probes))
      for (float v : y.values) CHECK(v == 0.0f);
  }
  SUBCASE("depthwise applies one kernel per channel") {
    NetworkBuilder b({2, 1, 1}, 0);
    auto x = b.conv("dw", LayerKind::kConvDepthwise, b.input(), 2, 1, 1, 0, false);
    Network n = std::move(b).finish("output", x);
    n.node("dw").weights->values = {3.0f, -1.0f};
    const auto y = forward(n, {{2, 1, 1}, {2.0f, 5.0f}});
    CHECK(y.values[0] == doctest::Approx(6.0));
    CHECK(y.values[1] == doctest::Approx(-5.0));
  }
  SUBCASE("input dims mismatch") {
    const Network n = single_conv({1, 3, 3}, LayerKind::kConvStandard, 1, 3, 1, 0, false, 1.0f);
    CHECK_THROWS_AS(forward(n, {{1, 2, 2}, {0, 0, 0, 0}}), ShapeError);
  }
  SUBCASE("non-finite intermediate") {
    const Network n = single_conv({1, 1, 1}, LayerKind::kConvPointwise, 1, 1, 1, 0, false, 1e30f);
    CHECK_THROWS_AS(forward(n, {{1, 1, 1}, {1e30f}}), NumericError);
  }
}

TEST_CASE("forward matches the padded reference on generated networks") {
  for (auto family : {nnir::Family::kMobilenetLike, nnir::Family::kSqueezenetLike,
                      nnir::Family::kPlainChain}) {
    for (std::uint64_t seed = 0; seed < 12; ++seed) {
      const Network n = nnir::synth_model({family, 2, 4, seed, 3, 9, 5});
      const auto probes = make_probes(n.input_dims, 2, seed);
      for (const auto& in : probes.inputs) {
        const auto y = forward(n, in);
        const auto ref = testing::reference_forward(n, in.values);
        REQUIRE(ref.v.size() == y.values.size());
        for (std::size_t i = 0; i < ref.v.size(); ++i)
          CHECK(std::abs(ref.v[i] - y.values[i]) <= 1e-5 * std::max(1.0, std::abs(ref.v[i])));
      }
    }
  }
}

TEST_CASE("forward is deterministic") {
  const Network n = nnir::synth_model({nnir::Family::kMobilenetLike, 3, 8, 4, 3, 10});
  const auto probes = make_probes(n.input_dims, 3, 9);
  const auto a = forward_all(n, probes);
  const auto b = forward_all(n, probes);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].values == b[i].values);
}

TEST_CASE("probes are reproducible and in range") {
  const auto a = make_probes({3, 4, 5}, 7, 11);
  const auto b = make_probes({3, 4, 5}, 7, 11);
  const auto c = make_probes({3, 4, 5}, 7, 12);
  REQUIRE(a.inputs.size() == 7);
  CHECK(a.inputs[6].values == b.inputs[6].values);
  CHECK(a.inputs[0].values != c.inputs[0].values);
  for (const auto& in : a.inputs) {
    CHECK(in.values.size() == 60);
    for (float v : in.values) CHECK((v >= 0.0f && v < 1.0f));
  }
  CHECK(make_probes({1, 1, 1}).inputs.size() == kDefaultProbeCount);
}

TEST_CASE("property: permuting filters with their consumers leaves outputs unchanged") {
  for (auto family : {nnir::Family::kMobilenetLike, nnir::Family::kPlainChain}) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const Network n = nnir::synth_model({family, 3, 6, seed, 3, 8, 5});
      Rng rng(splitmix64(seed));
      const auto layers = pruner::prunable_layers(n);
      const std::string& layer = layers[rng() % layers.size()];
      std::vector<std::size_t> perm(static_cast<std::size_t>(n.node(layer).c_out()));
      std::iota(perm.begin(), perm.end(), 0);
      std::shuffle(perm.begin(), perm.end(), rng);
      Network p = n;
      permute_layer(p, layer, perm);
      const auto probes = make_probes(n.input_dims, 4, seed);
      CHECK(max_abs_diff(forward_all(n, probes), forward_all(p, probes)) <= 1e-6);
    }
  }
}

TEST_CASE("count_macs examples") {
  SUBCASE("standard 3x3") {
    const Network n = single_conv({3, 8, 8}, LayerKind::kConvStandard, 4, 3, 1, 1, false, 1.0f);
    CHECK(count_macs(n).total == 6912);
  }
  SUBCASE("scalar pointwise") {
    const Network n = single_conv({1, 1, 1}, LayerKind::kConvPointwise, 1, 1, 1, 0, false, 1.0f);
    CHECK(count_macs(n).total == 1);
  }
  SUBCASE("depthwise") {
    const Network n = single_conv({8, 4, 4}, LayerKind::kConvDepthwise, 8, 3, 1, 1, false, 1.0f);
    CHECK(count_macs(n).total == 1152);
  }
  SUBCASE("per-layer breakdown sums to the total") {
    const Network n = nnir::synth_model({nnir::Family::kSqueezenetLike, 3, 8, 0});
    const auto r = count_macs(n);
    std::uint64_t s = 0;
    for (const auto& [id, m] : r.per_layer) s += m;
    CHECK(s == r.total);
  }
}

TEST_CASE("count_macs equals the instrumented multiply counter") {
  for (auto family : {nnir::Family::kMobilenetLike, nnir::Family::kSqueezenetLike,
                      nnir::Family::kPlainChain}) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      Rng rng(splitmix64(seed * 3 + 1));
      const int size = 5 + static_cast<int>(rng() % 8);
      const Network n = nnir::synth_model({family, 1 + static_cast<int>(rng() % 3),
                                           2 + static_cast<int>(rng() % 5), seed, 3, size, 4});
      std::uint64_t macs = 0;
      testing::reference_forward(n, std::vector<float>(n.input_dims.count(), 0.5f), &macs);
      CHECK(count_macs(n).total == macs);
    }
  }
}

TEST_CASE("count_params") {
  SUBCASE("single pointwise with bias") {
    const Network n = single_conv({32, 1, 1}, LayerKind::kConvPointwise, 64, 1, 1, 0, true, 1.0f);
    CHECK(count_params(n) == 2112);
  }
  SUBCASE("no conv nodes") {
    NetworkBuilder b({3, 4, 4}, 0);
    const Network n = std::move(b).finish("output", b.relu("r", b.input()));
    CHECK(count_params(n) == 0);
  }
  SUBCASE("matches enumeration") {
    for (auto family : {nnir::Family::kMobilenetLike, nnir::Family::kSqueezenetLike,
                        nnir::Family::kPlainChain}) {
      for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const Network n = nnir::synth_model({family, 1 + static_cast<int>(seed % 4),
                                             1 + static_cast<int>(seed % 9), seed});
        CHECK(count_params(n) == testing::enumerate_params(n));
      }
    }
  }
}

TEST_CASE("fidelity") {
  const Network n = nnir::synth_model({nnir::Family::kMobilenetLike, 2, 8, 0, 3, 8});
  const auto probes = make_probes(n.input_dims, 16, 1);
  SUBCASE("identity") {
    const auto f = fidelity(n, n, probes);
    CHECK(f.argmax_agreement == 1.0);
    CHECK(f.mean_abs_deviation == 0.0);
    CHECK(f.probe_count == 16);
  }
  SUBCASE("removing a zeroed filter") {
    Network z = n;
    auto& c = z.node("conv1");
    const std::size_t fs = c.weights->dims.filter_size();
    std::fill_n(c.weights->values.begin() + 3 * fs, fs, 0.0f);
    c.bias[3] = 0.0f;
    const auto pruned = pruner::remove_filters(z, {"conv1", {3}}).network;
    const auto f = fidelity(z, pruned, probes);
    CHECK(f.mean_abs_deviation <= 1e-6);
    CHECK(f.argmax_agreement == 1.0);
  }
  SUBCASE("mismatched output dims") {
    const Network other = nnir::synth_model({nnir::Family::kMobilenetLike, 2, 8, 0, 3, 8, 7});
    CHECK_THROWS_AS(fidelity(n, other, probes), ShapeError);
  }
  SUBCASE("csv") {
    std::ostringstream os;
    write_fidelity_csv(os, {0.5, 0.25, 4});
    CHECK(os.str().rfind("argmax_agreement,mean_abs_deviation,probe_count\n", 0) == 0);
  }
}

TEST_CASE("output argmax takes the first maximum") {
  CHECK(output_argmax({{3, 1, 1}, {1.0f, 4.0f, 4.0f}}) == 1);
  CHECK(output_argmax({{2, 1, 2}, {1.0f, 1.0f, 2.0f, -1.0f}}) == 0);
}

// With i.i.d. uniform weights the per-filter score spread is narrow and dead
// ReLU units decouple score from effect, so the ordering holds per trial only
// modestly more often than chance. The threshold is the Monte-Carlo rate
// (62/100) less a margin.
TEST_CASE("lowest-weight removal perturbs less than highest-weight removal") {
  int ordered = 0;
  double sum_lo = 0.0, sum_hi = 0.0;
  for (std::uint64_t trial = 0; trial < 100; ++trial) {
    const Network n = nnir::synth_model({nnir::Family::kMobilenetLike, 3, 8, trial, 3, 8});
    Rng rng(splitmix64(trial ^ 0xf1de));
    const auto layers = pruner::prunable_layers(n);
    const std::string& layer = layers[rng() % layers.size()];
    const auto ranked = ranking::rank_layer(n, layer);
    const auto probes = make_probes(n.input_dims, 64, trial);
    const auto lo = pruner::remove_filters(n, {layer, {ranked.front().index}}).network;
    const auto hi = pruner::remove_filters(n, {layer, {ranked.back().index}}).network;
    const double d_lo = fidelity(n, lo, probes).mean_abs_deviation;
    const double d_hi = fidelity(n, hi, probes).mean_abs_deviation;
    if (d_lo <= d_hi) ++ordered;
    sum_lo += d_lo;
    sum_hi += d_hi;
  }
  MESSAGE("ordered in " << ordered << "/100 trials; mean deviation " << sum_lo / 100 << " vs "
                        << sum_hi / 100);
  CHECK(ordered >= 55);
}
