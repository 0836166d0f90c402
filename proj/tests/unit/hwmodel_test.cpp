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

#include <cmath>
#include <sstream>

#include "cprune/error.hpp"
#include "cprune/hwmodel.hpp"
#include "cprune/pruner.hpp"
#include "cprune/synth.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace cprune;
using namespace cprune::hwmodel;
using nnir::LayerKind;

namespace {

ConvWork pointwise(int c_in, int c_out, int hw = 8) {
  return {"l", LayerKind::kConvPointwise, c_in, c_out, 1, 1, hw, hw,
          static_cast<std::uint64_t>(c_in) * c_out * hw * hw};
}

// The latency formula evaluated directly.
double lane_formula(const LaneAlignedModel::Params& p, const ConvWork& w) {
  const double work = static_cast<double>(w.h_out) * w.w_out * w.kh * w.kw;
  const auto groups = [&](int c) { return std::ceil(static_cast<double>(c) / p.lane_width); };
  const auto mis = [&](int c) { return c % p.lane_width ? 1.0 : 0.0; };
  if (w.kind == LayerKind::kConvDepthwise)
    return p.c0 + work * (p.c1 * groups(w.c_out) + p.c2 * mis(w.c_out));
  return p.c0 + work * (p.c1 * groups(w.c_in) * groups(w.c_out) + p.c2 * (mis(w.c_in) + mis(w.c_out)));
}

}  // namespace

TEST_CASE("lane aligned examples") {
  const LaneAlignedModel m;
  const double work = 64.0;
  CHECK(m.layer_latency(pointwise(64, 63)) - m.layer_latency(pointwise(64, 64)) ==
        doctest::Approx(m.params().c2 * work));
  CHECK(m.layer_latency(pointwise(64, 56)) < m.layer_latency(pointwise(64, 64)));
  for (int c_in : {3, 8, 17})
    for (int c_out = 1; c_out <= 70; ++c_out)
      CHECK(m.layer_latency(pointwise(c_in, c_out)) ==
            doctest::Approx(lane_formula(m.params(), pointwise(c_in, c_out))).epsilon(1e-12));
  ConvWork dw{"dw", LayerKind::kConvDepthwise, 1, 20, 3, 3, 4, 4, 20 * 9 * 16};
  CHECK(m.layer_latency(dw) == doctest::Approx(lane_formula(m.params(), dw)).epsilon(1e-12));
}

TEST_CASE("lane width one is smooth") {
  const LaneAlignedModel m({1, 0.05, 2e-7, 1e-5});
  double prev = 0.0;
  for (int c = 1; c <= 64; ++c) {
    const double t = m.layer_latency(pointwise(16, c));
    CHECK(t == doctest::Approx(0.05 + 64 * 2e-7 * 16 * c).epsilon(1e-12));
    CHECK(t > prev);
    prev = t;
  }
}

TEST_CASE("property: lane latency has strict minima exactly at lane multiples") {
  for (int lane : {2, 4, 8, 12}) {
    const LaneAlignedModel m({lane, 0.05, 2e-7, 1e-5});
    for (int c = lane; c <= 8 * lane; ++c) {
      const double t = m.layer_latency(pointwise(lane * 2, c));
      const double up = m.layer_latency(pointwise(lane * 2, c + 1));
      const double down = m.layer_latency(pointwise(lane * 2, c - 1));
      const bool minimum = t < up && t < down;
      CHECK(minimum == (c % lane == 0));
      // Constant on the plateau between multiples.
      if (c % lane != 0 && (c + 1) % lane != 0) CHECK(t == up);
    }
  }
}

TEST_CASE("model parameter checks") {
  CHECK_THROWS_AS(LaneAlignedModel({0, 0.05, 2e-7, 1e-5}), ConfigError);
  CHECK_THROWS_AS(LaneAlignedModel({8, -1.0, 2e-7, 1e-5}), ConfigError);
  CHECK_THROWS_AS(TemporalModel({0.05, 1e-6, 1.0, 0}), ConfigError);
  CHECK_THROWS_AS(TemporalModel({0.05, -1e-6, 0.0, 0}), ConfigError);
  CHECK_THROWS_AS((AccuracyResponseModel{-0.1, 8}.check()), ConfigError);
}

TEST_CASE("temporal latency") {
  SUBCASE("strictly monotone in MACs without jitter") {
    const TemporalModel m;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      auto n = nnir::synth_model({nnir::Family::kPlainChain, 3, 12, seed, 3, 8});
      double prev = network_latency(m, n).total_ms;
      for (int step = 0; step < 8; ++step) {
        n = pruner::remove_filters(n, {"conv2", {0}}).network;
        const double t = network_latency(m, n).total_ms;
        CHECK(t < prev);
        prev = t;
      }
    }
  }
  SUBCASE("jitter is bounded and deterministic") {
    const TemporalModel a({0.05, 1e-6, 0.3, 4}), b({0.05, 1e-6, 0.3, 4}), c({0.05, 1e-6, 0.3, 5});
    const auto w = pointwise(32, 32);
    CHECK(a.layer_latency(w) == b.layer_latency(w));
    CHECK(a.layer_latency(w) != c.layer_latency(w));
    const double base = 1e-6 * static_cast<double>(w.macs);
    CHECK(a.layer_latency(w) >= 0.05 + base * 0.7);
    CHECK(a.layer_latency(w) < 0.05 + base * 1.3);
  }
}

TEST_CASE("network latency additivity") {
  SUBCASE("two identical layers") {
    nnir::NetworkBuilder b({8, 4, 4}, 0);
    auto x = b.conv("a", LayerKind::kConvPointwise, b.input(), 8);
    x = b.conv("b", LayerKind::kConvPointwise, x, 8);
    const auto n = std::move(b).finish("output", x);
    const LaneAlignedModel m;
    const auto r = network_latency(m, n);
    REQUIRE(r.per_layer.size() == 2);
    CHECK(r.total_ms == 2 * r.per_layer[0].second);
  }
  SUBCASE("total equals the breakdown sum") {
    const LaneAlignedModel lane;
    const TemporalModel temporal({0.05, 1e-6, 0.2, 1});
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const auto n = nnir::synth_model({nnir::Family::kSqueezenetLike, 3, 6, seed});
      for (const LatencyModel* m : {static_cast<const LatencyModel*>(&lane),
                                    static_cast<const LatencyModel*>(&temporal)}) {
        const auto r = network_latency(*m, n);
        double s = 0.0;
        for (const auto& [id, t] : r.per_layer) s += t;
        CHECK(r.total_ms == s);
      }
    }
  }
  SUBCASE("aligned pruning by eight never raises lane latency") {
    const LaneAlignedModel m;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      auto n = nnir::synth_model({nnir::Family::kMobilenetLike, 3, 32, seed, 3, 8});
      double prev = network_latency(m, n).total_ms;
      for (int step = 0; step < 3; ++step) {
        std::vector<std::size_t> idx(8);
        for (std::size_t i = 0; i < 8; ++i) idx[i] = i * 2;
        n = pruner::remove_filters(n, {"conv2", idx}).network;
        const double t = network_latency(m, n).total_ms;
        CHECK(t <= prev);
        prev = t;
      }
    }
  }
}

TEST_CASE("measured trace") {
  const auto net = testing::table_one_net();
  const std::size_t filters = total_filters(net);
  std::ostringstream csv;
  csv << "layer_id,filters_remaining,latency_ms\n"
      << "*," << filters << ",4787.18\n"
      << "conv7,512,12.5\n"
      << "conv7,416,10.25\n";
  std::istringstream in(csv.str());
  const auto m = MeasuredTraceModel::from_csv(in);
  SUBCASE("whole-network row of the unpruned model") {
    const auto r = network_latency(m, net);
    CHECK(r.total_ms == 4787.18);
    REQUIRE(r.per_layer.size() == 1);
    CHECK(r.per_layer[0].first == "*");
  }
  SUBCASE("layer rows, no interpolation") {
    ConvWork w{"conv7", LayerKind::kConvPointwise, 512, 512, 1, 1, 2, 2, 0};
    CHECK(m.layer_latency(w) == 12.5);
    w.c_out = 416;
    CHECK(m.layer_latency(w) == 10.25);
    w.c_out = 464;
    try {
      m.layer_latency(w);
      FAIL("expected a lookup miss");
    } catch (const LookupError& e) {
      CHECK(std::string(e.what()).find("conv7") != std::string::npos);
      CHECK(std::string(e.what()).find("464") != std::string::npos);
    }
  }
  SUBCASE("missing whole-network row falls back to layers and misses") {
    const auto pruned = pruner::remove_filters(net, {"conv7", {0}}).network;
    CHECK_THROWS_AS(network_latency(m, pruned), LookupError);
  }
  SUBCASE("malformed csv") {
    for (const char* bad : {"", "layer,filters,ms\n", "layer_id,filters_remaining,latency_ms\nconv1,x,1\n",
                            "layer_id,filters_remaining,latency_ms\nconv1,3\n",
                            "layer_id,filters_remaining,latency_ms\nconv1,3,-1\n"}) {
      std::istringstream is(bad);
      CHECK_THROWS_AS(MeasuredTraceModel::from_csv(is), FormatError);
    }
  }
  SUBCASE("deterministic") {
    std::istringstream again(csv.str());
    const auto m2 = MeasuredTraceModel::from_csv(again);
    CHECK(network_latency(m2, net).total_ms == network_latency(m, net).total_ms);
  }
}

TEST_CASE("accuracy response") {
  auto n = nnir::synth_model({nnir::Family::kMobilenetLike, 2, 8, 0});
  const engine::FidelityReport base{0.9, 0.125, 64};
  SUBCASE("aligned network is unchanged") {
    CHECK(misaligned_layers(n, 8) == 0);
    const auto r = adjusted_fidelity({0.05, 8}, n, base);
    CHECK(r.argmax_agreement == 0.9);
    CHECK(r.mean_abs_deviation == 0.125);
  }
  n = pruner::remove_filters(n, {"conv1", {0}}).network;
  SUBCASE("one misaligned layer") {
    // conv1 and the depthwise conv2/dw both lose a channel.
    CHECK(misaligned_layers(n, 8) == 2);
    auto one = nnir::synth_model({nnir::Family::kPlainChain, 3, 8, 0});
    one = pruner::remove_filters(one, {"conv2", {0}}).network;
    CHECK(misaligned_layers(one, 8) == 1);
    const auto r = adjusted_fidelity({0.05, 8}, one, base);
    CHECK(r.argmax_agreement == doctest::Approx(0.85));
    CHECK(r.mean_abs_deviation == 0.125);
  }
  SUBCASE("delta zero") {
    CHECK(adjusted_fidelity({0.0, 8}, n, base).argmax_agreement == 0.9);
  }
  SUBCASE("clamped at zero") {
    CHECK(adjusted_fidelity({0.6, 8}, n, base).argmax_agreement == 0.0);
  }
}

TEST_CASE("conv workloads") {
  const auto n = nnir::synth_model({nnir::Family::kMobilenetLike, 2, 8, 0, 3, 8});
  const auto ws = conv_workloads(n);
  const auto macs = engine::count_macs(n);
  REQUIRE(ws.size() == macs.per_layer.size());
  for (std::size_t i = 0; i < ws.size(); ++i) {
    CHECK(ws[i].layer == macs.per_layer[i].first);
    CHECK(ws[i].macs == macs.per_layer[i].second);
  }
  // conv0, conv1/dw, conv1, conv2/dw, conv2, classifier
  CHECK(total_filters(n) == 8 + 8 + 8 + 8 + 16 + 16);
}
