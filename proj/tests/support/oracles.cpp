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

#include "oracles.hpp"

#include <algorithm>
#include <functional>
#include <limits>
#include <random>
#include <stdexcept>

#include "cprune/synth.hpp"

namespace cprune::testing {
namespace {

using nnir::LayerKind;
using nnir::Node;

Tensor3 conv(const Node& node, const Tensor3& in, std::uint64_t* macs) {
  const auto& wd = node.weights->dims;
  const int s = node.spec.stride;
  const int p = node.spec.padding;
  Tensor3 padded{in.c, in.h + 2 * p, in.w + 2 * p, {}};
  padded.v.assign(static_cast<std::size_t>(padded.c) * padded.h * padded.w, 0.0);
  for (int c = 0; c < in.c; ++c)
    for (int y = 0; y < in.h; ++y)
      for (int x = 0; x < in.w; ++x) padded.at(c, y + p, x + p) = in.at(c, y, x);

  Tensor3 out;
  out.c = wd.c_out;
  out.h = (padded.h - wd.kh) / s + 1;
  out.w = (padded.w - wd.kw) / s + 1;
  out.v.assign(static_cast<std::size_t>(out.c) * out.h * out.w, 0.0);
  const bool dw = node.spec.kind == LayerKind::kConvDepthwise;
  auto weight = [&](int o, int i, int ky, int kx) {
    return static_cast<double>(
        node.weights->values[((static_cast<std::size_t>(o) * wd.c_in + i) * wd.kh + ky) * wd.kw + kx]);
  };
  for (int o = 0; o < out.c; ++o) {
    for (int y = 0; y < out.h; ++y) {
      for (int x = 0; x < out.w; ++x) {
        double acc = node.spec.has_bias ? node.bias[o] : 0.0;
        for (int i = 0; i < wd.c_in; ++i) {
          const int ch = dw ? o : i;
          for (int ky = 0; ky < wd.kh; ++ky) {
            for (int kx = 0; kx < wd.kw; ++kx) {
              acc += weight(o, i, ky, kx) * padded.at(ch, y * s + ky, x * s + kx);
              if (macs) ++*macs;
            }
          }
        }
        out.at(o, y, x) = acc;
      }
    }
  }
  return out;
}

Tensor3 pool(const Node& node, const Tensor3& in) {
  const bool global = node.spec.global_pool;
  const int kh = global ? in.h : node.spec.kernel_h;
  const int kw = global ? in.w : node.spec.kernel_w;
  const int s = global ? 1 : node.spec.stride;
  const int p = global ? 0 : node.spec.padding;
  Tensor3 out{in.c, (in.h + 2 * p - kh) / s + 1, (in.w + 2 * p - kw) / s + 1, {}};
  out.v.assign(static_cast<std::size_t>(out.c) * out.h * out.w, 0.0);
  const bool is_max = node.spec.kind == LayerKind::kPoolMax;
  for (int c = 0; c < in.c; ++c) {
    for (int y = 0; y < out.h; ++y) {
      for (int x = 0; x < out.w; ++x) {
        std::vector<double> window;
        for (int ky = 0; ky < kh; ++ky) {
          for (int kx = 0; kx < kw; ++kx) {
            const int iy = y * s - p + ky;
            const int ix = x * s - p + kx;
            if (iy >= 0 && iy < in.h && ix >= 0 && ix < in.w) window.push_back(in.at(c, iy, ix));
          }
        }
        double r = 0.0;
        if (is_max) {
          r = *std::max_element(window.begin(), window.end());
        } else {
          for (double v : window) r += v;
          r /= static_cast<double>(window.size());
        }
        out.at(c, y, x) = r;
      }
    }
  }
  return out;
}

}  // namespace

Tensor3 reference_forward(const nnir::Network& net, const std::vector<float>& input,
                          std::uint64_t* macs) {
  std::map<std::string, Tensor3> memo;
  std::function<const Tensor3&(const std::string&)> eval = [&](const std::string& id) -> const Tensor3& {
    if (auto it = memo.find(id); it != memo.end()) return it->second;
    const Node& node = net.node(id);
    Tensor3 out;
    switch (node.spec.kind) {
      case LayerKind::kInput:
        out = {net.input_dims.c, net.input_dims.h, net.input_dims.w,
               std::vector<double>(input.begin(), input.end())};
        break;
      case LayerKind::kOutput:
        out = eval(node.predecessors.at(0));
        break;
      case LayerKind::kRelu:
        out = eval(node.predecessors.at(0));
        for (double& v : out.v) v = std::max(v, 0.0);
        break;
      case LayerKind::kPoolMax:
      case LayerKind::kPoolAvg:
        out = pool(node, eval(node.predecessors.at(0)));
        break;
      case LayerKind::kConcat: {
        const Tensor3& first = eval(node.predecessors.at(0));
        out = {0, first.h, first.w, {}};
        for (const auto& p : node.predecessors) {
          const Tensor3& part = eval(p);
          out.c += part.c;
          out.v.insert(out.v.end(), part.v.begin(), part.v.end());
        }
        break;
      }
      case LayerKind::kConvStandard:
      case LayerKind::kConvPointwise:
      case LayerKind::kConvDepthwise:
        out = conv(node, eval(node.predecessors.at(0)), macs);
        break;
    }
    return memo.emplace(id, std::move(out)).first->second;
  };
  return eval(net.exit);
}

std::uint64_t enumerate_params(const nnir::Network& net) {
  std::uint64_t n = 0;
  for (const auto& node : net.nodes) {
    if (!node.weights) continue;
    const auto& d = node.weights->dims;
    for (int o = 0; o < d.c_out; ++o)
      for (int i = 0; i < d.c_in; ++i)
        for (int y = 0; y < d.kh; ++y)
          for (int x = 0; x < d.kw; ++x) ++n;
    if (node.spec.has_bias)
      for (int o = 0; o < d.c_out; ++o) ++n;
  }
  return n;
}

double reference_mw(const nnir::Node& node, std::size_t o) {
  const auto& d = node.weights->dims;
  double sum = 0.0;
  std::size_t count = 0;
  for (int i = 0; i < d.c_in; ++i) {
    for (int y = 0; y < d.kh; ++y) {
      for (int x = 0; x < d.kw; ++x) {
        const double w =
            node.weights->values[((o * d.c_in + i) * d.kh + y) * d.kw + static_cast<std::size_t>(x)];
        sum += w * w;
        ++count;
      }
    }
  }
  return sum / static_cast<double>(count);
}

BruteCluster brute_min_cluster(const nnir::Network& net, const std::vector<std::string>& layers,
                               std::size_t size) {
  BruteCluster best;
  best.avg = std::numeric_limits<double>::infinity();
  for (const auto& id : layers) {
    const auto& node = net.node(id);
    const auto k = static_cast<std::size_t>(node.c_out());
    std::vector<double> mw(k);
    for (std::size_t o = 0; o < k; ++o) mw[o] = reference_mw(node, o);
    // Every subset of `size` filters via a selection mask.
    std::vector<bool> mask(k, false);
    std::fill(mask.end() - static_cast<std::ptrdiff_t>(size), mask.end(), true);
    do {
      std::vector<std::size_t> members;
      double sum = 0.0;
      for (std::size_t o = 0; o < k; ++o) {
        if (mask[o]) {
          members.push_back(o);
          sum += mw[o];
        }
      }
      const double avg = sum / static_cast<double>(size);
      if (avg < best.avg) best = {id, members, avg};
    } while (std::next_permutation(mask.begin(), mask.end()));
  }
  return best;
}

PlantedSeries planted_series(std::size_t hi, std::size_t lo, std::size_t period, double depth,
                             double noise_sigma, double slope, Rng& rng) {
  std::normal_distribution<double> noise(0.0, noise_sigma);
  PlantedSeries s;
  for (std::size_t f = hi; f >= lo; --f) {
    double v = 10.0 + slope * static_cast<double>(f);
    if (f % period == 0) v -= depth;
    if (noise_sigma > 0.0) v += noise(rng);
    s.filters.push_back(f);
    s.values.push_back(v);
    if (f == lo) break;
  }
  return s;
}

nnir::Network toy_net(std::uint64_t seed) {
  Rng rng(splitmix64(seed ^ 0x7e57u));
  std::uniform_int_distribution<int> width(4, 6);
  nnir::NetworkBuilder b({2, 6, 6}, seed);
  std::string x = b.input();
  for (int i = 1; i <= 3; ++i) {
    const std::string id = "L" + std::to_string(i);
    x = b.conv(id, LayerKind::kConvStandard, x, width(rng), 3, 1, 1);
    x = b.relu(id + "/relu", x);
  }
  x = b.global_pool("pool", x);
  x = b.conv("classifier", LayerKind::kConvPointwise, x, 8);
  return std::move(b).finish("output", x);
}

nnir::Network table_one_net(std::uint64_t seed) {
  const std::vector<int> widths = {32, 64, 128, 128, 256, 256, 512, 512, 512, 512, 512};
  return nnir::mobilenet_from_widths(widths, {3, 32, 32}, seed);
}

}  // namespace cprune::testing
