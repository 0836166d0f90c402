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

#include "cprune/engine.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>

#include "cprune/error.hpp"
#include "cprune/random.hpp"

namespace cprune::engine {

namespace {

using nnir::LayerKind;
using nnir::Node;

// Valid output range [lo, hi) for kernel offset k: 0 <= o*stride - pad + k < extent.
std::pair<int, int> valid_range(int out_extent, int in_extent, int stride, int pad, int k) {
  int lo = 0;
  while (lo < out_extent && lo * stride - pad + k < 0) ++lo;
  int hi = out_extent;
  while (hi > lo && (hi - 1) * stride - pad + k >= in_extent) --hi;
  return {lo, hi};
}

Activation conv_forward(const Node& node, const Activation& in, const ActivationDims& out_dims) {
  const auto& w = *node.weights;
  const int kh = w.dims.kh;
  const int kw = w.dims.kw;
  const int stride = node.spec.stride;
  const int pad = node.spec.padding;
  const bool depthwise = node.spec.kind == LayerKind::kConvDepthwise;
  const int c_in = w.dims.c_in;
  const std::size_t in_plane = static_cast<std::size_t>(in.dims.h) * in.dims.w;
  const std::size_t out_plane = static_cast<std::size_t>(out_dims.h) * out_dims.w;
  Activation out{out_dims, std::vector<float>(out_dims.count())};
  std::vector<double> acc(out_plane);
  for (int o = 0; o < out_dims.c; ++o) {
    const float* filter = w.values.data() + static_cast<std::size_t>(o) * w.dims.filter_size();
    std::fill(acc.begin(), acc.end(), node.spec.has_bias ? static_cast<double>(node.bias[o]) : 0.0);
    for (int i = 0; i < c_in; ++i) {
      const int channel = depthwise ? o : i;
      const float* plane = in.values.data() + channel * in_plane;
      const float* kernel = filter + static_cast<std::size_t>(i) * kh * kw;
      for (int ky = 0; ky < kh; ++ky) {
        const auto [y0, y1] = valid_range(out_dims.h, in.dims.h, stride, pad, ky);
        for (int kx = 0; kx < kw; ++kx) {
          const auto [x0, x1] = valid_range(out_dims.w, in.dims.w, stride, pad, kx);
          const double wv = kernel[ky * kw + kx];
          for (int oy = y0; oy < y1; ++oy) {
            const float* row = plane + static_cast<std::size_t>(oy * stride - pad + ky) * in.dims.w;
            double* dst = acc.data() + static_cast<std::size_t>(oy) * out_dims.w;
            if (stride == 1) {
              const float* src = row + (kx - pad);
              for (int ox = x0; ox < x1; ++ox) dst[ox] += wv * src[ox];
            } else {
              for (int ox = x0; ox < x1; ++ox) dst[ox] += wv * row[ox * stride - pad + kx];
            }
          }
        }
      }
    }
    float* dst = out.values.data() + static_cast<std::size_t>(o) * out_plane;
    for (std::size_t p = 0; p < out_plane; ++p) dst[p] = static_cast<float>(acc[p]);
  }
  return out;
}

Activation pool_forward(const Node& node, const Activation& in, const ActivationDims& out_dims) {
  Activation out{out_dims, std::vector<float>(out_dims.count())};
  const bool is_max = node.spec.kind == LayerKind::kPoolMax;
  const int kh = node.spec.global_pool ? in.dims.h : node.spec.kernel_h;
  const int kw = node.spec.global_pool ? in.dims.w : node.spec.kernel_w;
  const int stride = node.spec.global_pool ? 1 : node.spec.stride;
  const int pad = node.spec.global_pool ? 0 : node.spec.padding;
  for (int c = 0; c < out_dims.c; ++c) {
    const float* plane = in.values.data() + static_cast<std::size_t>(c) * in.dims.h * in.dims.w;
    for (int oy = 0; oy < out_dims.h; ++oy) {
      for (int ox = 0; ox < out_dims.w; ++ox) {
        double acc = is_max ? -std::numeric_limits<double>::infinity() : 0.0;
        int n = 0;
        for (int ky = 0; ky < kh; ++ky) {
          const int iy = oy * stride - pad + ky;
          if (iy < 0 || iy >= in.dims.h) continue;
          for (int kx = 0; kx < kw; ++kx) {
            const int ix = ox * stride - pad + kx;
            if (ix < 0 || ix >= in.dims.w) continue;
            const double v = plane[iy * in.dims.w + ix];
            acc = is_max ? std::max(acc, v) : acc + v;
            ++n;
          }
        }
        if (!is_max) acc /= n;
        out.values[(static_cast<std::size_t>(c) * out_dims.h + oy) * out_dims.w + ox] =
            static_cast<float>(acc);
      }
    }
  }
  return out;
}

}  // namespace

ProbeSet make_probes(ActivationDims dims, std::size_t count, std::uint64_t seed) {
  ProbeSet set;
  set.seed = seed;
  Rng rng(splitmix64(seed));
  set.inputs.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    Activation a{dims, std::vector<float>(dims.count())};
    for (auto& v : a.values) v = static_cast<float>(uniform01(rng));
    set.inputs.push_back(std::move(a));
  }
  return set;
}

namespace {

Activation run(const Network& network, const nnir::ShapeMap& shapes,
               const std::vector<std::size_t>& order, const Activation& input) {
  if (input.dims != network.input_dims || input.values.size() != input.dims.count())
    throw ShapeError("probe dims do not match the network input dims");
  std::vector<Activation> acts(network.nodes.size());
  auto get = [&](const std::string& id) -> const Activation& {
    return acts[*network.index_of(id)];
  };
  for (std::size_t pos : order) {
    const Node& node = network.nodes[pos];
    const ActivationDims& dims = shapes.at(node.id);
    Activation out;
    switch (node.spec.kind) {
      case LayerKind::kInput:
        out = input;
        break;
      case LayerKind::kOutput:
        out = get(node.predecessors.front());
        break;
      case LayerKind::kRelu:
        out = get(node.predecessors.front());
        for (auto& v : out.values) v = std::max(v, 0.0f);
        break;
      case LayerKind::kPoolMax:
      case LayerKind::kPoolAvg:
        out = pool_forward(node, get(node.predecessors.front()), dims);
        break;
      case LayerKind::kConcat:
        out.dims = dims;
        for (const auto& p : node.predecessors) {
          const auto& part = get(p).values;
          out.values.insert(out.values.end(), part.begin(), part.end());
        }
        break;
      case LayerKind::kConvStandard:
      case LayerKind::kConvPointwise:
      case LayerKind::kConvDepthwise:
        out = conv_forward(node, get(node.predecessors.front()), dims);
        break;
    }
    if (!std::all_of(out.values.begin(), out.values.end(), [](float v) { return std::isfinite(v); }))
      throw NumericError("non-finite activation at node '" + node.id + "'");
    acts[pos] = std::move(out);
  }
  return std::move(acts[*network.index_of(network.exit)]);
}

}  // namespace

Activation forward(const Network& network, const Activation& input) {
  return run(network, nnir::infer_shapes(network), nnir::topological_order(network), input);
}

std::vector<Activation> forward_all(const Network& network, const ProbeSet& probes) {
  const auto shapes = nnir::infer_shapes(network);
  const auto order = nnir::topological_order(network);
  std::vector<Activation> out;
  out.reserve(probes.inputs.size());
  for (const auto& in : probes.inputs) out.push_back(run(network, shapes, order, in));
  return out;
}

MacReport count_macs(const Network& network) {
  const auto shapes = nnir::infer_shapes(network);
  MacReport report;
  for (std::size_t pos : nnir::topological_order(network)) {
    const Node& node = network.nodes[pos];
    if (!node.is_conv()) continue;
    const auto& out = shapes.at(node.id);
    const auto& w = node.weights->dims;
    // Depthwise weights hold c_in = 1, so one expression covers every kind.
    const std::uint64_t macs = static_cast<std::uint64_t>(out.h) * out.w * w.c_out * w.c_in *
                               w.kh * w.kw;
    report.per_layer.emplace_back(node.id, macs);
    report.total += macs;
  }
  return report;
}

std::uint64_t count_params(const Network& network) {
  std::uint64_t total = 0;
  for (const auto& node : network.nodes) {
    if (!node.is_conv()) continue;
    total += node.weights->values.size() + node.bias.size();
  }
  return total;
}

std::size_t output_argmax(const Activation& output) {
  const std::size_t plane = static_cast<std::size_t>(output.dims.h) * output.dims.w;
  std::size_t best = 0;
  double best_sum = -std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < static_cast<std::size_t>(output.dims.c); ++c) {
    double s = 0.0;
    for (std::size_t i = 0; i < plane; ++i) s += output.values[c * plane + i];
    if (s > best_sum) {
      best_sum = s;
      best = c;
    }
  }
  return best;
}

FidelityReport compare_outputs(std::span<const Activation> reference,
                               std::span<const Activation> candidate) {
  if (reference.size() != candidate.size())
    throw ShapeError("reference and candidate probe counts differ");
  FidelityReport r;
  r.probe_count = reference.size();
  if (reference.empty()) return r;
  std::size_t agree = 0;
  double deviation = 0.0;
  std::size_t elements = 0;
  for (std::size_t p = 0; p < reference.size(); ++p) {
    const auto& a = reference[p];
    const auto& b = candidate[p];
    if (a.dims != b.dims) throw ShapeError("reference and candidate output dims differ");
    if (output_argmax(a) == output_argmax(b)) ++agree;
    for (std::size_t i = 0; i < a.values.size(); ++i)
      deviation += std::abs(static_cast<double>(a.values[i]) - b.values[i]);
    elements += a.values.size();
  }
  r.argmax_agreement = static_cast<double>(agree) / static_cast<double>(reference.size());
  r.mean_abs_deviation = elements ? deviation / static_cast<double>(elements) : 0.0;
  return r;
}

FidelityReport fidelity(const Network& reference, const Network& candidate,
                        const ProbeSet& probes) {
  const auto a = forward_all(reference, probes);
  const auto b = forward_all(candidate, probes);
  return compare_outputs(a, b);
}

void write_fidelity_csv(std::ostream& os, const FidelityReport& report) {
  os << "argmax_agreement,mean_abs_deviation,probe_count\n"
     << std::setprecision(17) << report.argmax_agreement << ','
     << report.mean_abs_deviation << ',' << report.probe_count << '\n';
}

}  // namespace cprune::engine
