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

#include "cprune/synth.hpp"

#include <algorithm>

#include "cprune/error.hpp"

namespace cprune::nnir {

namespace {

int width_multiplier(int step) { return std::min(8, 1 << std::min(step, 3)); }

}  // namespace

std::string_view to_string(Family family) {
  switch (family) {
    case Family::kMobilenetLike: return "mobilenet_like";
    case Family::kSqueezenetLike: return "squeezenet_like";
    case Family::kPlainChain: return "plain_chain";
  }
  return "unknown";
}

Family family_from_string(std::string_view name) {
  if (name == "mobilenet_like") return Family::kMobilenetLike;
  if (name == "squeezenet_like") return Family::kSqueezenetLike;
  if (name == "plain_chain") return Family::kPlainChain;
  throw ConfigError("unsupported family '" + std::string(name) + "'");
}

NetworkBuilder::NetworkBuilder(ActivationDims input, std::uint64_t seed, std::string input_id)
    : input_id_(std::move(input_id)), rng_(splitmix64(seed)) {
  net_.input_dims = input;
  net_.entry = input_id_;
  Node n;
  n.id = input_id_;
  n.spec.kind = LayerKind::kInput;
  net_.nodes.push_back(std::move(n));
  dims_[input_id_] = input;
}

std::string NetworkBuilder::conv(std::string id, LayerKind kind, const std::string& pred,
                                 int c_out, int kernel, int stride, int padding, bool bias) {
  const ActivationDims in = dims_.at(pred);
  Node n;
  n.id = id;
  n.spec.kind = kind;
  n.spec.kernel_h = n.spec.kernel_w = kernel;
  n.spec.stride = stride;
  n.spec.padding = padding;
  n.spec.has_bias = bias;
  n.predecessors = {pred};
  if (kind == LayerKind::kConvDepthwise) c_out = in.c;
  const int c_in = kind == LayerKind::kConvDepthwise ? 1 : in.c;
  Tensor4 w{{c_out, c_in, kernel, kernel}, {}};
  w.values.resize(w.dims.count());
  for (auto& v : w.values) v = static_cast<float>(uniform(rng_, -0.5, 0.5));
  n.weights = std::move(w);
  if (bias) {
    n.bias.resize(static_cast<std::size_t>(c_out));
    for (auto& v : n.bias) v = static_cast<float>(uniform(rng_, -0.5, 0.5));
  }
  dims_[id] = {c_out, conv_output_extent(in.h, kernel, stride, padding),
               conv_output_extent(in.w, kernel, stride, padding)};
  net_.nodes.push_back(std::move(n));
  return id;
}

std::string NetworkBuilder::relu(std::string id, const std::string& pred) {
  Node n;
  n.id = id;
  n.spec.kind = LayerKind::kRelu;
  n.predecessors = {pred};
  dims_[id] = dims_.at(pred);
  net_.nodes.push_back(std::move(n));
  return id;
}

std::string NetworkBuilder::pool(std::string id, LayerKind kind, const std::string& pred,
                                 int kernel, int stride, int padding) {
  const ActivationDims in = dims_.at(pred);
  Node n;
  n.id = id;
  n.spec.kind = kind;
  n.spec.kernel_h = n.spec.kernel_w = kernel;
  n.spec.stride = stride;
  n.spec.padding = padding;
  n.predecessors = {pred};
  dims_[id] = {in.c, conv_output_extent(in.h, kernel, stride, padding),
               conv_output_extent(in.w, kernel, stride, padding)};
  net_.nodes.push_back(std::move(n));
  return id;
}

std::string NetworkBuilder::global_pool(std::string id, const std::string& pred) {
  Node n;
  n.id = id;
  n.spec.kind = LayerKind::kPoolAvg;
  n.spec.global_pool = true;
  n.predecessors = {pred};
  dims_[id] = {dims_.at(pred).c, 1, 1};
  net_.nodes.push_back(std::move(n));
  return id;
}

std::string NetworkBuilder::concat(std::string id, const std::vector<std::string>& preds) {
  Node n;
  n.id = id;
  n.spec.kind = LayerKind::kConcat;
  n.predecessors = preds;
  ActivationDims out = dims_.at(preds.front());
  out.c = 0;
  for (const auto& p : preds) out.c += dims_.at(p).c;
  dims_[id] = out;
  net_.nodes.push_back(std::move(n));
  return id;
}

Network NetworkBuilder::finish(std::string output_id, const std::string& pred) && {
  Node n;
  n.id = output_id;
  n.spec.kind = LayerKind::kOutput;
  n.predecessors = {pred};
  net_.nodes.push_back(std::move(n));
  net_.exit = std::move(output_id);
  return std::move(net_);
}

Network synth_model(const TopologySpec& spec) {
  if (spec.depth < 1 || spec.base_channels < 1 || spec.input_channels < 1 ||
      spec.input_size < 1 || spec.num_classes < 1) {
    throw ConfigError("topology spec fields must be positive");
  }
  const ActivationDims input{spec.input_channels, spec.input_size, spec.input_size};
  NetworkBuilder b(input, spec.seed);
  const int base = spec.base_channels;
  std::string x = b.input();
  int extent = spec.input_size;

  switch (spec.family) {
    case Family::kMobilenetLike: {
      x = b.conv("conv0", LayerKind::kConvPointwise, x, base);
      x = b.relu("conv0/relu", x);
      for (int i = 1; i <= spec.depth; ++i) {
        const std::string name = "conv" + std::to_string(i);
        const int stride = (i % 2 == 0 && extent > 2) ? 2 : 1;
        x = b.conv(name + "/dw", LayerKind::kConvDepthwise, x, 0, 3, stride, 1, false);
        extent = conv_output_extent(extent, 3, stride, 1);
        x = b.relu(name + "/dw/relu", x);
        x = b.conv(name, LayerKind::kConvPointwise, x, base * width_multiplier(i / 2));
        x = b.relu(name + "/relu", x);
      }
      break;
    }
    case Family::kSqueezenetLike: {
      const int stride = extent > 2 ? 2 : 1;
      x = b.conv("conv1", LayerKind::kConvStandard, x, 2 * base, 3, stride, 1);
      extent = conv_output_extent(extent, 3, stride, 1);
      x = b.relu("conv1/relu", x);
      for (int i = 2; i < spec.depth + 2; ++i) {
        const std::string fire = "fire" + std::to_string(i);
        const int m = width_multiplier((i - 2) / 2);
        const std::string sq =
            b.relu(fire + "/relu_squeeze1x1",
                   b.conv(fire + "/squeeze1x1", LayerKind::kConvPointwise, x, base * m));
        const std::string e1 =
            b.relu(fire + "/relu_expand1x1",
                   b.conv(fire + "/expand1x1", LayerKind::kConvPointwise, sq, 2 * base * m));
        const std::string e3 = b.relu(
            fire + "/relu_expand3x3",
            b.conv(fire + "/expand3x3", LayerKind::kConvStandard, sq, 2 * base * m, 3, 1, 1));
        x = b.concat(fire + "/concat", {e1, e3});
        if (i % 2 == 1 && extent > 2) {
          x = b.pool("pool" + std::to_string(i), LayerKind::kPoolMax, x, 3, 2, 1);
          extent = conv_output_extent(extent, 3, 2, 1);
        }
      }
      break;
    }
    case Family::kPlainChain: {
      for (int i = 1; i <= spec.depth; ++i) {
        const std::string name = "conv" + std::to_string(i);
        x = b.relu(name + "/relu", b.conv(name, LayerKind::kConvStandard, x, base, 3, 1, 1));
      }
      x = b.global_pool("pool", x);
      return std::move(b).finish("output", x);
    }
  }
  x = b.global_pool("pool", x);
  x = b.conv("classifier", LayerKind::kConvPointwise, x, spec.num_classes);
  return std::move(b).finish("output", x);
}

Network mobilenet_from_widths(std::span<const int> widths, ActivationDims input,
                              std::uint64_t seed, int num_classes) {
  if (widths.empty() || num_classes < 1)
    throw ConfigError("mobilenet_from_widths needs at least one width");
  for (int w : widths)
    if (w < 1) throw ConfigError("widths must be positive");
  NetworkBuilder b(input, seed);
  int extent = std::min(input.h, input.w);
  std::string x = b.conv("conv0", LayerKind::kConvStandard, b.input(), widths[0], 3, 2, 1);
  extent = conv_output_extent(extent, 3, 2, 1);
  x = b.relu("conv0/relu", x);
  for (std::size_t i = 1; i < widths.size(); ++i) {
    const std::string name = "conv" + std::to_string(i);
    const bool down = (i == 2 || i == 4 || i == 6 || i == 12) && extent > 1;
    const int stride = down ? 2 : 1;
    x = b.conv(name + "/dw", LayerKind::kConvDepthwise, x, 0, 3, stride, 1, false);
    extent = conv_output_extent(extent, 3, stride, 1);
    x = b.relu(name + "/dw/relu", x);
    x = b.conv(name, LayerKind::kConvPointwise, x, widths[i]);
    x = b.relu(name + "/relu", x);
  }
  x = b.global_pool("pool", x);
  x = b.conv("classifier", LayerKind::kConvPointwise, x, num_classes);
  return std::move(b).finish("output", x);
}

}  // namespace cprune::nnir
