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

// Network intermediate representation: typed layers in a DAG with
// shape-checked weight tensors. Batch size is implicitly one and batch norm
// is assumed folded into conv weights, so there is no BN node.

#ifndef CPRUNE_NNIR_HPP_
#define CPRUNE_NNIR_HPP_

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace cprune::nnir {

enum class LayerKind {
  kInput,
  kOutput,
  kConvStandard,
  kConvDepthwise,
  kConvPointwise,
  kRelu,
  kPoolMax,
  kPoolAvg,
  kConcat,
};

std::string_view to_string(LayerKind kind);
// Throws ConfigError for an unknown name.
LayerKind layer_kind_from_string(std::string_view name);

constexpr bool is_conv(LayerKind kind) {
  return kind == LayerKind::kConvStandard || kind == LayerKind::kConvDepthwise ||
         kind == LayerKind::kConvPointwise;
}

// Layers whose output channel i depends only on input channel i.
constexpr bool is_channel_preserving(LayerKind kind) {
  return kind == LayerKind::kRelu || kind == LayerKind::kPoolMax ||
         kind == LayerKind::kPoolAvg || kind == LayerKind::kOutput;
}

struct ActivationDims {
  int c = 1;
  int h = 1;
  int w = 1;

  std::size_t count() const {
    return static_cast<std::size_t>(c) * static_cast<std::size_t>(h) *
           static_cast<std::size_t>(w);
  }
  bool operator==(const ActivationDims&) const = default;
};

// Weight layout (c_out, c_in, kh, kw), row-major. Depthwise layers carry
// c_in = 1: one kernel per filter.
struct WeightDims {
  int c_out = 0;
  int c_in = 0;
  int kh = 0;
  int kw = 0;

  std::size_t count() const {
    return static_cast<std::size_t>(c_out) * filter_size();
  }
  std::size_t filter_size() const {
    return static_cast<std::size_t>(c_in) * static_cast<std::size_t>(kh) *
           static_cast<std::size_t>(kw);
  }
  bool operator==(const WeightDims&) const = default;
};

struct Tensor4 {
  WeightDims dims;
  std::vector<float> values;

  std::span<const float> filter(std::size_t o) const {
    const std::size_t n = dims.filter_size();
    return std::span<const float>(values).subspan(o * n, n);
  }
  bool operator==(const Tensor4&) const = default;
};

struct LayerSpec {
  LayerKind kind = LayerKind::kRelu;
  // Kernel extent for convs and pools; ignored by other kinds.
  int kernel_h = 1;
  int kernel_w = 1;
  int stride = 1;
  int padding = 0;  // per side
  bool has_bias = false;
  // Pools only: reduce the whole spatial extent to 1x1.
  bool global_pool = false;

  bool operator==(const LayerSpec&) const = default;
};

struct Node {
  std::string id;
  LayerSpec spec;
  std::optional<Tensor4> weights;  // conv only
  std::vector<float> bias;         // conv with has_bias only
  std::vector<std::string> predecessors;

  bool is_conv() const { return nnir::is_conv(spec.kind); }
  // Number of filters; 0 for non-conv nodes.
  int c_out() const { return weights ? weights->dims.c_out : 0; }
  bool operator==(const Node&) const = default;
};

struct Network {
  std::vector<Node> nodes;
  ActivationDims input_dims;
  std::string entry;
  std::string exit;

  // Throws ShapeError when the id is unknown.
  const Node& node(std::string_view id) const;
  Node& node(std::string_view id);
  std::optional<std::size_t> index_of(std::string_view id) const;
  // Nodes listing `id` as a predecessor, in node order.
  std::vector<std::string> consumers(std::string_view id) const;

  bool operator==(const Network&) const = default;
};

enum class ViolationKind {
  kDuplicateId,
  kDanglingPredecessor,
  kCycle,
  kArity,
  kEntryExit,
  kWeightLayout,
  kBiasLength,
  kShapeMismatch,
  kNonPositiveDim,
  kNonFinite,
};

std::string_view to_string(ViolationKind kind);

struct Violation {
  ViolationKind kind;
  std::vector<std::string> nodes;
  std::string message;
};

// Every invariant breach found; empty iff the network is well formed.
std::vector<Violation> validate(const Network& network);

// Kahn order over node positions. Throws ShapeError when a cycle or a
// dangling predecessor prevents ordering.
std::vector<std::size_t> topological_order(const Network& network);

using ShapeMap = std::map<std::string, ActivationDims>;

// Output activation dims of every node. Throws ShapeError naming the first
// offending node.
ShapeMap infer_shapes(const Network& network);

// floor((in + 2 * pad - k) / stride) + 1, or a non-positive value when the
// window does not fit.
int conv_output_extent(int in, int kernel, int stride, int pad);

// Position of each conv node in topological order, used for deterministic
// tie-breaking across layers.
std::map<std::string, std::size_t> conv_positions(const Network& network);

}  // namespace cprune::nnir

#endif  // CPRUNE_NNIR_HPP_
