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

#include "cprune/nnir.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <set>
#include <sstream>
#include <unordered_map>

#include "cprune/error.hpp"

namespace cprune::nnir {

namespace {

constexpr std::pair<LayerKind, std::string_view> kKindNames[] = {
    {LayerKind::kInput, "input"},
    {LayerKind::kOutput, "output"},
    {LayerKind::kConvStandard, "conv_standard"},
    {LayerKind::kConvDepthwise, "conv_depthwise"},
    {LayerKind::kConvPointwise, "conv_pointwise"},
    {LayerKind::kRelu, "relu"},
    {LayerKind::kPoolMax, "pool_max"},
    {LayerKind::kPoolAvg, "pool_avg"},
    {LayerKind::kConcat, "concat"},
};

std::string dims_str(const ActivationDims& d) {
  std::ostringstream os;
  os << d.c << "x" << d.h << "x" << d.w;
  return os.str();
}

class ShapeWalker {
 public:
  ShapeWalker(const Network& net, std::vector<Violation>& out)
      : net_(net), out_(out) {}

  // Visits nodes in `order`; nodes whose predecessors have no shape are
  // skipped silently (the structural pass already reported why).
  ShapeMap run(const std::vector<std::size_t>& order) {
    ShapeMap shapes;
    for (std::size_t pos : order) {
      const Node& node = net_.nodes[pos];
      std::vector<ActivationDims> in;
      bool ready = true;
      for (const auto& p : node.predecessors) {
        auto it = shapes.find(p);
        if (it == shapes.end()) {
          ready = false;
          break;
        }
        in.push_back(it->second);
      }
      if (!ready) continue;
      if (auto dims = visit(node, in)) shapes[node.id] = *dims;
    }
    return shapes;
  }

 private:
  void report(ViolationKind kind, std::vector<std::string> nodes,
              std::string message) {
    out_.push_back({kind, std::move(nodes), std::move(message)});
  }

  std::optional<ActivationDims> visit(const Node& node,
                                      const std::vector<ActivationDims>& in) {
    const LayerSpec& spec = node.spec;
    if (!node.is_conv() && (node.weights || !node.bias.empty())) {
      report(ViolationKind::kWeightLayout, {node.id},
             "node '" + node.id + "' of kind " + std::string(to_string(spec.kind)) +
                 " must not carry weights or bias");
    }
    switch (spec.kind) {
      case LayerKind::kInput: {
        const ActivationDims& d = net_.input_dims;
        if (d.c < 1 || d.h < 1 || d.w < 1) {
          report(ViolationKind::kNonPositiveDim, {node.id},
                 "input dims " + dims_str(d) + " must be positive");
          return std::nullopt;
        }
        return d;
      }
      case LayerKind::kOutput:
      case LayerKind::kRelu:
        if (in.empty()) return std::nullopt;
        return in.front();
      case LayerKind::kPoolMax:
      case LayerKind::kPoolAvg: {
        if (in.empty()) return std::nullopt;
        if (spec.global_pool) return ActivationDims{in.front().c, 1, 1};
        return spatial(node, in.front(), in.front().c);
      }
      case LayerKind::kConcat: {
        if (in.empty()) return std::nullopt;
        ActivationDims out = in.front();
        out.c = 0;
        for (std::size_t i = 0; i < in.size(); ++i) {
          if (in[i].h != in.front().h || in[i].w != in.front().w) {
            report(ViolationKind::kShapeMismatch,
                   {node.id, node.predecessors[i], node.predecessors.front()},
                   "concat '" + node.id + "' input '" + node.predecessors[i] +
                       "' spatial dims " + dims_str(in[i]) + " differ from '" +
                       node.predecessors.front() + "' " + dims_str(in.front()));
          }
          out.c += in[i].c;
        }
        return out;
      }
      case LayerKind::kConvStandard:
      case LayerKind::kConvPointwise:
      case LayerKind::kConvDepthwise:
        if (in.empty()) return std::nullopt;
        return conv(node, in.front());
    }
    return std::nullopt;
  }

  std::optional<ActivationDims> spatial(const Node& node, const ActivationDims& in,
                                        int channels) {
    const LayerSpec& spec = node.spec;
    if (spec.stride < 1 || spec.padding < 0 || spec.kernel_h < 1 || spec.kernel_w < 1) {
      report(ViolationKind::kNonPositiveDim, {node.id},
             "node '" + node.id + "' has invalid kernel/stride/padding");
      return std::nullopt;
    }
    const int h = conv_output_extent(in.h, spec.kernel_h, spec.stride, spec.padding);
    const int w = conv_output_extent(in.w, spec.kernel_w, spec.stride, spec.padding);
    if (h < 1 || w < 1) {
      report(ViolationKind::kNonPositiveDim, {node.id},
             "node '" + node.id + "' computes non-positive output extent from input " +
                 dims_str(in));
      return std::nullopt;
    }
    return ActivationDims{channels, h, w};
  }

  std::optional<ActivationDims> conv(const Node& node, const ActivationDims& in) {
    const LayerSpec& spec = node.spec;
    const std::string& pred = node.predecessors.front();
    if (!node.weights) {
      report(ViolationKind::kWeightLayout, {node.id},
             "conv '" + node.id + "' has no weight tensor");
      return std::nullopt;
    }
    const WeightDims& wd = node.weights->dims;
    if (wd.c_out < 1 || wd.c_in < 1 || wd.kh < 1 || wd.kw < 1) {
      report(ViolationKind::kNonPositiveDim, {node.id},
             "conv '" + node.id + "' has non-positive weight dims");
      return std::nullopt;
    }
    if (node.weights->values.size() != wd.count()) {
      report(ViolationKind::kWeightLayout, {node.id},
             "conv '" + node.id + "' holds " +
                 std::to_string(node.weights->values.size()) + " weights, dims imply " +
                 std::to_string(wd.count()));
    } else if (!std::all_of(node.weights->values.begin(), node.weights->values.end(),
                            [](float v) { return std::isfinite(v); })) {
      report(ViolationKind::kNonFinite, {node.id},
             "conv '" + node.id + "' has non-finite weights");
    }
    if (wd.kh != spec.kernel_h || wd.kw != spec.kernel_w) {
      report(ViolationKind::kWeightLayout, {node.id},
             "conv '" + node.id + "' weight kernel does not match its layer spec");
    }
    if (spec.kind == LayerKind::kConvPointwise && (wd.kh != 1 || wd.kw != 1)) {
      report(ViolationKind::kWeightLayout, {node.id},
             "pointwise conv '" + node.id + "' must use a 1x1 kernel");
    }
    if (spec.kind == LayerKind::kConvDepthwise) {
      if (wd.c_in != 1) {
        report(ViolationKind::kWeightLayout, {node.id},
               "depthwise conv '" + node.id + "' must hold one kernel per filter");
      }
      if (wd.c_out != in.c) {
        report(ViolationKind::kShapeMismatch, {node.id, pred},
               "depthwise conv '" + node.id + "' has " + std::to_string(wd.c_out) +
                   " channels but '" + pred + "' emits " + std::to_string(in.c));
      }
    } else if (wd.c_in != in.c) {
      report(ViolationKind::kShapeMismatch, {node.id, pred},
             "conv '" + node.id + "' expects " + std::to_string(wd.c_in) +
                 " input channels but '" + pred + "' emits " + std::to_string(in.c));
    }
    const std::size_t want_bias = spec.has_bias ? static_cast<std::size_t>(wd.c_out) : 0;
    if (node.bias.size() != want_bias) {
      report(ViolationKind::kBiasLength, {node.id},
             "conv '" + node.id + "' bias length " + std::to_string(node.bias.size()) +
                 " != " + std::to_string(want_bias));
    } else if (!std::all_of(node.bias.begin(), node.bias.end(),
                            [](float v) { return std::isfinite(v); })) {
      report(ViolationKind::kNonFinite, {node.id}, "conv '" + node.id + "' has non-finite bias");
    }
    // Downstream nodes are still checked against the declared filter count.
    return spatial(node, in, wd.c_out);
  }

  const Network& net_;
  std::vector<Violation>& out_;
};

std::size_t expected_arity_min(LayerKind kind) {
  switch (kind) {
    case LayerKind::kInput:
      return 0;
    case LayerKind::kConcat:
      return 2;
    default:
      return 1;
  }
}

// Kahn's algorithm over nodes whose predecessors all resolve. Returns the
// order and the ids left unordered (part of a cycle or downstream of one).
std::pair<std::vector<std::size_t>, std::vector<std::string>> kahn(const Network& net) {
  std::unordered_map<std::string, std::size_t> pos;
  for (std::size_t i = 0; i < net.nodes.size(); ++i) pos.emplace(net.nodes[i].id, i);
  std::vector<std::size_t> indegree(net.nodes.size(), 0);
  std::vector<std::vector<std::size_t>> out(net.nodes.size());
  std::vector<bool> dangling(net.nodes.size(), false);
  for (std::size_t i = 0; i < net.nodes.size(); ++i) {
    for (const auto& p : net.nodes[i].predecessors) {
      auto it = pos.find(p);
      if (it == pos.end()) {
        dangling[i] = true;
        continue;
      }
      out[it->second].push_back(i);
      ++indegree[i];
    }
  }
  std::deque<std::size_t> ready;
  for (std::size_t i = 0; i < net.nodes.size(); ++i)
    if (indegree[i] == 0 && !dangling[i]) ready.push_back(i);
  std::vector<std::size_t> order;
  std::vector<bool> done(net.nodes.size(), false);
  while (!ready.empty()) {
    const std::size_t n = ready.front();
    ready.pop_front();
    order.push_back(n);
    done[n] = true;
    for (std::size_t m : out[n])
      if (--indegree[m] == 0 && !dangling[m]) ready.push_back(m);
  }
  std::vector<std::string> left;
  for (std::size_t i = 0; i < net.nodes.size(); ++i)
    if (!done[i] && !dangling[i]) left.push_back(net.nodes[i].id);
  return {order, left};
}

}  // namespace

std::string_view to_string(LayerKind kind) {
  for (const auto& [k, name] : kKindNames)
    if (k == kind) return name;
  return "unknown";
}

LayerKind layer_kind_from_string(std::string_view name) {
  for (const auto& [k, n] : kKindNames)
    if (n == name) return k;
  throw ConfigError("unknown layer kind '" + std::string(name) + "'");
}

std::string_view to_string(ViolationKind kind) {
  switch (kind) {
    case ViolationKind::kDuplicateId: return "duplicate_id";
    case ViolationKind::kDanglingPredecessor: return "dangling_predecessor";
    case ViolationKind::kCycle: return "cycle";
    case ViolationKind::kArity: return "arity";
    case ViolationKind::kEntryExit: return "entry_exit";
    case ViolationKind::kWeightLayout: return "weight_layout";
    case ViolationKind::kBiasLength: return "bias_length";
    case ViolationKind::kShapeMismatch: return "shape_mismatch";
    case ViolationKind::kNonPositiveDim: return "non_positive_dim";
    case ViolationKind::kNonFinite: return "non_finite";
  }
  return "unknown";
}

const Node& Network::node(std::string_view id) const {
  if (auto i = index_of(id)) return nodes[*i];
  throw ShapeError("unknown node '" + std::string(id) + "'");
}

Node& Network::node(std::string_view id) {
  if (auto i = index_of(id)) return nodes[*i];
  throw ShapeError("unknown node '" + std::string(id) + "'");
}

std::optional<std::size_t> Network::index_of(std::string_view id) const {
  for (std::size_t i = 0; i < nodes.size(); ++i)
    if (nodes[i].id == id) return i;
  return std::nullopt;
}

std::vector<std::string> Network::consumers(std::string_view id) const {
  std::vector<std::string> out;
  for (const auto& n : nodes)
    if (std::find(n.predecessors.begin(), n.predecessors.end(), id) != n.predecessors.end())
      out.push_back(n.id);
  return out;
}

int conv_output_extent(int in, int kernel, int stride, int pad) {
  const int span = in + 2 * pad - kernel;
  if (span < 0 || stride < 1) return 0;
  return span / stride + 1;
}

std::vector<Violation> validate(const Network& network) {
  std::vector<Violation> out;
  std::set<std::string> seen;
  int inputs = 0;
  int outputs = 0;
  for (const auto& n : network.nodes) {
    if (!seen.insert(n.id).second)
      out.push_back({ViolationKind::kDuplicateId, {n.id}, "duplicate node id '" + n.id + "'"});
    if (n.spec.kind == LayerKind::kInput) ++inputs;
    if (n.spec.kind == LayerKind::kOutput) ++outputs;
  }
  for (const auto& n : network.nodes) {
    for (const auto& p : n.predecessors) {
      if (!seen.contains(p))
        out.push_back({ViolationKind::kDanglingPredecessor, {n.id, p},
                       "node '" + n.id + "' lists unknown predecessor '" + p + "'"});
    }
    const std::size_t k = n.predecessors.size();
    const std::size_t lo = expected_arity_min(n.spec.kind);
    const bool multi = n.spec.kind == LayerKind::kConcat;
    if (k < lo || (!multi && k > lo)) {
      out.push_back({ViolationKind::kArity, {n.id},
                     "node '" + n.id + "' of kind " + std::string(to_string(n.spec.kind)) +
                         " has " + std::to_string(k) + " predecessors"});
    }
  }
  if (inputs != 1 || outputs != 1) {
    out.push_back({ViolationKind::kEntryExit, {},
                   "network needs exactly one input and one output node (found " +
                       std::to_string(inputs) + " and " + std::to_string(outputs) + ")"});
  }
  auto kind_of = [&](const std::string& id) -> std::optional<LayerKind> {
    if (auto i = network.index_of(id)) return network.nodes[*i].spec.kind;
    return std::nullopt;
  };
  if (kind_of(network.entry) != LayerKind::kInput)
    out.push_back({ViolationKind::kEntryExit, {network.entry},
                   "entry '" + network.entry + "' is not an input node"});
  if (kind_of(network.exit) != LayerKind::kOutput)
    out.push_back({ViolationKind::kEntryExit, {network.exit},
                   "exit '" + network.exit + "' is not an output node"});

  auto [order, cyclic] = kahn(network);
  if (!cyclic.empty())
    out.push_back({ViolationKind::kCycle, cyclic, "graph contains a cycle"});
  ShapeWalker(network, out).run(order);
  return out;
}

std::vector<std::size_t> topological_order(const Network& network) {
  auto [order, left] = kahn(network);
  if (!left.empty()) throw ShapeError("graph contains a cycle through '" + left.front() + "'");
  if (order.size() != network.nodes.size())
    throw ShapeError("graph has dangling predecessors");
  return order;
}

ShapeMap infer_shapes(const Network& network) {
  std::vector<Violation> violations;
  ShapeMap shapes = ShapeWalker(network, violations).run(topological_order(network));
  if (!violations.empty()) throw ShapeError(violations.front().message);
  return shapes;
}

std::map<std::string, std::size_t> conv_positions(const Network& network) {
  std::map<std::string, std::size_t> out;
  std::size_t next = 0;
  for (std::size_t pos : topological_order(network)) {
    const Node& n = network.nodes[pos];
    if (n.is_conv()) out[n.id] = next++;
  }
  return out;
}

}  // namespace cprune::nnir
