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

#include "cprune/pruner.hpp"

#include <algorithm>
#include <set>

#include "cprune/error.hpp"
#include "json.hpp"

namespace cprune::pruner {

namespace {

using nnir::LayerKind;
using nnir::Node;
using nnir::Tensor4;
using Kind = PruneError::Kind;

void erase_output_filters(Tensor4& t, std::vector<float>& bias,
                          const std::vector<std::size_t>& removed) {
  const std::size_t fs = t.dims.filter_size();
  std::vector<float> kept;
  kept.reserve(t.values.size() - removed.size() * fs);
  std::vector<float> kept_bias;
  auto r = removed.begin();
  for (std::size_t o = 0; o < static_cast<std::size_t>(t.dims.c_out); ++o) {
    if (r != removed.end() && *r == o) {
      ++r;
      continue;
    }
    kept.insert(kept.end(), t.values.begin() + static_cast<std::ptrdiff_t>(o * fs),
                t.values.begin() + static_cast<std::ptrdiff_t>((o + 1) * fs));
    if (!bias.empty()) kept_bias.push_back(bias[o]);
  }
  t.values = std::move(kept);
  t.dims.c_out -= static_cast<int>(removed.size());
  if (!bias.empty()) bias = std::move(kept_bias);
}

void erase_input_channels(Tensor4& t, const std::vector<std::size_t>& removed) {
  const std::size_t plane = static_cast<std::size_t>(t.dims.kh) * t.dims.kw;
  std::vector<bool> drop(static_cast<std::size_t>(t.dims.c_in), false);
  for (std::size_t i : removed) drop[i] = true;
  std::vector<float> kept;
  kept.reserve(t.values.size() - removed.size() * plane * t.dims.c_out);
  for (std::size_t o = 0; o < static_cast<std::size_t>(t.dims.c_out); ++o) {
    for (std::size_t i = 0; i < drop.size(); ++i) {
      if (drop[i]) continue;
      const auto at = t.values.begin() +
                      static_cast<std::ptrdiff_t>((o * drop.size() + i) * plane);
      kept.insert(kept.end(), at, at + static_cast<std::ptrdiff_t>(plane));
    }
  }
  t.values = std::move(kept);
  t.dims.c_in -= static_cast<int>(removed.size());
}

class Propagator {
 public:
  Propagator(const Network& before, Network& after, PropagationRecord& record)
      : before_(before), after_(after), record_(record), shapes_(nnir::infer_shapes(before)) {}

  void from(const std::string& source, const std::vector<std::size_t>& channels) {
    for (const auto& consumer_id : before_.consumers(source)) {
      const Node& consumer = before_.node(consumer_id);
      switch (consumer.spec.kind) {
        case LayerKind::kRelu:
        case LayerKind::kPoolMax:
        case LayerKind::kPoolAvg:
        case LayerKind::kOutput:
          from(consumer_id, channels);
          break;
        case LayerKind::kConcat: {
          const auto& preds = consumer.predecessors;
          if (std::count(preds.begin(), preds.end(), source) != 1) {
            throw PruneError(Kind::kUnsupportedConsumer,
                             "concat '" + consumer_id + "' lists '" + source + "' more than once");
          }
          std::size_t offset = 0;
          for (const auto& p : preds) {
            if (p == source) break;
            offset += static_cast<std::size_t>(shapes_.at(p).c);
          }
          std::vector<std::size_t> shifted(channels);
          for (auto& c : shifted) c += offset;
          from(consumer_id, shifted);
          break;
        }
        case LayerKind::kConvStandard:
        case LayerKind::kConvPointwise:
          claim(consumer_id);
          erase_input_channels(*after_.node(consumer_id).weights, channels);
          record_.touched.push_back({consumer_id, Axis::kInputChannels, channels});
          break;
        case LayerKind::kConvDepthwise: {
          claim(consumer_id);
          Node& dw = after_.node(consumer_id);
          erase_output_filters(*dw.weights, dw.bias, channels);
          record_.touched.push_back({consumer_id, Axis::kDepthwiseChannels, channels});
          from(consumer_id, channels);
          break;
        }
        case LayerKind::kInput:
          throw PruneError(Kind::kUnsupportedConsumer,
                           "input node '" + consumer_id + "' cannot consume channels");
      }
    }
  }

 private:
  void claim(const std::string& id) {
    if (!claimed_.insert(id).second) {
      throw PruneError(Kind::kUnsupportedConsumer,
                       "conv '" + id + "' is reached twice by one removal");
    }
  }

  const Network& before_;
  Network& after_;
  PropagationRecord& record_;
  nnir::ShapeMap shapes_;
  std::set<std::string> claimed_;
};

const Node& target_layer(const Network& network, const std::string& layer) {
  auto idx = network.index_of(layer);
  if (!idx) throw PruneError(Kind::kNotConv, "unknown layer '" + layer + "'");
  const Node& node = network.nodes[*idx];
  if (!node.is_conv()) throw PruneError(Kind::kNotConv, "layer '" + layer + "' is not a conv");
  if (node.spec.kind == LayerKind::kConvDepthwise) {
    throw PruneError(Kind::kInvalidRequest,
                     "depthwise layer '" + layer + "' is pruned through its producer");
  }
  return node;
}

}  // namespace

std::string_view to_string(Axis axis) {
  switch (axis) {
    case Axis::kOutputFilters: return "output_filters";
    case Axis::kInputChannels: return "input_channels";
    case Axis::kDepthwiseChannels: return "depthwise_channels";
  }
  return "unknown";
}

PruneResult remove_filters(const Network& network, const PruneRequest& request,
                           const PruneOptions& options) {
  const Node& node = target_layer(network, request.layer);
  const auto c_out = static_cast<std::size_t>(node.c_out());
  const auto& idx = request.indices;
  if (idx.empty()) throw PruneError(Kind::kInvalidRequest, "empty prune request");
  for (std::size_t i = 0; i < idx.size(); ++i) {
    if (idx[i] >= c_out) {
      throw PruneError(Kind::kIndexOutOfRange, "filter " + std::to_string(idx[i]) +
                                                   " out of range for '" + request.layer +
                                                   "' with " + std::to_string(c_out) + " filters");
    }
    if (i > 0 && idx[i] <= idx[i - 1])
      throw PruneError(Kind::kInvalidRequest, "prune indices must be strictly ascending");
  }
  if (idx.size() >= c_out || c_out - idx.size() < std::max<std::size_t>(options.min_remaining, 1)) {
    throw PruneError(Kind::kWouldEmptyLayer,
                     "removing " + std::to_string(idx.size()) + " of " + std::to_string(c_out) +
                         " filters from '" + request.layer + "' leaves fewer than " +
                         std::to_string(options.min_remaining));
  }

  PruneResult result{network, {request.layer, {}}};
  Node& target = result.network.node(request.layer);
  erase_output_filters(*target.weights, target.bias, idx);
  result.record.touched.push_back({request.layer, Axis::kOutputFilters, idx});
  Propagator(network, result.network, result.record).from(request.layer, idx);

  if (auto v = nnir::validate(result.network); !v.empty())
    throw Error("internal: pruned network fails validation: " + v.front().message);
  return result;
}

std::vector<std::string> prunable_layers(const Network& network, const PrunableOptions& options) {
  const auto positions = nnir::conv_positions(network);
  std::vector<std::pair<std::size_t, std::string>> convs;
  for (const auto& [id, pos] : positions) convs.emplace_back(pos, id);
  std::sort(convs.begin(), convs.end());
  std::vector<std::string> out;
  for (std::size_t i = 0; i < convs.size(); ++i) {
    const std::string& id = convs[i].second;
    if (network.node(id).spec.kind == LayerKind::kConvDepthwise) continue;
    if (i == 0 && !options.include_first) continue;
    if (i + 1 == convs.size() && !options.include_tail) continue;
    const auto has = [&](const std::vector<std::string>& v) {
      return std::find(v.begin(), v.end(), id) != v.end();
    };
    if (!options.include.empty() && !has(options.include)) continue;
    if (has(options.exclude)) continue;
    out.push_back(id);
  }
  return out;
}

PruneResult apply_cluster(const Network& network, const ranking::FilterCluster& cluster,
                          const PruneOptions& options) {
  auto idx = network.index_of(cluster.layer);
  if (!idx || !network.nodes[*idx].is_conv())
    throw PruneError(Kind::kStaleCluster, "cluster layer '" + cluster.layer +
                                              "' is no longer a conv layer; re-rank");
  const auto c_out = static_cast<std::size_t>(network.nodes[*idx].c_out());
  PruneRequest request{cluster.layer, {}};
  for (const auto& m : cluster.members) {
    if (m.layer != cluster.layer || m.index >= c_out) {
      throw PruneError(Kind::kStaleCluster,
                       "cluster member " + m.layer + "#" + std::to_string(m.index) +
                           " does not exist in the current network; re-rank");
    }
    request.indices.push_back(m.index);
  }
  std::sort(request.indices.begin(), request.indices.end());
  if (std::adjacent_find(request.indices.begin(), request.indices.end()) != request.indices.end())
    throw PruneError(Kind::kStaleCluster, "cluster has duplicate members; re-rank");
  return remove_filters(network, request, options);
}

ranking::FilterCluster rebase_cluster(const ranking::FilterCluster& cluster,
                                      const PropagationRecord& record) {
  ranking::FilterCluster out = cluster;
  for (const auto& t : record.touched) {
    if (t.node != cluster.layer || t.axis != Axis::kOutputFilters) continue;
    for (auto& m : out.members) {
      if (std::binary_search(t.removed.begin(), t.removed.end(), m.index)) {
        throw PruneError(Kind::kStaleCluster, "cluster member " + m.layer + "#" +
                                                  std::to_string(m.index) + " was already removed");
      }
      m.index -= static_cast<std::size_t>(
          std::lower_bound(t.removed.begin(), t.removed.end(), m.index) - t.removed.begin());
    }
  }
  return out;
}

std::uint64_t removed_param_count(const Network& before, const PropagationRecord& record) {
  std::uint64_t total = 0;
  for (const auto& t : record.touched) {
    const Node& n = before.node(t.node);
    const auto& d = n.weights->dims;
    const std::uint64_t k = t.removed.size();
    const std::uint64_t plane = static_cast<std::uint64_t>(d.kh) * d.kw;
    switch (t.axis) {
      case Axis::kOutputFilters:
      case Axis::kDepthwiseChannels:
        total += k * (d.filter_size() + (n.spec.has_bias ? 1 : 0));
        break;
      case Axis::kInputChannels:
        total += k * plane * static_cast<std::uint64_t>(d.c_out);
        break;
    }
  }
  return total;
}

std::string record_to_json_line(const PropagationRecord& record, std::size_t step) {
  nlohmann::json j;
  j["step"] = step;
  j["layer"] = record.layer;
  j["touched"] = nlohmann::json::array();
  for (const auto& t : record.touched)
    j["touched"].push_back({{"node", t.node}, {"axis", to_string(t.axis)}, {"removed", t.removed}});
  return j.dump();
}

PropagationRecord record_from_json_line(std::string_view line, std::size_t* step) {
  PropagationRecord r;
  try {
    const auto j = nlohmann::json::parse(line);
    if (step) *step = j.at("step").get<std::size_t>();
    r.layer = j.at("layer").get<std::string>();
    for (const auto& t : j.at("touched")) {
      TouchedNode tn;
      tn.node = t.at("node").get<std::string>();
      const auto axis = t.at("axis").get<std::string>();
      if (axis == "output_filters") tn.axis = Axis::kOutputFilters;
      else if (axis == "input_channels") tn.axis = Axis::kInputChannels;
      else if (axis == "depthwise_channels") tn.axis = Axis::kDepthwiseChannels;
      else throw FormatError(FormatError::Kind::kManifest, "unknown axis '" + axis + "'");
      tn.removed = t.at("removed").get<std::vector<std::size_t>>();
      r.touched.push_back(std::move(tn));
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(FormatError::Kind::kManifest, std::string("bad audit line: ") + e.what());
  }
  return r;
}

}  // namespace cprune::pruner
