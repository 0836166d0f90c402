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

// Structural filter removal with cross-layer propagation.
//
// Removing filters from a conv layer removes the matching output slices and
// bias entries, then walks every consumer:
//   * relu / pool / output pass channel indices through unchanged;
//   * concat shifts indices by the channel offset of the producing input;
//   * standard and pointwise convs lose the matching input-channel slices;
//   * a depthwise conv loses the filter at each removed channel and the walk
//     continues to its consumers (pointwise -> depthwise -> pointwise
//     coupling in depthwise-separable blocks).

#ifndef CPRUNE_PRUNER_HPP_
#define CPRUNE_PRUNER_HPP_

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "cprune/nnir.hpp"
#include "cprune/ranking.hpp"

namespace cprune::pruner {

using nnir::Network;

enum class Axis { kOutputFilters, kInputChannels, kDepthwiseChannels };

std::string_view to_string(Axis axis);

struct TouchedNode {
  std::string node;
  Axis axis = Axis::kOutputFilters;
  std::vector<std::size_t> removed;  // ascending, in pre-removal indexing

  bool operator==(const TouchedNode&) const = default;
};

struct PropagationRecord {
  std::string layer;  // the layer whose filters were requested
  std::vector<TouchedNode> touched;

  bool operator==(const PropagationRecord&) const = default;
};

struct PruneRequest {
  std::string layer;
  std::vector<std::size_t> indices;  // strictly ascending
};

struct PruneOptions {
  // Filters a pruned layer must keep.
  std::size_t min_remaining = 2;
};

struct PruneResult {
  Network network;
  PropagationRecord record;
};

// Throws PruneError: kNotConv, kInvalidRequest (empty, unsorted or duplicate
// indices, depthwise target), kIndexOutOfRange, kWouldEmptyLayer,
// kUnsupportedConsumer (a conv reached twice by one removal).
PruneResult remove_filters(const Network& network, const PruneRequest& request,
                           const PruneOptions& options = {});

struct PrunableOptions {
  bool include_first = false;  // the first conv in topological order
  bool include_tail = false;   // the last conv (classifier)
  std::vector<std::string> include;  // when non-empty, restrict to these ids
  std::vector<std::string> exclude;
};

// Standard and pointwise conv layers eligible for pruning, in topological
// order. Depthwise layers are only ever pruned through their producer.
std::vector<std::string> prunable_layers(const Network& network,
                                         const PrunableOptions& options = {});

// remove_filters with the cluster's member indices. Throws
// PruneError(kStaleCluster) when the cluster no longer matches the network
// (unknown layer, index past c_out, duplicates); re-rank and retry.
PruneResult apply_cluster(const Network& network, const ranking::FilterCluster& cluster,
                          const PruneOptions& options = {});

// Shifts a cluster's indices to account for a prior removal in the same
// layer. Throws PruneError(kStaleCluster) if a member was removed.
ranking::FilterCluster rebase_cluster(const ranking::FilterCluster& cluster,
                                      const PropagationRecord& record);

// Weight and bias elements removed, computed in closed form from the record
// and the pre-removal network.
std::uint64_t removed_param_count(const Network& before, const PropagationRecord& record);

// One JSON object per line: {"step":n,"layer":..,"touched":[{"node","axis","removed"}]}.
std::string record_to_json_line(const PropagationRecord& record, std::size_t step);
PropagationRecord record_from_json_line(std::string_view line, std::size_t* step = nullptr);

}  // namespace cprune::pruner

#endif  // CPRUNE_PRUNER_HPP_
