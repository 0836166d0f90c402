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

// Minimum-weight filter importance and cluster formation.
//
// The score of filter k in a layer is the mean squared kernel weight over
// all of its kernels and kernel positions; bias terms are excluded. Using the
// mean (not the sum) keeps layers with different kernel sizes and fan-in
// comparable, which the global cluster ranking requires.

#ifndef CPRUNE_RANKING_HPP_
#define CPRUNE_RANKING_HPP_

#include <compare>
#include <cstddef>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cprune/nnir.hpp"

namespace cprune::ranking {

struct FilterId {
  std::string layer;
  std::size_t index = 0;

  auto operator<=>(const FilterId&) const = default;
};

struct MwScore {
  FilterId filter;
  double value = 0.0;
};

// A group of same-layer filters pruned atomically. `layer_position` is the
// layer's position among conv nodes in topological order and breaks ties
// between layers.
struct FilterCluster {
  std::string layer;
  std::size_t layer_position = 0;
  std::vector<FilterId> members;
  double avg_score = 0.0;

  std::size_t size() const { return members.size(); }
};

// Throws PruneError(kIndexOutOfRange / kNotConv).
MwScore mw_score(const nnir::Node& layer, std::size_t index);

// Scores of every filter of a conv node, indexed by filter position.
std::vector<double> layer_scores(const nnir::Node& layer);

// Ascending by score, ties by ascending filter index.
std::vector<FilterId> rank_by_scores(const std::string& layer, std::span<const double> scores);

// Throws PruneError(kNotConv) for non-conv layers.
std::vector<FilterId> rank_layer(const nnir::Network& network, std::string_view layer);

// Consecutive chunks of exactly `cluster_size` filters from the ranked list;
// the trailing remainder forms no cluster. `scores` is indexed by filter
// index. Throws ConfigError when cluster_size < 1.
std::vector<FilterCluster> form_clusters(std::span<const FilterId> ranked,
                                         std::span<const double> scores,
                                         std::size_t cluster_size,
                                         std::size_t layer_position = 0);

// Ascending by avg_score; ties by (layer_position, layer id, first member
// index).
std::vector<FilterCluster> rank_clusters(std::vector<FilterCluster> clusters);

// CSV `layer_id,filter_index,score,rank` over the given layers.
void write_ranking_csv(std::ostream& os, const nnir::Network& network,
                       std::span<const std::string> layers);

}  // namespace cprune::ranking

#endif  // CPRUNE_RANKING_HPP_
