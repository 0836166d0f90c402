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

#include "cprune/ranking.hpp"

#include <algorithm>
#include <iomanip>
#include <numeric>

#include "cprune/error.hpp"

namespace cprune::ranking {

namespace {

const nnir::Tensor4& conv_weights(const nnir::Node& layer) {
  if (!layer.is_conv() || !layer.weights)
    throw PruneError(PruneError::Kind::kNotConv, "layer '" + layer.id + "' is not a conv layer");
  return *layer.weights;
}

double mean_square(std::span<const float> values) {
  double acc = 0.0;
  for (float w : values) acc += static_cast<double>(w) * w;
  return values.empty() ? 0.0 : acc / static_cast<double>(values.size());
}

}  // namespace

MwScore mw_score(const nnir::Node& layer, std::size_t index) {
  const auto& w = conv_weights(layer);
  if (index >= static_cast<std::size_t>(w.dims.c_out)) {
    throw PruneError(PruneError::Kind::kIndexOutOfRange,
                     "filter " + std::to_string(index) + " out of range for '" + layer.id + "'");
  }
  return {{layer.id, index}, mean_square(w.filter(index))};
}

std::vector<double> layer_scores(const nnir::Node& layer) {
  const auto& w = conv_weights(layer);
  std::vector<double> out(static_cast<std::size_t>(w.dims.c_out));
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = mean_square(w.filter(k));
  return out;
}

std::vector<FilterId> rank_by_scores(const std::string& layer, std::span<const double> scores) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  std::vector<FilterId> out;
  out.reserve(order.size());
  for (std::size_t k : order) out.push_back({layer, k});
  return out;
}

std::vector<FilterId> rank_layer(const nnir::Network& network, std::string_view layer) {
  const auto& node = network.node(layer);
  return rank_by_scores(node.id, layer_scores(node));
}

std::vector<FilterCluster> form_clusters(std::span<const FilterId> ranked,
                                         std::span<const double> scores,
                                         std::size_t cluster_size,
                                         std::size_t layer_position) {
  if (cluster_size < 1) throw ConfigError("cluster size must be at least 1");
  std::vector<FilterCluster> out;
  for (std::size_t i = 0; i + cluster_size <= ranked.size(); i += cluster_size) {
    FilterCluster c;
    c.layer = ranked[i].layer;
    c.layer_position = layer_position;
    double sum = 0.0;
    for (std::size_t j = 0; j < cluster_size; ++j) {
      const FilterId& f = ranked[i + j];
      if (f.layer != c.layer) throw ConfigError("cluster members must share one layer");
      c.members.push_back(f);
      sum += scores[f.index];
    }
    c.avg_score = sum / static_cast<double>(cluster_size);
    out.push_back(std::move(c));
  }
  return out;
}

std::vector<FilterCluster> rank_clusters(std::vector<FilterCluster> clusters) {
  std::stable_sort(clusters.begin(), clusters.end(),
                   [](const FilterCluster& a, const FilterCluster& b) {
                     if (a.avg_score != b.avg_score) return a.avg_score < b.avg_score;
                     if (a.layer_position != b.layer_position)
                       return a.layer_position < b.layer_position;
                     if (a.layer != b.layer) return a.layer < b.layer;
                     const std::size_t fa = a.members.empty() ? 0 : a.members.front().index;
                     const std::size_t fb = b.members.empty() ? 0 : b.members.front().index;
                     return fa < fb;
                   });
  return clusters;
}

void write_ranking_csv(std::ostream& os, const nnir::Network& network,
                       std::span<const std::string> layers) {
  os << "layer_id,filter_index,score,rank\n" << std::setprecision(17);
  for (const auto& id : layers) {
    const auto scores = layer_scores(network.node(id));
    const auto ranked = rank_by_scores(id, scores);
    for (std::size_t r = 0; r < ranked.size(); ++r)
      os << id << ',' << ranked[r].index << ',' << scores[ranked[r].index] << ',' << r << '\n';
  }
}

}  // namespace cprune::ranking
