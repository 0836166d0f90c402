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

// Whole-model pruning loops: greedy cluster pruning and the per-filter
// baseline, both stopping on a parameter/latency budget.
//
// Selection always follows ascending minimum-weight order. The hardware
// objective acc_weight * H_acc + speed_weight * H_speed is computed at every
// logged step for reporting and never drives selection.

#ifndef CPRUNE_PLANNER_HPP_
#define CPRUNE_PLANNER_HPP_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "cprune/engine.hpp"
#include "cprune/hwmodel.hpp"
#include "cprune/nnir.hpp"
#include "cprune/pruner.hpp"
#include "cprune/ranking.hpp"

namespace cprune::planner {

using nnir::Network;

struct Budget {
  std::optional<std::uint64_t> max_params;  // B_m
  std::optional<double> max_latency_ms;     // B_t
  std::optional<std::size_t> max_filters_pruned;

  // At least one field set; B_m and B_t positive. Throws ConfigError.
  void check() const;
  // Strict bounds; false when neither B_m nor B_t is given.
  bool satisfied(std::uint64_t params, double latency_ms) const;
};

struct ObjectiveWeights {
  double acc = 1.0;
  double speed = 1.0;

  void check() const;
};

struct ObjectiveReport {
  double h_acc = 0.0;    // adjusted argmax agreement against the reference
  double h_speed = 0.0;  // reference latency / candidate latency
  double objective = 0.0;
  std::uint64_t params = 0;
  double latency_ms = 0.0;
  std::optional<bool> params_ok;   // Cons_m < B_m, when B_m is given
  std::optional<bool> latency_ok;  // Cons_t < B_t, when B_t is given
};

ObjectiveReport evaluate_objective(const Network& candidate, const Network& reference,
                                   const ObjectiveWeights& weights,
                                   const hwmodel::LatencyModel& latency,
                                   const hwmodel::AccuracyResponseModel& accuracy,
                                   const engine::ProbeSet& probes,
                                   const Budget* budget = nullptr);

enum class ScorePolicy {
  kFrozen,  // scores taken once from the input network
  kLive,    // scores recomputed from current weights before every selection
};

std::string_view to_string(ScorePolicy policy);
ScorePolicy score_policy_from_string(std::string_view name);

struct PlannerOptions {
  ScorePolicy policy = ScorePolicy::kFrozen;
  std::size_t min_remaining = 2;
  // filter_prune records a step every this many filters and at termination.
  std::size_t log_every = 8;
  pruner::PrunableOptions layers;
  // Called on the working network after every removal. Empty by default.
  std::function<void(Network&)> fine_tune;
};

struct PlanContext {
  const hwmodel::LatencyModel* latency = nullptr;
  hwmodel::AccuracyResponseModel accuracy;
  const engine::ProbeSet* probes = nullptr;
  ObjectiveWeights weights;
};

struct PruneStep {
  std::size_t step = 0;
  std::string method;
  std::vector<ranking::FilterId> pruned;  // ids in the input network's indexing
  std::size_t filters_pruned_total = 0;
  std::size_t filters_remaining = 0;  // conv filters left in the whole network
  std::uint64_t params = 0;
  std::uint64_t macs = 0;
  double latency_ms = 0.0;
  double fidelity = 0.0;
  double objective = 0.0;
};

enum class StopReason { kBudgetMet, kMaxPruned, kExhausted };

std::string_view to_string(StopReason reason);

struct PruneLog {
  std::string method;
  std::vector<PruneStep> steps;
  StopReason stop_reason = StopReason::kExhausted;
  bool budget_unmet = false;

  // Filters removed per layer, summed over all steps.
  std::map<std::string, std::size_t> pruned_per_layer() const;
};

struct PlanResult {
  Network network;
  PruneLog log;
  std::vector<pruner::PropagationRecord> audit;  // one per removal
};

// Per-layer cluster sizes; must cover every prunable layer.
using ClusterSizes = std::map<std::string, std::size_t>;

ClusterSizes uniform_cluster_sizes(const Network& network, std::size_t size,
                                   const pruner::PrunableOptions& layers = {});

// Ranks filters within each layer, chunks them into clusters of P_l (a
// remainder smaller than P_l is never pruned), ranks clusters across layers
// by average score and removes them in that order until the budget stops
// the loop. Clusters are re-formed after every removal.
PlanResult cluster_prune(const Network& network, const ClusterSizes& sizes,
                         const Budget& budget, const PlanContext& context,
                         const PlannerOptions& options = {});

// One filter at a time in global ascending score order.
PlanResult filter_prune(const Network& network, const Budget& budget,
                        const PlanContext& context, const PlannerOptions& options = {});

// Columns: layer_id,filters_remaining,latency_ms,fidelity,method,step,
// filters_pruned_total. layer_id is "*" since every row describes the whole
// network.
void write_log_csv(std::ostream& os, const PruneLog& log);

// One JSON object per step followed by a summary object.
void write_log_jsonl(std::ostream& os, const PruneLog& log);
// Throws FormatError on a malformed log.
PruneLog read_log_jsonl(std::string_view text);

}  // namespace cprune::planner

#endif  // CPRUNE_PLANNER_HPP_
