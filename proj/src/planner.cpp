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

#include "cprune/planner.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>
#include <utility>

#include "cprune/error.hpp"
#include "nlohmann/json.hpp"

namespace cprune::planner {
namespace {

using ranking::FilterCluster;
using ranking::FilterId;

constexpr std::string_view kFilterMethod = "filter";
constexpr std::string_view kClusterMethod = "cluster";

void check_context(const PlanContext& context) {
  if (context.latency == nullptr) throw ConfigError("plan context has no latency model");
  if (context.probes == nullptr) throw ConfigError("plan context has no probe set");
  context.accuracy.check();
  context.weights.check();
}

// Reference outputs and latency computed once per run.
class Evaluator {
 public:
  Evaluator(const Network& reference, const PlanContext& context)
      : context_(context),
        reference_out_(engine::forward_all(reference, *context.probes)),
        reference_latency_(hwmodel::network_latency(*context.latency, reference).total_ms) {}

  ObjectiveReport evaluate(const Network& candidate, const Budget* budget) const {
    ObjectiveReport r;
    const auto base =
        engine::compare_outputs(reference_out_, engine::forward_all(candidate, *context_.probes));
    r.h_acc = hwmodel::adjusted_fidelity(context_.accuracy, candidate, base).argmax_agreement;
    r.latency_ms = hwmodel::network_latency(*context_.latency, candidate).total_ms;
    r.h_speed = r.latency_ms > 0.0 ? reference_latency_ / r.latency_ms : 0.0;
    r.objective = context_.weights.acc * r.h_acc + context_.weights.speed * r.h_speed;
    r.params = engine::count_params(candidate);
    if (budget != nullptr) {
      if (budget->max_params) r.params_ok = r.params < *budget->max_params;
      if (budget->max_latency_ms) r.latency_ok = r.latency_ms < *budget->max_latency_ms;
    }
    return r;
  }

 private:
  const PlanContext& context_;
  std::vector<engine::Activation> reference_out_;
  double reference_latency_;
};

// Working network plus the bookkeeping that maps current filter positions
// back to the input network.
class PlanState {
 public:
  PlanState(const Network& network, const PlannerOptions& options)
      : network_(network), options_(options) {
    const auto positions = nnir::conv_positions(network);
    for (const auto& id : pruner::prunable_layers(network, options.layers)) {
      const auto& node = network.node(id);
      Layer l;
      l.id = id;
      l.position = positions.at(id);
      l.frozen = ranking::layer_scores(node);
      l.origin.resize(static_cast<std::size_t>(node.c_out()));
      for (std::size_t i = 0; i < l.origin.size(); ++i) l.origin[i] = i;
      layers_.push_back(std::move(l));
    }
  }

  const Network& network() const { return network_; }
  Network take_network() { return std::move(network_); }
  std::vector<pruner::PropagationRecord>& audit() { return audit_; }
  bool empty() const { return layers_.empty(); }

  // Clusters that can be removed without dropping below min_remaining,
  // ranked across layers.
  std::vector<FilterCluster> candidates(const ClusterSizes& sizes) const {
    std::vector<FilterCluster> all;
    for (const auto& l : layers_) {
      const std::size_t p = sizes.at(l.id);
      const std::size_t k = l.origin.size();
      if (k < options_.min_remaining + p) continue;
      const auto scores = current_scores(l);
      const auto ranked = ranking::rank_by_scores(l.id, scores);
      for (auto& c : ranking::form_clusters(ranked, scores, p, l.position)) all.push_back(std::move(c));
    }
    return ranking::rank_clusters(std::move(all));
  }

  // Removes a cluster and returns its members in input-network indexing.
  std::vector<FilterId> apply(const FilterCluster& cluster) {
    auto result =
        pruner::apply_cluster(network_, cluster, {.min_remaining = options_.min_remaining});
    Layer& l = layer(cluster.layer);
    std::vector<std::size_t> removed;
    for (const auto& m : cluster.members) removed.push_back(m.index);
    std::sort(removed.begin(), removed.end());
    std::vector<FilterId> original;
    for (std::size_t idx : removed) original.push_back({l.id, l.origin[idx]});
    for (auto it = removed.rbegin(); it != removed.rend(); ++it)
      l.origin.erase(l.origin.begin() + static_cast<std::ptrdiff_t>(*it));
    network_ = std::move(result.network);
    audit_.push_back(std::move(result.record));
    if (options_.fine_tune) options_.fine_tune(network_);
    return original;
  }

 private:
  struct Layer {
    std::string id;
    std::size_t position = 0;
    std::vector<double> frozen;       // indexed by original filter
    std::vector<std::size_t> origin;  // current index -> original index
  };

  std::vector<double> current_scores(const Layer& l) const {
    if (options_.policy == ScorePolicy::kLive) return ranking::layer_scores(network_.node(l.id));
    std::vector<double> s(l.origin.size());
    for (std::size_t i = 0; i < s.size(); ++i) s[i] = l.frozen[l.origin[i]];
    return s;
  }

  Layer& layer(const std::string& id) {
    for (auto& l : layers_)
      if (l.id == id) return l;
    throw PruneError(PruneError::Kind::kStaleCluster, "layer '" + id + "' is not being planned");
  }

  Network network_;
  const PlannerOptions& options_;
  std::vector<Layer> layers_;
  std::vector<pruner::PropagationRecord> audit_;
};

PlanResult run(std::string_view method, const Network& network, const ClusterSizes& sizes,
               const Budget& budget, const PlanContext& context, const PlannerOptions& options,
               std::size_t log_every) {
  budget.check();
  check_context(context);
  if (log_every < 1) throw ConfigError("log_every must be at least 1");

  PlanState state(network, options);
  const Evaluator evaluator(network, context);
  PruneLog log;
  log.method = std::string(method);

  std::size_t pruned_total = 0;
  std::vector<FilterId> pending;
  auto record = [&]() {
    const Network& net = state.network();
    const auto report = evaluator.evaluate(net, &budget);
    PruneStep s;
    s.step = log.steps.size();
    s.method = log.method;
    s.pruned = std::move(pending);
    pending.clear();
    s.filters_pruned_total = pruned_total;
    s.filters_remaining = hwmodel::total_filters(net);
    s.params = report.params;
    s.macs = engine::count_macs(net).total;
    s.latency_ms = report.latency_ms;
    s.fidelity = report.h_acc;
    s.objective = report.objective;
    log.steps.push_back(std::move(s));
  };

  for (;;) {
    const Network& net = state.network();
    const double lat = hwmodel::network_latency(*context.latency, net).total_ms;
    if (budget.satisfied(engine::count_params(net), lat)) {
      log.stop_reason = StopReason::kBudgetMet;
      break;
    }
    if (budget.max_filters_pruned && pruned_total >= *budget.max_filters_pruned) {
      log.stop_reason = StopReason::kMaxPruned;
      break;
    }
    const auto clusters = state.candidates(sizes);
    if (clusters.empty()) {
      if (pruned_total == 0) {
        throw PruneError(PruneError::Kind::kEmptyCandidates,
                         "no prunable cluster: every layer is at its minimum");
      }
      log.stop_reason = StopReason::kExhausted;
      break;
    }
    const FilterCluster& next = clusters.front();
    if (budget.max_filters_pruned && pruned_total + next.size() > *budget.max_filters_pruned) {
      log.stop_reason = StopReason::kMaxPruned;
      break;
    }
    for (auto& id : state.apply(next)) pending.push_back(std::move(id));
    pruned_total += next.size();
    if (pending.size() >= log_every) record();
  }
  if (!pending.empty()) record();
  log.budget_unmet = log.stop_reason == StopReason::kExhausted;

  PlanResult result;
  result.audit = std::move(state.audit());
  result.network = state.take_network();
  result.log = std::move(log);
  return result;
}

}  // namespace

void Budget::check() const {
  if (!max_params && !max_latency_ms && !max_filters_pruned)
    throw ConfigError("budget needs at least one of max_params, max_latency_ms, max_filters_pruned");
  if (max_params && *max_params == 0) throw ConfigError("max_params must be positive");
  if (max_latency_ms && !(*max_latency_ms > 0.0 && std::isfinite(*max_latency_ms)))
    throw ConfigError("max_latency_ms must be positive and finite");
}

bool Budget::satisfied(std::uint64_t params, double latency_ms) const {
  if (!max_params && !max_latency_ms) return false;
  if (max_params && !(params < *max_params)) return false;
  if (max_latency_ms && !(latency_ms < *max_latency_ms)) return false;
  return true;
}

void ObjectiveWeights::check() const {
  if (!(acc >= 0.0) || !(speed >= 0.0) || !std::isfinite(acc) || !std::isfinite(speed))
    throw ConfigError("objective weights must be finite and non-negative");
  if (acc == 0.0 && speed == 0.0) throw ConfigError("objective weights cannot both be zero");
}

ObjectiveReport evaluate_objective(const Network& candidate, const Network& reference,
                                   const ObjectiveWeights& weights,
                                   const hwmodel::LatencyModel& latency,
                                   const hwmodel::AccuracyResponseModel& accuracy,
                                   const engine::ProbeSet& probes, const Budget* budget) {
  if (candidate.input_dims != reference.input_dims)
    throw ShapeError("candidate and reference disagree on input dims");
  const PlanContext context{&latency, accuracy, &probes, weights};
  check_context(context);
  return Evaluator(reference, context).evaluate(candidate, budget);
}

std::string_view to_string(ScorePolicy policy) {
  return policy == ScorePolicy::kLive ? "live" : "frozen";
}

ScorePolicy score_policy_from_string(std::string_view name) {
  if (name == "frozen") return ScorePolicy::kFrozen;
  if (name == "live") return ScorePolicy::kLive;
  throw ConfigError("unknown score policy '" + std::string(name) + "' (frozen, live)");
}

std::string_view to_string(StopReason reason) {
  switch (reason) {
    case StopReason::kBudgetMet: return "budget_met";
    case StopReason::kMaxPruned: return "max_pruned";
    case StopReason::kExhausted: return "exhausted";
  }
  return "exhausted";
}

std::map<std::string, std::size_t> PruneLog::pruned_per_layer() const {
  std::map<std::string, std::size_t> out;
  for (const auto& s : steps)
    for (const auto& f : s.pruned) ++out[f.layer];
  return out;
}

ClusterSizes uniform_cluster_sizes(const Network& network, std::size_t size,
                                   const pruner::PrunableOptions& layers) {
  if (size < 1) throw ConfigError("cluster size must be at least 1");
  ClusterSizes out;
  for (const auto& id : pruner::prunable_layers(network, layers)) out[id] = size;
  return out;
}

PlanResult cluster_prune(const Network& network, const ClusterSizes& sizes,
                         const Budget& budget, const PlanContext& context,
                         const PlannerOptions& options) {
  for (const auto& id : pruner::prunable_layers(network, options.layers)) {
    auto it = sizes.find(id);
    if (it == sizes.end()) throw ConfigError("no cluster size for prunable layer '" + id + "'");
    if (it->second < 1) throw ConfigError("cluster size for '" + id + "' must be at least 1");
  }
  return run(kClusterMethod, network, sizes, budget, context, options, 1);
}

PlanResult filter_prune(const Network& network, const Budget& budget,
                        const PlanContext& context, const PlannerOptions& options) {
  return run(kFilterMethod, network, uniform_cluster_sizes(network, 1, options.layers), budget,
             context, options, options.log_every);
}

void write_log_csv(std::ostream& os, const PruneLog& log) {
  os << "layer_id,filters_remaining,latency_ms,fidelity,method,step,filters_pruned_total\n"
     << std::setprecision(17);
  for (const auto& s : log.steps) {
    os << "*," << s.filters_remaining << ',' << s.latency_ms << ',' << s.fidelity << ','
       << s.method << ',' << s.step << ',' << s.filters_pruned_total << '\n';
  }
}

void write_log_jsonl(std::ostream& os, const PruneLog& log) {
  for (const auto& s : log.steps) {
    nlohmann::json pruned = nlohmann::json::array();
    for (const auto& f : s.pruned) pruned.push_back({{"layer", f.layer}, {"index", f.index}});
    const nlohmann::json j = {{"step", s.step},
                              {"method", s.method},
                              {"pruned", pruned},
                              {"filters_pruned_total", s.filters_pruned_total},
                              {"filters_remaining", s.filters_remaining},
                              {"params", s.params},
                              {"macs", s.macs},
                              {"latency_ms", s.latency_ms},
                              {"fidelity", s.fidelity},
                              {"objective", s.objective}};
    os << j.dump() << '\n';
  }
  const nlohmann::json summary = {{"summary", true},
                                  {"method", log.method},
                                  {"steps", log.steps.size()},
                                  {"stop_reason", to_string(log.stop_reason)},
                                  {"budget_unmet", log.budget_unmet}};
  os << summary.dump() << '\n';
}

namespace {
FormatError bad_log(const std::string& what) {
  return FormatError(FormatError::Kind::kManifest, what);
}
}  // namespace

PruneLog read_log_jsonl(std::string_view text) {
  PruneLog log;
  bool have_summary = false;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  try {
    while (std::getline(in, line)) {
      ++lineno;
      if (line.empty()) continue;
      if (have_summary) throw bad_log("prune log has lines after its summary");
      const auto j = nlohmann::json::parse(line);
      if (j.contains("summary")) {
        log.method = j.at("method").get<std::string>();
        const auto reason = j.at("stop_reason").get<std::string>();
        if (reason == "budget_met") log.stop_reason = StopReason::kBudgetMet;
        else if (reason == "max_pruned") log.stop_reason = StopReason::kMaxPruned;
        else if (reason == "exhausted") log.stop_reason = StopReason::kExhausted;
        else throw bad_log("unknown stop_reason '" + reason + "'");
        log.budget_unmet = j.at("budget_unmet").get<bool>();
        if (j.at("steps").get<std::size_t>() != log.steps.size())
          throw bad_log("prune log summary step count disagrees with its lines");
        have_summary = true;
        continue;
      }
      PruneStep s;
      s.step = j.at("step").get<std::size_t>();
      if (s.step != log.steps.size()) throw bad_log("prune log steps are not contiguous");
      s.method = j.at("method").get<std::string>();
      for (const auto& f : j.at("pruned"))
        s.pruned.push_back({f.at("layer").get<std::string>(), f.at("index").get<std::size_t>()});
      s.filters_pruned_total = j.at("filters_pruned_total").get<std::size_t>();
      s.filters_remaining = j.at("filters_remaining").get<std::size_t>();
      s.params = j.at("params").get<std::uint64_t>();
      s.macs = j.at("macs").get<std::uint64_t>();
      s.latency_ms = j.at("latency_ms").get<double>();
      s.fidelity = j.at("fidelity").get<double>();
      s.objective = j.at("objective").get<double>();
      log.steps.push_back(std::move(s));
    }
  } catch (const nlohmann::json::exception& e) {
    throw bad_log("prune log line " + std::to_string(lineno) + ": " + e.what());
  }
  if (!have_summary) throw bad_log("prune log has no summary line");
  return log;
}

}  // namespace cprune::planner
