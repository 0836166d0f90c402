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

#include "cprune/cli.hpp"

#include <cstdlib>
#include <iomanip>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cprune/engine.hpp"
#include "cprune/error.hpp"
#include "cprune/file_util.hpp"
#include "cprune/hwmodel.hpp"
#include "cprune/model_io.hpp"
#include "cprune/nnir.hpp"
#include "cprune/planner.hpp"
#include "cprune/profiler.hpp"
#include "cprune/pruner.hpp"
#include "cprune/ranking.hpp"
#include "cprune/report.hpp"
#include "cprune/synth.hpp"
#include "nlohmann/json.hpp"

namespace cprune::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

struct BackendFlags {
  std::string backend = "lane";
  int lane_width = 8;
  std::optional<double> c0;
  std::optional<double> c1;
  std::optional<double> c2;
  double jitter = 0.0;
  std::uint64_t latency_seed = 0;
  std::string trace_csv;
  double delta = 0.0;
  std::size_t probes = engine::kDefaultProbeCount;
  std::uint64_t seed = 0;

  void add_to(CLI::App* app) {
    app->add_option("--backend", backend, "Latency backend")
        ->check(CLI::IsMember({"lane", "temporal", "measured"}));
    app->add_option("--lane-width", lane_width, "Lane width L for the lane backend and the "
                                                "accuracy response model");
    app->add_option("--c0", c0, "Per-layer overhead (ms)");
    app->add_option("--c1", c1, "Per-work-unit cost (ms)");
    app->add_option("--c2", c2, "Misalignment penalty (ms per work unit)");
    app->add_option("--jitter", jitter, "Temporal backend relative jitter in [0, 1)");
    app->add_option("--latency-seed", latency_seed, "Temporal backend jitter seed");
    app->add_option("--trace-csv", trace_csv, "Measured latency table for --backend measured");
    app->add_option("--delta", delta, "Fidelity penalty per misaligned conv layer");
    app->add_option("--probes", probes, "Number of fidelity probes");
    app->add_option("--seed", seed, "Probe seed");
  }

  std::unique_ptr<hwmodel::LatencyModel> latency() const {
    if (backend == "lane") {
      hwmodel::LaneAlignedModel::Params p;
      p.lane_width = lane_width;
      if (c0) p.c0 = *c0;
      if (c1) p.c1 = *c1;
      if (c2) p.c2 = *c2;
      return std::make_unique<hwmodel::LaneAlignedModel>(p);
    }
    if (backend == "temporal") {
      hwmodel::TemporalModel::Params p;
      if (c0) p.c0 = *c0;
      if (c1) p.c1 = *c1;
      if (c2) throw ConfigError("--c2 applies to the lane backend only");
      p.jitter = jitter;
      p.seed = latency_seed;
      return std::make_unique<hwmodel::TemporalModel>(p);
    }
    if (trace_csv.empty()) throw ConfigError("--backend measured needs --trace-csv");
    std::istringstream in(read_file(trace_csv));
    return std::make_unique<hwmodel::MeasuredTraceModel>(hwmodel::MeasuredTraceModel::from_csv(in));
  }

  hwmodel::AccuracyResponseModel accuracy() const {
    hwmodel::AccuracyResponseModel a{delta, lane_width};
    a.check();
    return a;
  }

  engine::ProbeSet make_probes(const nnir::Network& net) const {
    if (probes < 1) throw ConfigError("--probes must be at least 1");
    return engine::make_probes(net.input_dims, probes, seed);
  }
};

struct LayerFlags {
  std::string layers;
  std::string exclude;
  bool include_first = false;
  bool include_tail = false;

  void add_to(CLI::App* app) {
    app->add_option("--layers", layers, "Comma-separated conv ids to restrict to");
    app->add_option("--exclude", exclude, "Comma-separated conv ids to skip");
    app->add_flag("--include-first", include_first, "Allow pruning the first conv");
    app->add_flag("--include-tail", include_tail, "Allow pruning the last conv");
  }

  pruner::PrunableOptions options() const {
    return {include_first, include_tail, split_list(layers), split_list(exclude)};
  }
};

// Reads CPRUNE_CONFIG and returns the flags it implies for `sub`, placed
// before the user's own so the command line wins.
std::vector<std::string> config_args(const CLI::App& sub) {
  const char* path = std::getenv("CPRUNE_CONFIG");
  if (path == nullptr || *path == '\0') return {};
  json root;
  try {
    root = json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw ConfigError(std::string("CPRUNE_CONFIG ") + path + ": " + e.what());
  }
  if (!root.is_object()) throw ConfigError(std::string("CPRUNE_CONFIG ") + path + ": not an object");

  std::map<std::string, json> merged;
  for (const auto& [k, v] : root.items())
    if (!v.is_object()) merged[k] = v;
  if (root.contains(sub.get_name())) {
    const auto& section = root.at(sub.get_name());
    for (const auto& [k, v] : section.items()) {
      if (sub.get_option_no_throw("--" + k) == nullptr)
        throw ConfigError(std::string("CPRUNE_CONFIG ") + path + ": '" + sub.get_name() +
                          "' has no option '" + k + "'");
      merged[k] = v;
    }
  }

  std::vector<std::string> args;
  for (const auto& [k, v] : merged) {
    const CLI::Option* opt = sub.get_option_no_throw("--" + k);
    if (opt == nullptr) continue;  // shared keys meant for other subcommands
    auto scalar = [&](const json& x) -> std::string {
      if (x.is_string()) return x.get<std::string>();
      if (x.is_number_integer()) return std::to_string(x.get<long long>());
      if (x.is_number_unsigned()) return std::to_string(x.get<unsigned long long>());
      if (x.is_number_float()) {
        std::ostringstream os;
        os << std::setprecision(17) << x.get<double>();
        return os.str();
      }
      throw ConfigError(std::string("CPRUNE_CONFIG ") + path + ": bad value for '" + k + "'");
    };
    if (opt->get_type_size() == 0) {
      if (!v.is_boolean())
        throw ConfigError(std::string("CPRUNE_CONFIG ") + path + ": '" + k + "' must be a boolean");
      if (v.get<bool>()) args.push_back("--" + k);
    } else if (v.is_array()) {
      for (const auto& item : v) {
        args.push_back("--" + k);
        args.push_back(scalar(item));
      }
    } else {
      args.push_back("--" + k);
      args.push_back(scalar(v));
    }
  }
  return args;
}

void write_text(const fs::path& path, const std::string& text) { write_file_atomic(path, text); }

fs::path prepare_out_dir(const std::string& out) {
  if (out.empty()) throw ConfigError("--out is required");
  fs::path dir(out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output directory '" + out + "': " + ec.message());
  return dir;
}

nnir::Network load(const std::string& path) {
  if (path.empty()) throw ConfigError("--model is required");
  if (!fs::exists(path)) throw ConfigError("model file '" + path + "' does not exist");
  return nnir::load_model(path);
}

// ---- gen ------------------------------------------------------------------

struct GenFlags {
  std::string family = "mobilenet_like";
  int depth = 4;
  int base_channels = 16;
  std::uint64_t seed = 0;
  int input_channels = 3;
  int input_size = 16;
  int num_classes = 16;
  std::string widths;
  std::string out;
};

int cmd_gen(const GenFlags& f, std::ostream& out) {
  if (f.out.empty()) throw ConfigError("--out is required");
  nnir::Network net;
  if (!f.widths.empty()) {
    std::vector<int> w;
    for (const auto& s : split_list(f.widths)) {
      try {
        w.push_back(std::stoi(s));
      } catch (const std::exception&) {
        throw ConfigError("--widths entry '" + s + "' is not an integer");
      }
    }
    net = nnir::mobilenet_from_widths(w, {f.input_channels, f.input_size, f.input_size}, f.seed,
                                      f.num_classes);
  } else {
    net = nnir::synth_model({nnir::family_from_string(f.family), f.depth, f.base_channels, f.seed,
                             f.input_channels, f.input_size, f.num_classes});
  }
  nnir::save_model(net, f.out);
  out << "wrote " << f.out << " (" << net.nodes.size() << " nodes, "
      << engine::count_params(net) << " params)\n";
  return kExitOk;
}

// ---- rank -----------------------------------------------------------------

struct RankFlags {
  std::string model;
  LayerFlags layers;
  std::string out;
};

int cmd_rank(const RankFlags& f, std::ostream& out) {
  const auto net = load(f.model);
  const auto dir = prepare_out_dir(f.out);
  const auto ids = pruner::prunable_layers(net, f.layers.options());
  std::ostringstream csv;
  ranking::write_ranking_csv(csv, net, ids);
  write_text(dir / "ranking.csv", csv.str());
  out << "ranked " << ids.size() << " layers into " << (dir / "ranking.csv").string() << '\n';
  return kExitOk;
}

// ---- profile --------------------------------------------------------------

struct ProfileFlags {
  std::string model;
  BackendFlags backend;
  LayerFlags layers;
  std::size_t min_remaining = 2;
  double theta = 1.0;
  std::string out;
};

int cmd_profile(const ProfileFlags& f, std::ostream& out, std::ostream& err) {
  const auto net = load(f.model);
  const auto dir = prepare_out_dir(f.out);
  const auto lat = f.backend.latency();
  const auto acc = f.backend.accuracy();
  const auto probes = f.backend.make_probes(net);
  const auto ids = pruner::prunable_layers(net, f.layers.options());
  profiler::ProfileOptions opts;
  opts.sweep.min_remaining = f.min_remaining;
  opts.theta = f.theta;
  std::vector<profiler::SweepTrace> traces;
  const auto periods = profiler::profile_all(net, *lat, acc, probes, ids, opts, &traces);

  std::ostringstream csv;
  profiler::write_sweep_csv(csv, traces);
  write_text(dir / "sweeps.csv", csv.str());
  write_text(dir / "periods.json", profiler::periods_to_json(periods));
  for (const auto& id : ids) {
    const auto& e = periods.at(id);
    if (e.skipped) {
      err << "warning: skipped " << id << ": " << e.skip_reason << '\n';
      continue;
    }
    out << id << ": p_lat=" << e.p_lat << " p_acc=" << e.p_acc << " P=" << e.cluster_size << '\n';
  }
  return kExitOk;
}

// ---- prune ----------------------------------------------------------------

struct PruneFlags {
  std::string model;
  BackendFlags backend;
  LayerFlags layers;
  std::string method = "cluster";
  std::string cluster_size = "auto";
  std::string periods;
  double min_confidence = 0.0;
  std::optional<std::size_t> fallback_size;
  double theta = 1.0;
  std::optional<std::uint64_t> budget_params;
  std::optional<double> budget_latency;
  std::optional<std::size_t> max_pruned;
  std::size_t min_remaining = 2;
  std::string policy = "frozen";
  std::size_t log_every = 8;
  double alpha_acc = 1.0;
  double alpha_speed = 1.0;
  std::string out;
};

planner::ClusterSizes resolve_sizes(const PruneFlags& f, const nnir::Network& net,
                                    const hwmodel::LatencyModel& lat,
                                    const hwmodel::AccuracyResponseModel& acc,
                                    const engine::ProbeSet& probes, std::ostream& err) {
  const auto prunable = f.layers.options();
  if (f.cluster_size != "auto") {
    std::size_t used = 0;
    long long n = 0;
    try {
      n = std::stoll(f.cluster_size, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != f.cluster_size.size() || n < 1)
      throw ConfigError("--cluster-size must be 'auto' or a positive integer");
    return planner::uniform_cluster_sizes(net, static_cast<std::size_t>(n), prunable);
  }

  std::map<std::string, profiler::PeriodEstimate> periods;
  const auto ids = pruner::prunable_layers(net, prunable);
  if (!f.periods.empty()) {
    periods = profiler::periods_from_json(read_file(f.periods));
  } else {
    profiler::ProfileOptions opts;
    opts.sweep.min_remaining = f.min_remaining;
    opts.theta = f.theta;
    periods = profiler::profile_all(net, lat, acc, probes, ids, opts);
  }
  planner::ClusterSizes sizes;
  for (const auto& id : ids) {
    auto it = periods.find(id);
    if (it == periods.end())
      throw ConfigError("no period estimate for prunable layer '" + id + "'");
    const auto& e = it->second;
    const bool weak = e.skipped || std::max(e.lat_confidence, e.acc_confidence) < f.min_confidence;
    if (weak && f.fallback_size) {
      err << "note: " << id << " uses fallback cluster size " << *f.fallback_size << '\n';
      sizes[id] = *f.fallback_size;
    } else {
      sizes[id] = e.cluster_size;
    }
  }
  return sizes;
}

int cmd_prune(const PruneFlags& f, std::ostream& out, std::ostream& err) {
  const auto net = load(f.model);
  const auto dir = prepare_out_dir(f.out);
  const auto lat = f.backend.latency();
  const auto acc = f.backend.accuracy();
  const auto probes = f.backend.make_probes(net);
  if (f.fallback_size && *f.fallback_size < 1) throw ConfigError("--fallback-size must be positive");

  planner::Budget budget;
  budget.max_params = f.budget_params;
  budget.max_latency_ms = f.budget_latency;
  budget.max_filters_pruned = f.max_pruned;
  planner::PlannerOptions opts;
  opts.policy = planner::score_policy_from_string(f.policy);
  opts.min_remaining = f.min_remaining;
  opts.log_every = f.log_every;
  opts.layers = f.layers.options();
  const planner::PlanContext ctx{lat.get(), acc, &probes, {f.alpha_acc, f.alpha_speed}};

  planner::PlanResult result;
  if (f.method == "cluster") {
    const auto sizes = resolve_sizes(f, net, *lat, acc, probes, err);
    result = planner::cluster_prune(net, sizes, budget, ctx, opts);
  } else {
    result = planner::filter_prune(net, budget, ctx, opts);
  }

  nnir::save_model(result.network, dir / "pruned.cpm");
  std::ostringstream jsonl;
  planner::write_log_jsonl(jsonl, result.log);
  write_text(dir / "prune_log.jsonl", jsonl.str());
  std::ostringstream csv;
  planner::write_log_csv(csv, result.log);
  write_text(dir / "prune_log.csv", csv.str());
  std::ostringstream audit;
  for (std::size_t i = 0; i < result.audit.size(); ++i)
    audit << pruner::record_to_json_line(result.audit[i], i) << '\n';
  write_text(dir / "propagation.jsonl", audit.str());

  std::size_t pruned = result.log.steps.empty() ? 0 : result.log.steps.back().filters_pruned_total;
  out << f.method << ": pruned " << pruned << " filters in " << result.log.steps.size()
      << " logged steps, stop=" << planner::to_string(result.log.stop_reason) << '\n';
  for (const auto& [layer, n] : result.log.pruned_per_layer()) out << "  " << layer << ": " << n << '\n';
  if (result.log.budget_unmet) err << "warning: budget not met before candidates ran out\n";
  return kExitOk;
}

// ---- eval -----------------------------------------------------------------

struct EvalFlags {
  std::string model;
  std::string reference;
  BackendFlags backend;
  std::optional<std::uint64_t> budget_params;
  std::optional<double> budget_latency;
  double alpha_acc = 1.0;
  double alpha_speed = 1.0;
  std::string out;
};

int cmd_eval(const EvalFlags& f, std::ostream& out) {
  const auto net = load(f.model);
  const auto ref = f.reference.empty() ? net : load(f.reference);
  const auto dir = prepare_out_dir(f.out);
  const auto lat = f.backend.latency();
  const auto acc = f.backend.accuracy();
  const auto probes = f.backend.make_probes(ref);

  const auto base = engine::fidelity(ref, net, probes);
  const auto adjusted = hwmodel::adjusted_fidelity(acc, net, base);
  std::ostringstream fcsv;
  engine::write_fidelity_csv(fcsv, adjusted);
  write_text(dir / "fidelity.csv", fcsv.str());

  const auto breakdown = hwmodel::network_latency(*lat, net);
  std::ostringstream lcsv;
  lcsv << "layer_id,latency_ms\n" << std::setprecision(17);
  for (const auto& [layer, ms] : breakdown.per_layer) lcsv << layer << ',' << ms << '\n';
  lcsv << "total," << breakdown.total_ms << '\n';
  write_text(dir / "latency.csv", lcsv.str());

  planner::Budget budget;
  budget.max_params = f.budget_params;
  budget.max_latency_ms = f.budget_latency;
  const auto obj = planner::evaluate_objective(net, ref, {f.alpha_acc, f.alpha_speed}, *lat, acc,
                                               probes, &budget);
  json j = {{"params", obj.params},
            {"macs", engine::count_macs(net).total},
            {"latency_ms", obj.latency_ms},
            {"h_acc", obj.h_acc},
            {"h_speed", obj.h_speed},
            {"objective", obj.objective},
            {"argmax_agreement", adjusted.argmax_agreement},
            {"mean_abs_deviation", adjusted.mean_abs_deviation},
            {"probe_count", adjusted.probe_count}};
  if (obj.params_ok) j["params_ok"] = *obj.params_ok;
  if (obj.latency_ok) j["latency_ok"] = *obj.latency_ok;
  write_text(dir / "eval.json", j.dump(2) + "\n");
  out << "latency_ms=" << obj.latency_ms << " agreement=" << adjusted.argmax_agreement
      << " objective=" << obj.objective << '\n';
  return kExitOk;
}

// ---- report ---------------------------------------------------------------

struct ReportFlags {
  std::string gains;
  std::string direction = "latency";
  bool dims = false;
  std::string model;
  std::vector<std::string> pruned;
  std::string labels;
  std::string out;
};

int cmd_report(const ReportFlags& f, std::ostream& out) {
  if (f.gains.empty() && !f.dims) throw ConfigError("report needs --gains FILE and/or --dims");
  const auto dir = prepare_out_dir(f.out);
  if (!f.gains.empty()) {
    std::istringstream in(read_file(f.gains));
    const auto rep = report::read_gain_input_csv(in, report::direction_from_string(f.direction));
    std::ostringstream csv;
    report::write_gain_csv(csv, rep);
    write_text(dir / "gains.csv", csv.str());
    for (const auto& r : rep.rows) out << r.label << ": " << report::format_percent(r.gain_percent) << '\n';
  }
  if (f.dims) {
    if (f.pruned.empty()) throw ConfigError("--dims needs at least one --pruned model");
    const auto original = load(f.model);
    std::vector<nnir::Network> pruned;
    for (const auto& p : f.pruned) pruned.push_back(load(p));
    auto labels = split_list(f.labels);
    if (labels.empty())
      for (const auto& p : f.pruned) labels.push_back(fs::path(p).parent_path().filename().string());
    if (labels.size() != pruned.size())
      throw ConfigError("--labels must name every --pruned model");
    const auto rows = report::dims_table(original, pruned);
    std::ostringstream table;
    report::write_dims_table(table, rows, labels);
    write_text(dir / "dims.txt", table.str());
    out << table.str();
  }
  return kExitOk;
}

void add_budget(CLI::App* app, std::optional<std::uint64_t>& params,
                std::optional<double>& latency) {
  app->add_option("--budget-params", params, "Stop once the parameter count is below this");
  app->add_option("--budget-latency", latency, "Stop once latency (ms) is below this");
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Structured filter and cluster pruning toolkit", "cprune"};
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

  GenFlags gen;
  auto* g = app.add_subcommand("gen", "Write a synthetic model");
  g->add_option("--family", gen.family, "mobilenet_like, squeezenet_like or plain_chain");
  g->add_option("--depth", gen.depth);
  g->add_option("--base-channels", gen.base_channels);
  g->add_option("--seed", gen.seed);
  g->add_option("--input-channels", gen.input_channels);
  g->add_option("--input-size", gen.input_size);
  g->add_option("--num-classes", gen.num_classes);
  g->add_option("--widths", gen.widths, "Comma-separated pointwise widths (MobileNet backbone)");
  g->add_option("--out", gen.out, "Model file to write");

  RankFlags rank;
  auto* r = app.add_subcommand("rank", "Write per-layer filter rankings");
  r->add_option("--model", rank.model);
  rank.layers.add_to(r);
  r->add_option("--out", rank.out, "Output directory");

  ProfileFlags prof;
  auto* p = app.add_subcommand("profile", "Single-layer sweeps and cluster size detection");
  p->add_option("--model", prof.model);
  prof.backend.add_to(p);
  prof.layers.add_to(p);
  p->add_option("--min-remaining", prof.min_remaining);
  p->add_option("--theta", prof.theta, "Detection threshold in residual standard deviations");
  p->add_option("--out", prof.out, "Output directory");

  PruneFlags pr;
  auto* q = app.add_subcommand("prune", "Whole-model pruning under a budget");
  q->add_option("--model", pr.model);
  pr.backend.add_to(q);
  pr.layers.add_to(q);
  q->add_option("--method", pr.method)->check(CLI::IsMember({"filter", "cluster"}));
  q->add_option("--cluster-size", pr.cluster_size, "auto or a positive integer");
  q->add_option("--periods", pr.periods, "periods.json from profile, used by --cluster-size auto");
  q->add_option("--min-confidence", pr.min_confidence);
  q->add_option("--fallback-size", pr.fallback_size,
                "Cluster size for skipped layers or detections below --min-confidence");
  q->add_option("--theta", pr.theta);
  add_budget(q, pr.budget_params, pr.budget_latency);
  q->add_option("--max-pruned", pr.max_pruned, "Upper bound on filters removed");
  q->add_option("--min-remaining", pr.min_remaining);
  q->add_option("--policy", pr.policy)->check(CLI::IsMember({"frozen", "live"}));
  q->add_option("--log-every", pr.log_every);
  q->add_option("--alpha-acc", pr.alpha_acc);
  q->add_option("--alpha-speed", pr.alpha_speed);
  q->add_option("--out", pr.out, "Output directory");

  EvalFlags ev;
  auto* e = app.add_subcommand("eval", "Fidelity, latency and objective of a model");
  e->add_option("--model", ev.model);
  e->add_option("--reference", ev.reference, "Unpruned model; defaults to --model");
  ev.backend.add_to(e);
  add_budget(e, ev.budget_params, ev.budget_latency);
  e->add_option("--alpha-acc", ev.alpha_acc);
  e->add_option("--alpha-speed", ev.alpha_speed);
  e->add_option("--out", ev.out, "Output directory");

  ReportFlags rep;
  auto* t = app.add_subcommand("report", "Gain tables and layer dimension tables");
  t->add_option("--gains", rep.gains, "CSV: label,without_pruning,after_pruning");
  t->add_option("--direction", rep.direction)->check(CLI::IsMember({"latency", "throughput"}));
  t->add_flag("--dims", rep.dims, "Write the layer dimensions table");
  t->add_option("--model", rep.model, "Original model for --dims");
  t->add_option("--pruned", rep.pruned, "Pruned model (repeatable)")
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
  t->add_option("--labels", rep.labels, "Comma-separated column labels for --pruned");
  t->add_option("--out", rep.out, "Output directory");

  try {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    if (!args.empty()) {
      if (const auto* sub = app.get_subcommand_no_throw(args.front())) {
        auto extra = config_args(*sub);
        args.insert(args.begin() + 1, extra.begin(), extra.end());
      }
    }
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& ex) {
    const int code = app.exit(ex, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  } catch (const Error& ex) {
    err << "error: " << ex.what() << '\n';
    return kExitConfig;
  }

  try {
    if (*g) return cmd_gen(gen, out);
    if (*r) return cmd_rank(rank, out);
    if (*p) return cmd_profile(prof, out, err);
    if (*q) return cmd_prune(pr, out, err);
    if (*e) return cmd_eval(ev, out);
    if (*t) return cmd_report(rep, out);
  } catch (const ConfigError& ex) {
    err << "config error: " << ex.what() << '\n';
    return kExitConfig;
  } catch (const Error& ex) {
    err << "data error: " << ex.what() << '\n';
    return kExitData;
  } catch (const std::exception& ex) {
    err << "internal error: " << ex.what() << '\n';
    return kExitInternal;
  }
  return kExitInternal;
}

}  // namespace cprune::cli
