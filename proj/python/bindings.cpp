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

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/operators.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>
#include <string>
#include <vector>

#include "cprune/cli.hpp"
#include "cprune/engine.hpp"
#include "cprune/error.hpp"
#include "cprune/hwmodel.hpp"
#include "cprune/model_io.hpp"
#include "cprune/nnir.hpp"
#include "cprune/planner.hpp"
#include "cprune/profiler.hpp"
#include "cprune/pruner.hpp"
#include "cprune/ranking.hpp"
#include "cprune/report.hpp"
#include "cprune/synth.hpp"

namespace py = pybind11;
using namespace cprune;

namespace {

py::dict step_to_dict(const planner::PruneStep& s) {
  py::list pruned;
  for (const auto& f : s.pruned) pruned.append(py::make_tuple(f.layer, f.index));
  py::dict d;
  d["step"] = s.step;
  d["method"] = s.method;
  d["pruned"] = pruned;
  d["filters_pruned_total"] = s.filters_pruned_total;
  d["filters_remaining"] = s.filters_remaining;
  d["params"] = s.params;
  d["macs"] = s.macs;
  d["latency_ms"] = s.latency_ms;
  d["fidelity"] = s.fidelity;
  d["objective"] = s.objective;
  return d;
}

py::tuple plan_to_python(const planner::PlanResult& r) {
  py::list steps;
  for (const auto& s : r.log.steps) steps.append(step_to_dict(s));
  py::dict log;
  log["method"] = r.log.method;
  log["steps"] = steps;
  log["stop_reason"] = std::string(planner::to_string(r.log.stop_reason));
  log["budget_unmet"] = r.log.budget_unmet;
  return py::make_tuple(r.network, log);
}

planner::Budget make_budget(std::optional<std::uint64_t> max_params,
                            std::optional<double> max_latency_ms,
                            std::optional<std::size_t> max_filters_pruned) {
  return {max_params, max_latency_ms, max_filters_pruned};
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Structured filter and cluster pruning";

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<ShapeError>(m, "ShapeError", base.ptr());
  py::register_exception<NumericError>(m, "NumericError", base.ptr());
  py::register_exception<FormatError>(m, "FormatError", base.ptr());
  py::register_exception<PruneError>(m, "PruneError", base.ptr());
  py::register_exception<LookupError>(m, "LookupError", base.ptr());

  py::class_<nnir::WeightDims>(m, "WeightDims")
      .def_readonly("c_out", &nnir::WeightDims::c_out)
      .def_readonly("c_in", &nnir::WeightDims::c_in)
      .def_readonly("kh", &nnir::WeightDims::kh)
      .def_readonly("kw", &nnir::WeightDims::kw)
      .def("as_tuple",
           [](const nnir::WeightDims& d) { return py::make_tuple(d.c_out, d.c_in, d.kh, d.kw); })
      .def("__repr__", [](const nnir::WeightDims& d) { return report::format_dims(d); });

  py::class_<nnir::Network>(m, "Network")
      .def_property_readonly("node_ids",
                             [](const nnir::Network& n) {
                               std::vector<std::string> ids;
                               for (const auto& node : n.nodes) ids.push_back(node.id);
                               return ids;
                             })
      .def_property_readonly("input_dims",
                             [](const nnir::Network& n) {
                               return py::make_tuple(n.input_dims.c, n.input_dims.h, n.input_dims.w);
                             })
      .def("kind", [](const nnir::Network& n,
                      const std::string& id) { return std::string(nnir::to_string(n.node(id).spec.kind)); })
      .def("c_out", [](const nnir::Network& n, const std::string& id) { return n.node(id).c_out(); })
      .def("weight_dims",
           [](const nnir::Network& n, const std::string& id) -> std::optional<nnir::WeightDims> {
             const auto& node = n.node(id);
             if (!node.weights) return std::nullopt;
             return node.weights->dims;
           })
      .def("weights",
           [](const nnir::Network& n, const std::string& id) {
             const auto& node = n.node(id);
             return node.weights ? node.weights->values : std::vector<float>{};
           })
      .def("violations",
           [](const nnir::Network& n) {
             std::vector<std::string> out;
             for (const auto& v : nnir::validate(n)) out.push_back(v.message);
             return out;
           })
      .def(py::self == py::self);

  m.def(
      "synth_model",
      [](const std::string& family, int depth, int base_channels, std::uint64_t seed,
         int input_channels, int input_size, int num_classes) {
        return nnir::synth_model({nnir::family_from_string(family), depth, base_channels, seed,
                                  input_channels, input_size, num_classes});
      },
      py::arg("family") = "mobilenet_like", py::arg("depth") = 4, py::arg("base_channels") = 16,
      py::arg("seed") = 0, py::arg("input_channels") = 3, py::arg("input_size") = 16,
      py::arg("num_classes") = 16);
  m.def(
      "mobilenet_from_widths",
      [](const std::vector<int>& widths, int channels, int size, std::uint64_t seed,
         int num_classes) {
        return nnir::mobilenet_from_widths(widths, {channels, size, size}, seed, num_classes);
      },
      py::arg("widths"), py::arg("input_channels") = 3, py::arg("input_size") = 32,
      py::arg("seed") = 0, py::arg("num_classes") = 16);

  m.def("serialize_model", [](const nnir::Network& n) {
    const auto bytes = nnir::serialize_model(n);
    return py::bytes(reinterpret_cast<const char*>(bytes.data()), bytes.size());
  });
  m.def("parse_model", [](const py::bytes& b) {
    const std::string s = b;
    return nnir::parse_model(
        std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>(s.data()), s.size()));
  });
  m.def("save_model", &nnir::save_model, py::arg("network"), py::arg("path"));
  m.def("load_model", &nnir::load_model, py::arg("path"));

  m.def("count_macs", [](const nnir::Network& n) { return engine::count_macs(n).total; });
  m.def("count_params", &engine::count_params);
  m.def(
      "fidelity",
      [](const nnir::Network& ref, const nnir::Network& cand, std::size_t probes,
         std::uint64_t seed) {
        const auto r = engine::fidelity(ref, cand, engine::make_probes(ref.input_dims, probes, seed));
        return py::make_tuple(r.argmax_agreement, r.mean_abs_deviation);
      },
      py::arg("reference"), py::arg("candidate"), py::arg("probes") = engine::kDefaultProbeCount,
      py::arg("seed") = 0);

  m.def("layer_scores",
        [](const nnir::Network& n, const std::string& id) { return ranking::layer_scores(n.node(id)); });
  m.def("prunable_layers", [](const nnir::Network& n) { return pruner::prunable_layers(n); });
  m.def(
      "remove_filters",
      [](const nnir::Network& n, const std::string& layer, std::vector<std::size_t> indices,
         std::size_t min_remaining) {
        return pruner::remove_filters(n, {layer, std::move(indices)}, {min_remaining}).network;
      },
      py::arg("network"), py::arg("layer"), py::arg("indices"), py::arg("min_remaining") = 2);

  py::class_<hwmodel::LatencyModel>(m, "LatencyModel")
      .def("network_latency",
           [](const hwmodel::LatencyModel& lm, const nnir::Network& n) {
             return hwmodel::network_latency(lm, n).total_ms;
           });
  py::class_<hwmodel::LaneAlignedModel, hwmodel::LatencyModel>(m, "LaneAlignedModel")
      .def(py::init([](int lane_width, double c0, double c1, double c2) {
             return hwmodel::LaneAlignedModel({lane_width, c0, c1, c2});
           }),
           py::arg("lane_width") = 8, py::arg("c0") = 0.05, py::arg("c1") = 2e-7,
           py::arg("c2") = 1e-5);
  py::class_<hwmodel::TemporalModel, hwmodel::LatencyModel>(m, "TemporalModel")
      .def(py::init([](double c0, double c1, double jitter, std::uint64_t seed) {
             return hwmodel::TemporalModel({c0, c1, jitter, seed});
           }),
           py::arg("c0") = 0.05, py::arg("c1") = 1e-6, py::arg("jitter") = 0.0,
           py::arg("seed") = 0);
  py::class_<hwmodel::MeasuredTraceModel, hwmodel::LatencyModel>(m, "MeasuredTraceModel")
      .def(py::init([](const std::string& csv) {
             std::istringstream in(csv);
             return hwmodel::MeasuredTraceModel::from_csv(in);
           }),
           py::arg("csv_text"));

  m.def(
      "detect_period",
      [](const std::vector<std::size_t>& filters, const std::vector<double>& values,
         const std::string& polarity, double theta) {
        const auto pol =
            polarity == "bottoms" ? profiler::Polarity::kBottoms : profiler::Polarity::kPeaks;
        if (polarity != "bottoms" && polarity != "peaks")
          throw ConfigError("polarity must be 'bottoms' or 'peaks'");
        const auto d = profiler::detect_period(filters, values, pol, theta);
        return py::make_tuple(d.period, d.confidence);
      },
      py::arg("filters_remaining"), py::arg("values"), py::arg("polarity"),
      py::arg("theta") = 1.0);
  m.def("optimal_cluster_size", &profiler::optimal_cluster_size, py::arg("p_acc"),
        py::arg("p_lat"));

  m.def(
      "cluster_prune",
      [](const nnir::Network& n, std::size_t cluster_size, const hwmodel::LatencyModel& lat,
         std::optional<std::uint64_t> max_params, std::optional<double> max_latency_ms,
         std::optional<std::size_t> max_filters_pruned, double delta, std::size_t probes,
         std::uint64_t seed) {
        const auto ps = engine::make_probes(n.input_dims, probes, seed);
        const planner::PlanContext ctx{&lat, {delta, 8}, &ps, {}};
        return plan_to_python(planner::cluster_prune(
            n, planner::uniform_cluster_sizes(n, cluster_size),
            make_budget(max_params, max_latency_ms, max_filters_pruned), ctx));
      },
      py::arg("network"), py::arg("cluster_size"), py::arg("latency"),
      py::arg("max_params") = py::none(), py::arg("max_latency_ms") = py::none(),
      py::arg("max_filters_pruned") = py::none(), py::arg("delta") = 0.0,
      py::arg("probes") = 16, py::arg("seed") = 0);
  m.def(
      "filter_prune",
      [](const nnir::Network& n, const hwmodel::LatencyModel& lat,
         std::optional<std::uint64_t> max_params, std::optional<double> max_latency_ms,
         std::optional<std::size_t> max_filters_pruned, double delta, std::size_t probes,
         std::uint64_t seed) {
        const auto ps = engine::make_probes(n.input_dims, probes, seed);
        const planner::PlanContext ctx{&lat, {delta, 8}, &ps, {}};
        return plan_to_python(planner::filter_prune(
            n, make_budget(max_params, max_latency_ms, max_filters_pruned), ctx));
      },
      py::arg("network"), py::arg("latency"), py::arg("max_params") = py::none(),
      py::arg("max_latency_ms") = py::none(), py::arg("max_filters_pruned") = py::none(),
      py::arg("delta") = 0.0, py::arg("probes") = 16, py::arg("seed") = 0);

  m.def(
      "compute_gain",
      [](double before, double after, const std::string& direction) {
        return report::compute_gain(before, after, report::direction_from_string(direction));
      },
      py::arg("before"), py::arg("after"), py::arg("direction") = "latency");
  m.def("format_percent", &report::format_percent);

  m.def("run_cli", [](std::vector<std::string> args) {
    args.insert(args.begin(), "cprune");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out;
    std::ostringstream err;
    const int code = cli::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    return py::make_tuple(code, out.str(), err.str());
  });
}
