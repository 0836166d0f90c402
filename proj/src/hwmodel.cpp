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

#include "cprune/hwmodel.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "cprune/error.hpp"
#include "cprune/random.hpp"

namespace cprune::hwmodel {

namespace {

std::uint64_t ceil_div(std::uint64_t a, std::uint64_t b) { return (a + b - 1) / b; }

}  // namespace

std::vector<ConvWork> conv_workloads(const Network& network) {
  const auto shapes = nnir::infer_shapes(network);
  std::vector<ConvWork> out;
  for (std::size_t pos : nnir::topological_order(network)) {
    const auto& node = network.nodes[pos];
    if (!node.is_conv()) continue;
    const auto& d = node.weights->dims;
    const auto& s = shapes.at(node.id);
    ConvWork w;
    w.layer = node.id;
    w.kind = node.spec.kind;
    w.c_in = d.c_in;
    w.c_out = d.c_out;
    w.kh = d.kh;
    w.kw = d.kw;
    w.h_out = s.h;
    w.w_out = s.w;
    w.macs = static_cast<std::uint64_t>(s.h) * s.w * d.c_out * d.c_in * d.kh * d.kw;
    out.push_back(std::move(w));
  }
  return out;
}

LaneAlignedModel::LaneAlignedModel(Params params) : params_(params) {
  if (params_.lane_width < 1) throw ConfigError("lane width must be at least 1");
  if (params_.c0 < 0 || params_.c1 < 0 || params_.c2 < 0)
    throw ConfigError("lane model coefficients must be non-negative");
}

double LaneAlignedModel::layer_latency(const ConvWork& w) const {
  const auto lane = static_cast<std::uint64_t>(params_.lane_width);
  const double work = static_cast<double>(w.h_out) * w.w_out * w.kh * w.kw;
  const auto c_out = static_cast<std::uint64_t>(w.c_out);
  const int mis_out = c_out % lane != 0 ? 1 : 0;
  if (w.kind == nnir::LayerKind::kConvDepthwise) {
    return params_.c0 +
           work * (params_.c1 * static_cast<double>(ceil_div(c_out, lane)) + params_.c2 * mis_out);
  }
  const auto c_in = static_cast<std::uint64_t>(w.c_in);
  const int mis_in = c_in % lane != 0 ? 1 : 0;
  return params_.c0 + work * (params_.c1 * static_cast<double>(ceil_div(c_in, lane) *
                                                               ceil_div(c_out, lane)) +
                              params_.c2 * (mis_in + mis_out));
}

TemporalModel::TemporalModel(Params params) : params_(params) {
  if (params_.c0 < 0 || params_.c1 < 0) throw ConfigError("temporal coefficients must be non-negative");
  if (!(params_.jitter >= 0 && params_.jitter < 1)) throw ConfigError("jitter must lie in [0, 1)");
}

double TemporalModel::layer_latency(const ConvWork& w) const {
  double factor = 1.0;
  if (params_.jitter > 0) {
    std::ostringstream key;
    key << w.layer << '|' << w.c_in << '|' << w.c_out << '|' << w.h_out << '|' << w.w_out;
    Rng rng(derive_seed(params_.seed, key.str()));
    factor += params_.jitter * uniform(rng, -1.0, 1.0);
  }
  return params_.c0 + params_.c1 * static_cast<double>(w.macs) * factor;
}

MeasuredTraceModel MeasuredTraceModel::from_csv(std::istream& in) {
  MeasuredTraceModel m;
  std::string line;
  std::size_t lineno = 0;
  auto bad = [&](const std::string& why) {
    return FormatError(FormatError::Kind::kManifest,
                       "trace csv line " + std::to_string(lineno) + ": " + why);
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (lineno == 1) {
      if (line != "layer_id,filters_remaining,latency_ms")
        throw bad("expected header 'layer_id,filters_remaining,latency_ms'");
      continue;
    }
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != 3) throw bad("expected 3 columns");
    try {
      std::size_t used = 0;
      const unsigned long long f = std::stoull(cells[1], &used);
      if (used != cells[1].size()) throw bad("bad filters_remaining");
      const double ms = std::stod(cells[2], &used);
      if (used != cells[2].size() || !std::isfinite(ms) || ms < 0) throw bad("bad latency_ms");
      m.add(cells[0], static_cast<std::size_t>(f), ms);
    } catch (const std::logic_error&) {
      throw bad("unparseable number");
    }
  }
  if (lineno == 0) throw bad("empty trace");
  return m;
}

void MeasuredTraceModel::add(const std::string& layer, std::size_t filters_remaining,
                             double latency_ms) {
  table_[{layer, filters_remaining}] = latency_ms;
}

double MeasuredTraceModel::layer_latency(const ConvWork& w) const {
  auto it = table_.find({w.layer, static_cast<std::size_t>(w.c_out)});
  if (it == table_.end()) {
    throw LookupError("no measured latency for layer '" + w.layer + "' with " +
                      std::to_string(w.c_out) + " filters remaining");
  }
  return it->second;
}

std::optional<double> MeasuredTraceModel::whole_network_latency(std::size_t total) const {
  auto it = table_.find({"*", total});
  if (it == table_.end()) return std::nullopt;
  return it->second;
}

std::size_t total_filters(const Network& network) {
  std::size_t n = 0;
  for (const auto& node : network.nodes) n += static_cast<std::size_t>(node.c_out());
  return n;
}

LatencyBreakdown network_latency(const LatencyModel& model, const Network& network) {
  LatencyBreakdown out;
  if (auto whole = model.whole_network_latency(total_filters(network))) {
    out.total_ms = *whole;
    out.per_layer.emplace_back("*", *whole);
    return out;
  }
  for (const auto& w : conv_workloads(network)) {
    const double t = model.layer_latency(w);
    out.per_layer.emplace_back(w.layer, t);
    out.total_ms += t;
  }
  return out;
}

void AccuracyResponseModel::check() const {
  if (!(delta >= 0)) throw ConfigError("accuracy response delta must be non-negative");
  if (lane_width < 1) throw ConfigError("accuracy response lane width must be at least 1");
}

std::size_t misaligned_layers(const Network& network, int lane_width) {
  std::size_t m = 0;
  for (const auto& node : network.nodes)
    if (node.is_conv() && node.c_out() % lane_width != 0) ++m;
  return m;
}

engine::FidelityReport adjusted_fidelity(const AccuracyResponseModel& model,
                                         const Network& network,
                                         const engine::FidelityReport& base) {
  model.check();
  engine::FidelityReport out = base;
  if (model.delta == 0) return out;
  const double m = static_cast<double>(misaligned_layers(network, model.lane_width));
  out.argmax_agreement = std::clamp(base.argmax_agreement - model.delta * m, 0.0, 1.0);
  return out;
}

}  // namespace cprune::hwmodel
