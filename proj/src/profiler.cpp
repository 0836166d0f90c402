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

#include "cprune/profiler.hpp"

#include <cmath>
#include <iomanip>
#include <limits>
#include <numeric>

#include "cprune/error.hpp"
#include "cprune/pruner.hpp"
#include "cprune/ranking.hpp"
#include "json.hpp"

namespace cprune::profiler {

SweepTrace sweep_layer(const Network& network, std::string_view layer,
                       const hwmodel::LatencyModel& latency,
                       const hwmodel::AccuracyResponseModel& accuracy,
                       const engine::ProbeSet& probes, const SweepOptions& options) {
  const auto& node = network.node(layer);
  if (!node.is_conv() || node.spec.kind == nnir::LayerKind::kConvDepthwise)
    throw PruneError(PruneError::Kind::kNotConv, "layer '" + node.id + "' cannot be swept");
  const auto k = static_cast<std::size_t>(node.c_out());
  const std::size_t floor = std::max<std::size_t>(options.min_remaining, 1);
  if (k < floor + kMinSweepPoints) {
    throw ConfigError("layer '" + node.id + "' has " + std::to_string(k) +
                      " filters, too small to sweep down to " + std::to_string(floor));
  }
  const auto reference = engine::forward_all(network, probes);
  SweepTrace trace{node.id, {}};
  Network current = network;
  for (std::size_t remaining = k - 1; remaining >= floor; --remaining) {
    // Ranking is recomputed every step; removing a layer's own filters never
    // changes the scores of its survivors.
    const auto ranked = ranking::rank_layer(current, node.id);
    current = pruner::remove_filters(current, {node.id, {ranked.front().index}},
                                     {.min_remaining = floor})
                  .network;
    const auto base = engine::compare_outputs(reference, engine::forward_all(current, probes));
    trace.points.push_back({remaining, hwmodel::network_latency(latency, current).total_ms,
                            hwmodel::adjusted_fidelity(accuracy, current, base).argmax_agreement});
    if (remaining == floor) break;
  }
  return trace;
}

PeriodDetection detect_period(std::span<const std::size_t> filters_remaining,
                              std::span<const double> values, Polarity polarity,
                              double theta) {
  const std::size_t n = values.size();
  if (filters_remaining.size() != n) throw ConfigError("series spans differ in length");
  if (n < kMinDetectPoints)
    throw ConfigError("series too short for period detection (" + std::to_string(n) + " < 8)");

  // Least-squares line over the point index.
  const double mean_x = (static_cast<double>(n) - 1.0) / 2.0;
  const double mean_y = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(n);
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = static_cast<double>(i) - mean_x;
    sxy += dx * (values[i] - mean_y);
    sxx += dx * dx;
  }
  const double slope = sxy / sxx;
  std::vector<double> residual(n);
  double scale = 0.0;
  double ss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    residual[i] = values[i] - (mean_y + slope * (static_cast<double>(i) - mean_x));
    ss += residual[i] * residual[i];
    scale = std::max(scale, std::abs(values[i]));
  }
  const double sigma = std::sqrt(ss / static_cast<double>(n));
  // Residuals at rounding level carry no structure.
  if (sigma <= 1e-9 * std::max(1.0, scale)) return {1, 0.0};

  const std::size_t max_p = n / 2;
  std::vector<double> score(max_p + 1, -std::numeric_limits<double>::infinity());
  std::vector<double> spread(max_p + 1, 0.0);
  double best = -std::numeric_limits<double>::infinity();
  std::size_t best_p = 1;
  for (std::size_t p = 2; p <= max_p; ++p) {
    double in_sum = 0.0;
    double out_sum = 0.0;
    std::size_t in_n = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (filters_remaining[i] % p == 0) {
        in_sum += residual[i];
        ++in_n;
      } else {
        out_sum += residual[i];
      }
    }
    // A phase seen fewer than three times is indistinguishable from noise.
    if (in_n < kMinPhaseHits || in_n == n) continue;
    const auto out_n = static_cast<double>(n - in_n);
    double contrast = in_sum / static_cast<double>(in_n) - out_sum / out_n;
    if (polarity == Polarity::kBottoms) contrast = -contrast;
    score[p] = contrast;
    spread[p] = sigma * std::sqrt(1.0 / static_cast<double>(in_n) + 1.0 / out_n);
    if (contrast > best) {
      best = contrast;
      best_p = p;
    }
  }
  // Every multiple of the true period shares its drops, so a harmonic can win
  // on noise alone. A divisor within one standard error of the best is taken.
  if (best_p > 1) {
    for (std::size_t q = 2; q < best_p; ++q) {
      if (best_p % q == 0 && score[q] >= best - spread[best_p]) {
        best_p = q;
        best = score[q];
        break;
      }
    }
  }
  const double confidence = std::isfinite(best) ? std::max(0.0, best / sigma) : 0.0;
  if (std::isfinite(best) && best > theta * sigma) return {best_p, confidence};
  return {1, confidence};
}

std::size_t optimal_cluster_size(std::size_t p_acc, std::size_t p_lat) {
  if (p_acc < 1 || p_lat < 1) throw ConfigError("periods must be at least 1");
  return std::lcm(p_acc, p_lat);
}

std::map<std::string, PeriodEstimate> profile_all(
    const Network& network, const hwmodel::LatencyModel& latency,
    const hwmodel::AccuracyResponseModel& accuracy, const engine::ProbeSet& probes,
    std::span<const std::string> layers, const ProfileOptions& options,
    std::vector<SweepTrace>* traces) {
  std::map<std::string, PeriodEstimate> out;
  const std::size_t floor = std::max<std::size_t>(options.sweep.min_remaining, 1);
  for (const auto& layer : layers) {
    PeriodEstimate est;
    const auto k = static_cast<std::size_t>(network.node(layer).c_out());
    if (k < floor + kMinSweepPoints) {
      est.skipped = true;
      est.skip_reason = "too few filters to sweep";
      out[layer] = est;
      continue;
    }
    SweepTrace trace = sweep_layer(network, layer, latency, accuracy, probes, options.sweep);
    if (trace.points.size() < kMinDetectPoints) {
      est.skipped = true;
      est.skip_reason = "sweep shorter than 8 points";
    } else {
      std::vector<std::size_t> f;
      std::vector<double> lat;
      std::vector<double> acc;
      for (const auto& p : trace.points) {
        f.push_back(p.filters_remaining);
        lat.push_back(p.latency_ms);
        acc.push_back(p.fidelity);
      }
      const auto dl = detect_period(f, lat, Polarity::kBottoms, options.theta);
      const auto da = detect_period(f, acc, Polarity::kPeaks, options.theta);
      est.p_lat = dl.period;
      est.lat_confidence = dl.confidence;
      est.p_acc = da.period;
      est.acc_confidence = da.confidence;
      est.cluster_size = optimal_cluster_size(est.p_acc, est.p_lat);
    }
    out[layer] = est;
    if (traces) traces->push_back(std::move(trace));
  }
  return out;
}

void write_sweep_csv(std::ostream& os, std::span<const SweepTrace> traces) {
  os << "layer_id,filters_remaining,latency_ms,fidelity\n" << std::setprecision(17);
  for (const auto& t : traces)
    for (const auto& p : t.points)
      os << t.layer << ',' << p.filters_remaining << ',' << p.latency_ms << ',' << p.fidelity
         << '\n';
}

std::string periods_to_json(const std::map<std::string, PeriodEstimate>& periods) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [layer, e] : periods) {
    j[layer] = {{"p_lat", e.p_lat},
                {"p_acc", e.p_acc},
                {"cluster_size", e.cluster_size},
                {"lat_confidence", e.lat_confidence},
                {"acc_confidence", e.acc_confidence},
                {"skipped", e.skipped},
                {"skip_reason", e.skip_reason}};
  }
  return j.dump(2) + "\n";
}

std::map<std::string, PeriodEstimate> periods_from_json(std::string_view text) {
  std::map<std::string, PeriodEstimate> out;
  try {
    const auto j = nlohmann::json::parse(text);
    for (const auto& [layer, v] : j.items()) {
      PeriodEstimate e;
      e.p_lat = v.at("p_lat").get<std::size_t>();
      e.p_acc = v.at("p_acc").get<std::size_t>();
      e.cluster_size = v.at("cluster_size").get<std::size_t>();
      e.lat_confidence = v.value("lat_confidence", 0.0);
      e.acc_confidence = v.value("acc_confidence", 0.0);
      e.skipped = v.value("skipped", false);
      e.skip_reason = v.value("skip_reason", std::string());
      if (e.cluster_size < 1) throw ConfigError("cluster_size must be positive");
      out[layer] = e;
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(FormatError::Kind::kManifest, std::string("bad periods json: ") + e.what());
  }
  return out;
}

}  // namespace cprune::profiler
