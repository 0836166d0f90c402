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

// Single-layer pruning sweeps and optimal cluster size detection.
//
// A sweep removes the lowest-scoring filter of one layer at a time and
// records whole-network latency and adjusted fidelity at every step. Latency
// bottoms and fidelity peaks that recur at fixed filter counts are detected
// by residue-class contrast: after a least-squares linear detrend, the mean
// residual at filters_remaining = 0 (mod p) is compared with the mean of the
// remaining points. The contrast exploits that lane effects are locked to
// absolute multiples of the lane width, not merely periodic. The optimal
// cluster size of a layer is the LCM of its latency and fidelity periods.

#ifndef CPRUNE_PROFILER_HPP_
#define CPRUNE_PROFILER_HPP_

#include <cstddef>
#include <map>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cprune/engine.hpp"
#include "cprune/hwmodel.hpp"
#include "cprune/nnir.hpp"

namespace cprune::profiler {

using nnir::Network;

struct SweepPoint {
  std::size_t filters_remaining = 0;
  double latency_ms = 0.0;
  double fidelity = 0.0;  // adjusted argmax agreement
};

struct SweepTrace {
  std::string layer;
  std::vector<SweepPoint> points;  // filters_remaining strictly decreasing by 1
};

struct SweepOptions {
  std::size_t min_remaining = 2;
};

// Minimum sweep length; shorter layers cannot be swept.
inline constexpr std::size_t kMinSweepPoints = 4;
// Minimum series length for period detection.
inline constexpr std::size_t kMinDetectPoints = 8;
inline constexpr std::size_t kMinPhaseHits = 3;

// The base network is not modified. Throws ConfigError when the layer has
// fewer than min_remaining + 4 filters, PruneError when it is not prunable.
SweepTrace sweep_layer(const Network& network, std::string_view layer,
                       const hwmodel::LatencyModel& latency,
                       const hwmodel::AccuracyResponseModel& accuracy,
                       const engine::ProbeSet& probes, const SweepOptions& options = {});

enum class Polarity { kBottoms, kPeaks };

struct PeriodDetection {
  std::size_t period = 1;
  double confidence = 0.0;  // best contrast / residual standard deviation
};

// Candidate periods 2..floor(n/2); the best contrast is accepted when it
// exceeds theta * sigma_residual (ties go to the smaller period), otherwise
// the period is 1. Throws ConfigError for fewer than 8 points or mismatched
// spans.
PeriodDetection detect_period(std::span<const std::size_t> filters_remaining,
                              std::span<const double> values, Polarity polarity,
                              double theta = 1.0);

// LCM of the two periods. Throws ConfigError when either is 0.
std::size_t optimal_cluster_size(std::size_t p_acc, std::size_t p_lat);

struct PeriodEstimate {
  std::size_t p_lat = 1;
  std::size_t p_acc = 1;
  std::size_t cluster_size = 1;  // LCM(p_acc, p_lat)
  double lat_confidence = 0.0;
  double acc_confidence = 0.0;
  bool skipped = false;
  std::string skip_reason;
};

struct ProfileOptions {
  SweepOptions sweep;
  double theta = 1.0;
};

// Sweep + detection per layer, in the order given. Layers too small to sweep
// or detect on are reported with period 1, zero confidence and `skipped`.
std::map<std::string, PeriodEstimate> profile_all(
    const Network& network, const hwmodel::LatencyModel& latency,
    const hwmodel::AccuracyResponseModel& accuracy, const engine::ProbeSet& probes,
    std::span<const std::string> layers, const ProfileOptions& options = {},
    std::vector<SweepTrace>* traces = nullptr);

// CSV `layer_id,filters_remaining,latency_ms,fidelity`.
void write_sweep_csv(std::ostream& os, std::span<const SweepTrace> traces);

// JSON object keyed by layer id. Stable key order and number formatting.
std::string periods_to_json(const std::map<std::string, PeriodEstimate>& periods);
// Throws FormatError.
std::map<std::string, PeriodEstimate> periods_from_json(std::string_view text);

}  // namespace cprune::profiler

#endif  // CPRUNE_PROFILER_HPP_
