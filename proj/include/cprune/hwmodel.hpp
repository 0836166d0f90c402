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

// Hardware response backends.
//
// Spatial (data-flow) accelerators process channels in fixed lanes and
// penalize shapes that are not lane multiples; temporal (SIMD/SIMT)
// processors scale smoothly with work. LaneAlignedModel and TemporalModel are
// analytic stand-ins for the two paradigms; MeasuredTraceModel replays real
// device timings from CSV. AccuracyResponseModel is a synthetic emulation of
// compilers that lose accuracy on misaligned layers.

#ifndef CPRUNE_HWMODEL_HPP_
#define CPRUNE_HWMODEL_HPP_

#include <cstddef>
#include <cstdint>
#include <istream>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cprune/engine.hpp"
#include "cprune/nnir.hpp"

namespace cprune::hwmodel {

using nnir::Network;

// Shape of one conv layer as the latency models see it. For depthwise
// layers c_in is 1 (one kernel per channel).
struct ConvWork {
  std::string layer;
  nnir::LayerKind kind = nnir::LayerKind::kConvStandard;
  int c_in = 0;
  int c_out = 0;
  int kh = 0;
  int kw = 0;
  int h_out = 0;
  int w_out = 0;
  std::uint64_t macs = 0;
};

std::vector<ConvWork> conv_workloads(const Network& network);

class LatencyModel {
 public:
  virtual ~LatencyModel() = default;
  virtual std::string name() const = 0;
  virtual double layer_latency(const ConvWork& work) const = 0;
  // A whole-network measurement keyed by the network's total conv filter
  // count, when the backend has one.
  virtual std::optional<double> whole_network_latency(std::size_t /*total_filters*/) const {
    return std::nullopt;
  }
};

// t = c0 + work * [c1 * ceil(C_in/L) * ceil(C_out/L) + c2 * (mis_in + mis_out)]
// with work = H_out * W_out * kh * kw and mis_x = 1 iff x is not a multiple
// of L. Depthwise layers use ceil(C/L) alone and only an output
// misalignment term.
class LaneAlignedModel : public LatencyModel {
 public:
  struct Params {
    int lane_width = 8;
    double c0 = 0.05;   // ms per layer
    double c1 = 2e-7;   // ms per work unit per lane-group pair
    double c2 = 1e-5;   // ms per work unit per misaligned side
  };

  LaneAlignedModel() : LaneAlignedModel(Params{}) {}
  // Throws ConfigError when L < 1 or any coefficient is negative.
  explicit LaneAlignedModel(Params params);

  const Params& params() const { return params_; }
  std::string name() const override { return "lane"; }
  double layer_latency(const ConvWork& work) const override;

 private:
  Params params_;
};

// t = c0 + c1 * MACs * (1 + jitter * u), u uniform in [-1, 1) drawn from a
// generator seeded by (seed, layer id, layer shape).
class TemporalModel : public LatencyModel {
 public:
  struct Params {
    double c0 = 0.05;
    double c1 = 1e-6;  // ms per MAC
    double jitter = 0.0;
    std::uint64_t seed = 0;
  };

  TemporalModel() : TemporalModel(Params{}) {}
  // Throws ConfigError unless c0, c1 >= 0 and 0 <= jitter < 1.
  explicit TemporalModel(Params params);

  const Params& params() const { return params_; }
  std::string name() const override { return "temporal"; }
  double layer_latency(const ConvWork& work) const override;

 private:
  Params params_;
};

// Lookup table keyed by (layer id, filters remaining). CSV header
// `layer_id,filters_remaining,latency_ms`; rows with layer_id `*` are
// whole-network timings keyed by the network's total conv filter count.
// Lookups never interpolate.
class MeasuredTraceModel : public LatencyModel {
 public:
  // Throws FormatError on a malformed CSV.
  static MeasuredTraceModel from_csv(std::istream& in);

  void add(const std::string& layer, std::size_t filters_remaining, double latency_ms);

  std::string name() const override { return "measured"; }
  // Throws LookupError naming (layer, c_out) on a miss.
  double layer_latency(const ConvWork& work) const override;
  std::optional<double> whole_network_latency(std::size_t total_filters) const override;

 private:
  std::map<std::pair<std::string, std::size_t>, double> table_;
};

struct LatencyBreakdown {
  double total_ms = 0.0;
  std::vector<std::pair<std::string, double>> per_layer;
};

// Sum of per-layer latencies over conv nodes. A measured whole-network row
// for the network's filter count takes precedence and is reported as a
// single "*" entry.
LatencyBreakdown network_latency(const LatencyModel& model, const Network& network);

// Total conv filters (sum of c_out over conv nodes).
std::size_t total_filters(const Network& network);

// agreement' = max(0, agreement - delta * m), m = conv layers whose C_out is
// not a multiple of L. Deviation is unchanged.
struct AccuracyResponseModel {
  double delta = 0.0;
  int lane_width = 8;

  void check() const;  // throws ConfigError
};

std::size_t misaligned_layers(const Network& network, int lane_width);

engine::FidelityReport adjusted_fidelity(const AccuracyResponseModel& model,
                                         const Network& network,
                                         const engine::FidelityReport& base);

}  // namespace cprune::hwmodel

#endif  // CPRUNE_HWMODEL_HPP_
