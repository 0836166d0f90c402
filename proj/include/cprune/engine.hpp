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

// Reference inference, MAC/parameter accounting, and the dataset-free
// fidelity proxy: argmax agreement and mean absolute output deviation of a
// pruned network against its unpruned reference on seeded synthetic probes.
// The proxy stands in for detection accuracy; it preserves the ordering the
// pruning algorithms rely on (less important filters perturb outputs less).

#ifndef CPRUNE_ENGINE_HPP_
#define CPRUNE_ENGINE_HPP_

#include <cstddef>
#include <cstdint>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cprune/nnir.hpp"

namespace cprune::engine {

using nnir::ActivationDims;
using nnir::Network;

// Channel-major (c, h, w) values.
struct Activation {
  ActivationDims dims;
  std::vector<float> values;
};

struct ProbeSet {
  std::vector<Activation> inputs;
  std::uint64_t seed = 0;
};

inline constexpr std::size_t kDefaultProbeCount = 64;

// `count` inputs with values uniform in [0, 1); reproducible from
// (dims, count, seed).
ProbeSet make_probes(ActivationDims dims, std::size_t count = kDefaultProbeCount,
                     std::uint64_t seed = 0);

// Direct convolution semantics, accumulated in double and stored as float.
// Throws ShapeError on an input dims mismatch and NumericError on a
// non-finite intermediate value.
Activation forward(const Network& network, const Activation& input);

std::vector<Activation> forward_all(const Network& network, const ProbeSet& probes);

struct MacReport {
  std::uint64_t total = 0;
  std::vector<std::pair<std::string, std::uint64_t>> per_layer;  // conv nodes, topo order
};

// Standard/pointwise: H_out*W_out*C_out*C_in*kh*kw. Depthwise:
// H_out*W_out*C*kh*kw.
MacReport count_macs(const Network& network);

// Weight plus bias elements over all conv nodes.
std::uint64_t count_params(const Network& network);

struct FidelityReport {
  double argmax_agreement = 1.0;
  double mean_abs_deviation = 0.0;
  std::size_t probe_count = 0;
};

// Index of the channel with the largest spatial sum (first on ties).
std::size_t output_argmax(const Activation& output);

// Compares per-probe outputs pairwise. Throws ShapeError on mismatched
// counts or dims.
FidelityReport compare_outputs(std::span<const Activation> reference,
                               std::span<const Activation> candidate);

FidelityReport fidelity(const Network& reference, const Network& candidate,
                        const ProbeSet& probes);

// Header `argmax_agreement,mean_abs_deviation,probe_count` plus one row.
void write_fidelity_csv(std::ostream& os, const FidelityReport& report);

}  // namespace cprune::engine

#endif  // CPRUNE_ENGINE_HPP_
