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

// Gain arithmetic for latency/throughput tables and the layer dimensions
// table comparing an original network with pruned versions.

#ifndef CPRUNE_REPORT_HPP_
#define CPRUNE_REPORT_HPP_

#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cprune/nnir.hpp"

namespace cprune::report {

enum class Direction {
  kLatency,     // (before - after) / before
  kThroughput,  // (after - before) / before
};

std::string_view to_string(Direction direction);
Direction direction_from_string(std::string_view name);

// Percent, full precision. Throws ConfigError when before is not positive or
// either value is not finite.
double compute_gain(double before, double after, Direction direction);

// Rounded half-up to two decimals with a trailing '%', e.g. "6.80%".
std::string format_percent(double percent);

struct GainRow {
  std::string label;
  double without_pruning = 0.0;
  double after_pruning = 0.0;
  double gain_percent = 0.0;
};

struct GainReport {
  Direction direction = Direction::kLatency;
  std::vector<GainRow> rows;

  void add(std::string label, double without_pruning, double after_pruning);
};

// Input rows: label,without_pruning,after_pruning (header required). Throws
// FormatError on malformed rows and ConfigError on a non-positive baseline.
GainReport read_gain_input_csv(std::istream& in, Direction direction);

// label,direction,without_pruning,after_pruning,gain_percent,gain_display
void write_gain_csv(std::ostream& os, const GainReport& report);

struct DimsRow {
  std::string layer;
  nnir::WeightDims original;
  std::vector<nnir::WeightDims> pruned;
  std::vector<int> filters_pruned;  // original c_out - pruned c_out
};

// Every conv layer of the original in topological order. Layers missing from
// a pruned network throw ShapeError.
std::vector<DimsRow> dims_table(const nnir::Network& original,
                                std::span<const nnir::Network> pruned);

std::string format_dims(const nnir::WeightDims& dims);

// Fixed-width text: layer, original dimension, then a (dims, # pruned) pair
// per pruned network under the given labels.
void write_dims_table(std::ostream& os, std::span<const DimsRow> rows,
                      std::span<const std::string> labels);

}  // namespace cprune::report

#endif  // CPRUNE_REPORT_HPP_
