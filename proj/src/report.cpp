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

#include "cprune/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <iomanip>
#include <sstream>

#include "cprune/error.hpp"

namespace cprune::report {
namespace {

// Shortest text that parses back to the same double.
std::string shortest(double v) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::string trim(std::string s) {
  const auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

double parse_number(const std::string& text, std::size_t line, const char* field) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size())
    throw FormatError(FormatError::Kind::kManifest, "gain input line " + std::to_string(line) +
                                                        ": bad " + field + " '" + text + "'");
  return v;
}

}  // namespace

std::string_view to_string(Direction direction) {
  return direction == Direction::kThroughput ? "throughput" : "latency";
}

Direction direction_from_string(std::string_view name) {
  if (name == "latency") return Direction::kLatency;
  if (name == "throughput") return Direction::kThroughput;
  throw ConfigError("unknown gain direction '" + std::string(name) +
                    "' (latency, throughput)");
}

double compute_gain(double before, double after, Direction direction) {
  if (!std::isfinite(before) || !std::isfinite(after))
    throw ConfigError("gain inputs must be finite");
  if (!(before > 0.0)) throw ConfigError("gain baseline must be positive");
  const double diff = direction == Direction::kLatency ? before - after : after - before;
  return diff / before * 100.0;
}

std::string format_percent(double percent) {
  // Nudge by a relative epsilon so decimal ties stored just below .5 round up.
  const double scaled = percent * 100.0;
  double r = std::floor(scaled + 0.5 + 1e-9 * std::max(1.0, std::abs(scaled)));
  if (r == 0.0) r = 0.0;  // no "-0.00"
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f%%", r / 100.0);
  return buf;
}

void GainReport::add(std::string label, double without_pruning, double after_pruning) {
  rows.push_back({std::move(label), without_pruning, after_pruning,
                  compute_gain(without_pruning, after_pruning, direction)});
}

GainReport read_gain_input_csv(std::istream& in, Direction direction) {
  GainReport report;
  report.direction = direction;
  std::string line;
  if (!std::getline(in, line) || trim(line) != "label,without_pruning,after_pruning")
    throw FormatError(FormatError::Kind::kHeader,
                      "gain input must start with 'label,without_pruning,after_pruning'");
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto cells = split_csv_line(trim(line));
    if (cells.size() != 3)
      throw FormatError(FormatError::Kind::kManifest,
                        "gain input line " + std::to_string(lineno) + ": expected 3 fields");
    report.add(cells[0], parse_number(cells[1], lineno, "without_pruning"),
               parse_number(cells[2], lineno, "after_pruning"));
  }
  return report;
}

void write_gain_csv(std::ostream& os, const GainReport& report) {
  os << "label,direction,without_pruning,after_pruning,gain_percent,gain_display\n";
  for (const auto& r : report.rows) {
    os << r.label << ',' << to_string(report.direction) << ',' << shortest(r.without_pruning)
       << ',' << shortest(r.after_pruning) << ',' << shortest(r.gain_percent) << ','
       << format_percent(r.gain_percent) << '\n';
  }
}

std::vector<DimsRow> dims_table(const nnir::Network& original,
                                std::span<const nnir::Network> pruned) {
  std::vector<DimsRow> rows;
  for (std::size_t i : nnir::topological_order(original)) {
    const auto& node = original.nodes[i];
    if (!node.is_conv()) continue;
    DimsRow row;
    row.layer = node.id;
    row.original = node.weights->dims;
    for (const auto& p : pruned) {
      const auto& q = p.node(node.id);
      if (!q.is_conv()) throw ShapeError("layer '" + node.id + "' is not a conv in the pruned network");
      row.pruned.push_back(q.weights->dims);
      row.filters_pruned.push_back(row.original.c_out - q.weights->dims.c_out);
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string format_dims(const nnir::WeightDims& d) {
  std::ostringstream os;
  os << '(' << d.c_out << ", " << d.c_in << ", " << d.kh << ", " << d.kw << ')';
  return os.str();
}

void write_dims_table(std::ostream& os, std::span<const DimsRow> rows,
                      std::span<const std::string> labels) {
  std::vector<std::string> header{"Convolution Layer", "Original Dimension"};
  for (const auto& l : labels) {
    header.push_back(l);
    header.push_back("# Filters Pruned");
  }
  std::vector<std::vector<std::string>> cells;
  for (const auto& r : rows) {
    if (r.pruned.size() != labels.size())
      throw ConfigError("dims table has " + std::to_string(r.pruned.size()) +
                        " pruned columns but " + std::to_string(labels.size()) + " labels");
    std::vector<std::string> line{r.layer, format_dims(r.original)};
    for (std::size_t k = 0; k < r.pruned.size(); ++k) {
      line.push_back(format_dims(r.pruned[k]));
      line.push_back(std::to_string(r.filters_pruned[k]));
    }
    cells.push_back(std::move(line));
  }
  std::vector<std::size_t> width(header.size());
  for (std::size_t c = 0; c < header.size(); ++c) {
    width[c] = header[c].size();
    for (const auto& line : cells) width[c] = std::max(width[c], line[c].size());
  }
  auto emit = [&](const std::vector<std::string>& line) {
    for (std::size_t c = 0; c < line.size(); ++c) {
      if (c) os << " | ";
      if (c + 1 == line.size()) os << line[c];
      else os << std::left << std::setw(static_cast<int>(width[c])) << line[c];
    }
    os << '\n';
  };
  emit(header);
  std::size_t total = 0;
  for (std::size_t w : width) total += w;
  os << std::string(total + 3 * (width.size() - 1), '-') << '\n';
  for (const auto& line : cells) emit(line);
}

}  // namespace cprune::report
