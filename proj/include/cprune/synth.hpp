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

// Seeded synthetic networks: desk-scale stand-ins for MobileNet- and
// SqueezeNet-style detection backbones, each ending in global average pooling
// and a pointwise classifier.

#ifndef CPRUNE_SYNTH_HPP_
#define CPRUNE_SYNTH_HPP_

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cprune/nnir.hpp"
#include "cprune/random.hpp"

namespace cprune::nnir {

enum class Family { kMobilenetLike, kSqueezenetLike, kPlainChain };

std::string_view to_string(Family family);
Family family_from_string(std::string_view name);

struct TopologySpec {
  Family family = Family::kMobilenetLike;
  int depth = 4;
  int base_channels = 16;
  std::uint64_t seed = 0;
  int input_channels = 3;
  int input_size = 16;
  int num_classes = 16;
};

// Deterministic for a fixed spec. Weights and biases are uniform in
// [-0.5, 0.5]; depthwise layers carry no bias.
//
//   mobilenet_like:  conv0 (pointwise), then `depth` blocks of
//                    conv<i>/dw (3x3 depthwise) -> conv<i> (pointwise).
//                    Width of block i is base * 2^floor(i/2), capped at 8x.
//   squeezenet_like: conv1 (3x3, stride 2), then `depth` fire blocks
//                    fire<i>/{squeeze1x1, expand1x1, expand3x3, concat}.
//   plain_chain:     conv1..conv<depth> (3x3, pad 1), `base` filters each.
//
// Throws ConfigError for non-positive fields.
Network synth_model(const TopologySpec& spec);

// MobileNet-style backbone with explicit pointwise widths: widths[0] is
// conv0 (a 3x3 standard conv, stride 2) and widths[i] is the pointwise conv<i>
// preceded by conv<i>/dw. Depthwise layers at blocks 2, 4, 6 and 12 use
// stride 2 while the spatial extent allows.
Network mobilenet_from_widths(std::span<const int> widths, ActivationDims input,
                              std::uint64_t seed, int num_classes = 16);

// Incremental builder that tracks channel counts and draws weights from one
// seeded stream in creation order.
class NetworkBuilder {
 public:
  NetworkBuilder(ActivationDims input, std::uint64_t seed, std::string input_id = "input");

  const std::string& input() const { return input_id_; }
  int channels(const std::string& id) const { return dims_.at(id).c; }

  std::string conv(std::string id, LayerKind kind, const std::string& pred, int c_out,
                   int kernel = 1, int stride = 1, int padding = 0, bool bias = true);
  std::string relu(std::string id, const std::string& pred);
  std::string pool(std::string id, LayerKind kind, const std::string& pred, int kernel,
                   int stride, int padding = 0);
  std::string global_pool(std::string id, const std::string& pred);
  std::string concat(std::string id, const std::vector<std::string>& preds);

  Network finish(std::string output_id, const std::string& pred) &&;

 private:
  Network net_;
  std::string input_id_;
  std::map<std::string, ActivationDims> dims_;
  Rng rng_;
};

}  // namespace cprune::nnir

#endif  // CPRUNE_SYNTH_HPP_
