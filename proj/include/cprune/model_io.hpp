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

// Model file format, version 1 (all integers little-endian):
//
//   offset 0   8 bytes   magic "CPRUNE01"
//   offset 8   u64       manifest length M in bytes
//   offset 16  M bytes   UTF-8 JSON manifest (keys sorted, compact)
//   16+M       B bytes   weight blob: IEEE-754 binary32 values, little-endian
//   16+M+B     u32       CRC-32 (zlib polynomial) of the weight blob
//
// The manifest carries "format_version", "input_dims" [c,h,w], "entry",
// "exit", "blob_bytes" (B) and "nodes", an ordered array of
//   {"id", "kind", "kernel": [kh,kw], "stride", "padding", "has_bias",
//    "global_pool", "predecessors": [...],
//    "weights": {"dims": [c_out,c_in,kh,kw], "offset": byte, "count": n},
//    "bias": {"offset": byte, "count": n}}
// with "weights"/"bias" present only on conv nodes. Offsets are relative to
// the start of the blob. See docs/model_format.md.

#ifndef CPRUNE_MODEL_IO_HPP_
#define CPRUNE_MODEL_IO_HPP_

#include <cstdint>
#include <filesystem>
#include <span>
#include <string_view>
#include <vector>

#include "cprune/nnir.hpp"

namespace cprune::nnir {

inline constexpr std::string_view kModelMagic = "CPRUNE01";
inline constexpr int kModelFormatVersion = 1;

// Throws ShapeError when the network does not validate.
std::vector<std::uint8_t> serialize_model(const Network& network);

// Throws FormatError (header, version, truncated, checksum or manifest).
Network parse_model(std::span<const std::uint8_t> bytes);

void save_model(const Network& network, const std::filesystem::path& path);
Network load_model(const std::filesystem::path& path);

}  // namespace cprune::nnir

#endif  // CPRUNE_MODEL_IO_HPP_
