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

#include <cstring>
#include <filesystem>
#include <random>

#include "cprune/error.hpp"
#include "cprune/model_io.hpp"
#include "cprune/synth.hpp"
#include "doctest.h"
#include "nlohmann/json.hpp"

using namespace cprune;
using namespace cprune::nnir;

namespace {

using Bytes = std::vector<std::uint8_t>;

FormatError::Kind parse_error_kind(const Bytes& b) {
  try {
    parse_model(b);
  } catch (const FormatError& e) {
    return e.kind();
  }
  FAIL("parse succeeded");
  return FormatError::Kind::kHeader;
}

std::uint64_t manifest_len(const Bytes& b) {
  std::uint64_t m = 0;
  for (int i = 7; i >= 0; --i) m = (m << 8) | b[8 + i];
  return m;
}

// Replaces the manifest and fixes the length prefix.
Bytes with_manifest(const Bytes& b, const std::string& manifest) {
  const std::uint64_t old = manifest_len(b);
  Bytes out(b.begin(), b.begin() + 8);
  std::uint64_t m = manifest.size();
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(m >> (8 * i)));
  out.insert(out.end(), manifest.begin(), manifest.end());
  out.insert(out.end(), b.begin() + 16 + static_cast<std::ptrdiff_t>(old), b.end());
  return out;
}

nlohmann::json manifest_of(const Bytes& b) {
  const auto m = manifest_len(b);
  return nlohmann::json::parse(std::string(b.begin() + 16, b.begin() + 16 + static_cast<std::ptrdiff_t>(m)));
}

}  // namespace

TEST_CASE("header layout") {
  const Bytes b = serialize_model(synth_model({Family::kPlainChain, 2, 4, 0}));
  CHECK(std::memcmp(b.data(), "CPRUNE01", 8) == 0);
  const auto j = manifest_of(b);
  CHECK(j.at("format_version") == 1);
  const std::size_t blob = j.at("blob_bytes").get<std::size_t>();
  CHECK(b.size() == 16 + manifest_len(b) + blob + 4);
}

TEST_CASE("round trip is the identity") {
  for (auto family : {Family::kMobilenetLike, Family::kSqueezenetLike, Family::kPlainChain}) {
    for (std::uint64_t seed = 0; seed < 1000; ++seed) {
      Rng rng(splitmix64(seed + 99));
      std::uniform_int_distribution<int> depth(1, 3), base(1, 8), size(3, 10);
      const Network n = synth_model({family, depth(rng), base(rng), seed, 3, size(rng), 5});
      const Bytes b = serialize_model(n);
      const Network back = parse_model(b);
      if (!(back == n)) FAIL(to_string(family) << " seed " << seed << " did not round trip");
      CHECK(serialize_model(back) == b);
    }
  }
}

TEST_CASE("weights are bit identical") {
  Network n = synth_model({Family::kPlainChain, 1, 2, 0});
  auto& w = n.node("conv1").weights->values;
  w[0] = std::numeric_limits<float>::denorm_min();
  w[1] = -0.0f;
  w[2] = std::nextafter(0.25f, 1.0f);
  const Network back = parse_model(serialize_model(n));
  const auto& v = back.node("conv1").weights->values;
  for (std::size_t i = 0; i < w.size(); ++i) {
    std::uint32_t a, c;
    std::memcpy(&a, &w[i], 4);
    std::memcpy(&c, &v[i], 4);
    CHECK(a == c);
  }
}

TEST_CASE("malformed inputs") {
  const Bytes good = serialize_model(synth_model({Family::kMobilenetLike, 1, 4, 0}));
  SUBCASE("empty") { CHECK(parse_error_kind({}) == FormatError::Kind::kHeader); }
  SUBCASE("bad magic") {
    Bytes b = good;
    b[0] = 'X';
    CHECK(parse_error_kind(b) == FormatError::Kind::kHeader);
  }
  SUBCASE("checksum") {
    Bytes b = good;
    b[b.size() - 10] ^= 0x01;
    CHECK(parse_error_kind(b) == FormatError::Kind::kChecksum);
  }
  SUBCASE("cut blob") {
    Bytes b(good.begin(), good.end() - 9);
    CHECK(parse_error_kind(b) == FormatError::Kind::kTruncated);
  }
  SUBCASE("manifest length past the end") {
    Bytes b = good;
    b[15] = 0x7f;
    CHECK(parse_error_kind(b) == FormatError::Kind::kTruncated);
  }
  SUBCASE("weight count past the blob") {
    auto j = manifest_of(good);
    for (auto& node : j.at("nodes")) {
      if (node.contains("weights")) {
        node["weights"]["count"] = node["weights"]["count"].get<std::size_t>() + 1000000;
        break;
      }
    }
    CHECK(parse_error_kind(with_manifest(good, j.dump())) == FormatError::Kind::kTruncated);
  }
  SUBCASE("version") {
    auto j = manifest_of(good);
    j["format_version"] = 2;
    CHECK(parse_error_kind(with_manifest(good, j.dump())) == FormatError::Kind::kVersion);
  }
  SUBCASE("manifest is not json") {
    CHECK(parse_error_kind(with_manifest(good, "{nope")) == FormatError::Kind::kManifest);
  }
  SUBCASE("manifest decodes to an invalid network") {
    auto j = manifest_of(good);
    j["nodes"][1]["predecessors"] = {"ghost"};
    CHECK(parse_error_kind(with_manifest(good, j.dump())) == FormatError::Kind::kManifest);
  }
}

TEST_CASE("invalid networks are not serialized") {
  Network n = synth_model({Family::kPlainChain, 2, 4, 0});
  n.node("conv2").predecessors = {"ghost"};
  CHECK_THROWS_AS(serialize_model(n), ShapeError);
}

TEST_CASE("save and load through the filesystem") {
  const auto dir = std::filesystem::temp_directory_path() / "cprune_model_io_test";
  std::filesystem::create_directories(dir);
  const auto path = dir / "m.cpm";
  const Network n = synth_model({Family::kSqueezenetLike, 2, 4, 5});
  save_model(n, path);
  CHECK(load_model(path) == n);
  CHECK_FALSE(std::filesystem::exists(path.string() + ".tmp"));
  std::filesystem::remove_all(dir);
}
