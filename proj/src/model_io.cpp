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

#include "cprune/model_io.hpp"

#include <zlib.h>

#include <bit>
#include <cstring>
#include <string>

#include "cprune/error.hpp"
#include "cprune/file_util.hpp"
#include "json.hpp"

namespace cprune::nnir {

namespace {

using json = nlohmann::json;
using Kind = FormatError::Kind;

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint64_t get_u64(const std::uint8_t* p) {
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | p[i];
  return v;
}

std::uint32_t get_u32(const std::uint8_t* p) {
  std::uint32_t v = 0;
  for (int i = 3; i >= 0; --i) v = (v << 8) | p[i];
  return v;
}

void put_floats(std::vector<std::uint8_t>& blob, const std::vector<float>& values) {
  for (float f : values) put_u32(blob, std::bit_cast<std::uint32_t>(f));
}

std::vector<float> get_floats(std::span<const std::uint8_t> blob, std::uint64_t offset,
                              std::uint64_t count, const std::string& what) {
  if (offset > blob.size() || count > (blob.size() - offset) / 4) {
    throw FormatError(Kind::kTruncated, what + " extends past the end of the weight blob");
  }
  std::vector<float> out(count);
  const std::uint8_t* p = blob.data() + offset;
  for (std::uint64_t i = 0; i < count; ++i) out[i] = std::bit_cast<float>(get_u32(p + 4 * i));
  return out;
}

std::uint32_t crc_of(std::span<const std::uint8_t> blob) {
  uLong crc = crc32(0L, Z_NULL, 0);
  // zlib takes uInt lengths; feed in chunks.
  std::size_t done = 0;
  while (done < blob.size()) {
    const std::size_t n = std::min<std::size_t>(blob.size() - done, 1u << 30);
    crc = crc32(crc, blob.data() + done, static_cast<uInt>(n));
    done += n;
  }
  return static_cast<std::uint32_t>(crc);
}

template <typename T>
T field(const json& j, const char* key, const std::string& ctx) {
  if (!j.contains(key)) throw FormatError(Kind::kManifest, ctx + " is missing '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw FormatError(Kind::kManifest, ctx + " field '" + key + "': " + e.what());
  }
}

}  // namespace

std::vector<std::uint8_t> serialize_model(const Network& network) {
  if (auto v = validate(network); !v.empty())
    throw ShapeError("cannot serialize invalid network: " + v.front().message);

  std::vector<std::uint8_t> blob;
  json nodes = json::array();
  for (const auto& n : network.nodes) {
    json jn;
    jn["id"] = n.id;
    jn["kind"] = std::string(to_string(n.spec.kind));
    jn["kernel"] = {n.spec.kernel_h, n.spec.kernel_w};
    jn["stride"] = n.spec.stride;
    jn["padding"] = n.spec.padding;
    jn["has_bias"] = n.spec.has_bias;
    jn["global_pool"] = n.spec.global_pool;
    jn["predecessors"] = n.predecessors;
    if (n.weights) {
      const WeightDims& d = n.weights->dims;
      jn["weights"] = {{"dims", {d.c_out, d.c_in, d.kh, d.kw}},
                       {"offset", blob.size()},
                       {"count", n.weights->values.size()}};
      put_floats(blob, n.weights->values);
    }
    if (n.spec.has_bias) {
      jn["bias"] = {{"offset", blob.size()}, {"count", n.bias.size()}};
      put_floats(blob, n.bias);
    }
    nodes.push_back(std::move(jn));
  }
  json manifest;
  manifest["format_version"] = kModelFormatVersion;
  manifest["input_dims"] = {network.input_dims.c, network.input_dims.h, network.input_dims.w};
  manifest["entry"] = network.entry;
  manifest["exit"] = network.exit;
  manifest["blob_bytes"] = blob.size();
  manifest["nodes"] = std::move(nodes);
  const std::string text = manifest.dump();

  std::vector<std::uint8_t> out;
  out.reserve(kModelMagic.size() + 8 + text.size() + blob.size() + 4);
  out.insert(out.end(), kModelMagic.begin(), kModelMagic.end());
  put_u64(out, text.size());
  out.insert(out.end(), text.begin(), text.end());
  out.insert(out.end(), blob.begin(), blob.end());
  put_u32(out, crc_of(blob));
  return out;
}

Network parse_model(std::span<const std::uint8_t> bytes) {
  const std::size_t magic = kModelMagic.size();
  if (bytes.size() < magic ||
      std::memcmp(bytes.data(), kModelMagic.data(), magic) != 0) {
    throw FormatError(Kind::kHeader, "missing CPRUNE01 magic");
  }
  if (bytes.size() < magic + 8) throw FormatError(Kind::kHeader, "truncated header");
  const std::uint64_t manifest_len = get_u64(bytes.data() + magic);
  const std::size_t body = magic + 8;
  if (manifest_len > bytes.size() - body)
    throw FormatError(Kind::kTruncated, "manifest extends past end of file");

  json manifest;
  try {
    manifest = json::parse(bytes.begin() + static_cast<std::ptrdiff_t>(body),
                           bytes.begin() + static_cast<std::ptrdiff_t>(body + manifest_len));
  } catch (const json::exception& e) {
    throw FormatError(Kind::kManifest, std::string("manifest is not valid JSON: ") + e.what());
  }
  const int version = field<int>(manifest, "format_version", "manifest");
  if (version != kModelFormatVersion) {
    throw FormatError(Kind::kVersion, "unsupported format version " + std::to_string(version) +
                                          " (expected " +
                                          std::to_string(kModelFormatVersion) + ")");
  }
  const auto blob_bytes = field<std::uint64_t>(manifest, "blob_bytes", "manifest");
  const std::size_t blob_at = body + manifest_len;
  const std::size_t rest = bytes.size() - blob_at;
  if (rest < 4 || blob_bytes > rest - 4)
    throw FormatError(Kind::kTruncated, "weight blob is shorter than the manifest declares");
  if (blob_bytes != rest - 4)
    throw FormatError(Kind::kTruncated, "trailing bytes after the weight blob checksum");
  const auto blob = bytes.subspan(blob_at, blob_bytes);
  if (crc_of(blob) != get_u32(bytes.data() + blob_at + blob_bytes))
    throw FormatError(Kind::kChecksum, "weight blob checksum mismatch");

  Network net;
  const auto dims = field<std::vector<int>>(manifest, "input_dims", "manifest");
  if (dims.size() != 3) throw FormatError(Kind::kManifest, "input_dims must have 3 entries");
  net.input_dims = {dims[0], dims[1], dims[2]};
  net.entry = field<std::string>(manifest, "entry", "manifest");
  net.exit = field<std::string>(manifest, "exit", "manifest");
  const json& nodes = manifest.contains("nodes") ? manifest["nodes"] : json();
  if (!nodes.is_array()) throw FormatError(Kind::kManifest, "manifest 'nodes' must be an array");
  for (const json& jn : nodes) {
    Node n;
    n.id = field<std::string>(jn, "id", "node");
    const std::string ctx = "node '" + n.id + "'";
    try {
      n.spec.kind = layer_kind_from_string(field<std::string>(jn, "kind", ctx));
    } catch (const ConfigError& e) {
      throw FormatError(Kind::kManifest, ctx + ": " + e.what());
    }
    const auto kernel = field<std::vector<int>>(jn, "kernel", ctx);
    if (kernel.size() != 2) throw FormatError(Kind::kManifest, ctx + " kernel must have 2 entries");
    n.spec.kernel_h = kernel[0];
    n.spec.kernel_w = kernel[1];
    n.spec.stride = field<int>(jn, "stride", ctx);
    n.spec.padding = field<int>(jn, "padding", ctx);
    n.spec.has_bias = field<bool>(jn, "has_bias", ctx);
    n.spec.global_pool = field<bool>(jn, "global_pool", ctx);
    n.predecessors = field<std::vector<std::string>>(jn, "predecessors", ctx);
    if (jn.contains("weights")) {
      const json& jw = jn["weights"];
      const auto wd = field<std::vector<int>>(jw, "dims", ctx + " weights");
      if (wd.size() != 4) throw FormatError(Kind::kManifest, ctx + " weight dims must have 4 entries");
      Tensor4 t{{wd[0], wd[1], wd[2], wd[3]}, {}};
      t.values = get_floats(blob, field<std::uint64_t>(jw, "offset", ctx),
                            field<std::uint64_t>(jw, "count", ctx), ctx + " weights");
      n.weights = std::move(t);
    }
    if (jn.contains("bias")) {
      const json& jb = jn["bias"];
      n.bias = get_floats(blob, field<std::uint64_t>(jb, "offset", ctx),
                          field<std::uint64_t>(jb, "count", ctx), ctx + " bias");
    }
    net.nodes.push_back(std::move(n));
  }
  if (auto v = validate(net); !v.empty())
    throw FormatError(Kind::kManifest, "decoded network is invalid: " + v.front().message);
  return net;
}

void save_model(const Network& network, const std::filesystem::path& path) {
  const auto bytes = serialize_model(network);
  write_file_atomic(path, std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
}

Network load_model(const std::filesystem::path& path) {
  const std::string data = read_file(path);
  return parse_model(std::span<const std::uint8_t>(
      reinterpret_cast<const std::uint8_t*>(data.data()), data.size()));
}

}  // namespace cprune::nnir
