/* Copyright 2026 The LongiPET Authors. All Rights Reserved.

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

#include "longipet/param_io.hpp"

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "longipet/error.hpp"

namespace longipet::ad {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr char kMagic[8] = {'L', 'P', 'P', 'A', 'R', 'A', 'M', 'S'};

void append_le_u32(std::vector<char>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
}

void append_floats(std::vector<char>& blob, const std::vector<double>& values) {
  for (double d : values) {
    std::uint32_t bits = std::bit_cast<std::uint32_t>(static_cast<float>(d));
    append_le_u32(blob, bits);
  }
}

std::vector<double> read_floats(const std::vector<char>& bytes, std::size_t blob_start,
                                std::size_t blob_bytes, const json& entry, const char* offset_key) {
  std::size_t offset = 0, count = 0;
  try {
    offset = entry.at(offset_key).get<std::size_t>();
    count = entry.at("count").get<std::size_t>();
  } catch (const json::exception& e) {
    fail(ErrorKind::kFormat, std::string("parameter index entry: ") + e.what());
  }
  if (offset % 4 != 0 || offset > blob_bytes || count > (blob_bytes - offset) / 4) {
    fail(ErrorKind::kFormat, "parameter entry points outside the blob");
  }
  std::vector<double> values(count);
  for (std::size_t i = 0; i < count; ++i) {
    const auto* p = reinterpret_cast<const unsigned char*>(bytes.data() + blob_start + offset + 4 * i);
    std::uint32_t bits = static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
                         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
    values[i] = std::bit_cast<float>(bits);
  }
  return values;
}

}  // namespace

std::vector<char> encode_parameters(const ParameterSet& params, const json& metadata) {
  std::vector<char> blob;
  json tensors = json::array();
  for (const auto& [name, t] : params.learnable) {
    auto v = t.values();
    tensors.push_back({{"name", name}, {"kind", "learnable"}, {"shape", t.shape()},
                       {"offset", blob.size()}, {"count", v.size()}});
    append_floats(blob, std::vector<double>(v.begin(), v.end()));
  }
  json running = json::array();
  for (const auto& [name, s] : params.running) {
    json entry = {{"name", name}, {"initialized", s.initialized}, {"count", s.mean.size()},
                  {"mean_offset", blob.size()}};
    append_floats(blob, s.mean);
    entry["var_offset"] = blob.size();
    append_floats(blob, s.var);
    running.push_back(entry);
  }
  json index = {{"format", kParamFormatTag}, {"version", kParamFormatVersion}, {"metadata", metadata},
                {"tensors", tensors}, {"running", running}, {"blob_bytes", blob.size()}};
  std::string text = index.dump();
  std::vector<char> out(kMagic, kMagic + 8);
  append_le_u32(out, static_cast<std::uint32_t>(text.size()));
  out.insert(out.end(), text.begin(), text.end());
  out.insert(out.end(), blob.begin(), blob.end());
  return out;
}

DecodedParameters decode_parameters(const std::vector<char>& bytes) {
  if (bytes.size() < 12 || std::memcmp(bytes.data(), kMagic, 8) != 0) {
    fail(ErrorKind::kFormat, "not a parameter file (bad magic)");
  }
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data() + 8);
  const std::size_t index_len = static_cast<std::size_t>(p[0]) | (static_cast<std::size_t>(p[1]) << 8) |
                                (static_cast<std::size_t>(p[2]) << 16) | (static_cast<std::size_t>(p[3]) << 24);
  if (index_len > bytes.size() - 12) fail(ErrorKind::kFormat, "parameter index truncated");
  json index;
  try {
    index = json::parse(bytes.begin() + 12, bytes.begin() + 12 + static_cast<std::ptrdiff_t>(index_len));
  } catch (const json::exception& e) {
    fail(ErrorKind::kFormat, std::string("parameter index: ") + e.what());
  }
  if (!index.is_object() || index.value("format", "") != kParamFormatTag) {
    fail(ErrorKind::kFormat, "parameter file format tag mismatch");
  }
  if (!index.contains("version") || !index["version"].is_number_integer() ||
      index["version"].get<int>() != kParamFormatVersion) {
    fail(ErrorKind::kFormat, "unsupported parameter file version " +
                                 (index.contains("version") ? index["version"].dump() : std::string("<none>")));
  }
  const std::size_t blob_start = 12 + index_len;
  const std::size_t blob_bytes = bytes.size() - blob_start;
  if (!index.contains("blob_bytes") || index["blob_bytes"].get<std::size_t>() != blob_bytes) {
    fail(ErrorKind::kFormat, "parameter blob length " + std::to_string(blob_bytes) +
                                 " does not match the index");
  }
  DecodedParameters out;
  out.metadata = index.value("metadata", json::object());
  try {
    for (const json& e : index.at("tensors")) {
      Shape shape = e.at("shape").get<Shape>();
      std::vector<double> values = read_floats(bytes, blob_start, blob_bytes, e, "offset");
      if (values.size() != shape_size(shape)) fail(ErrorKind::kFormat, "tensor count does not match shape");
      out.params.learnable.emplace(e.at("name").get<std::string>(),
                                   Tensor::from(std::move(shape), std::move(values), true));
    }
    for (const json& e : index.at("running")) {
      BatchNormStats s;
      s.initialized = e.at("initialized").get<bool>();
      s.mean = read_floats(bytes, blob_start, blob_bytes, e, "mean_offset");
      s.var = read_floats(bytes, blob_start, blob_bytes, e, "var_offset");
      out.params.running.emplace(e.at("name").get<std::string>(), std::move(s));
    }
  } catch (const json::exception& e) {
    fail(ErrorKind::kFormat, std::string("parameter index: ") + e.what());
  }
  return out;
}

void save_parameters(const ParameterSet& params, const json& metadata, const fs::path& path) {
  std::vector<char> bytes = encode_parameters(params, metadata);
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::kIo, "cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) fail(ErrorKind::kIo, "write failed for " + path.string());
}

DecodedParameters load_parameters(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::kIo, "cannot open model file " + path.string());
  std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_parameters(bytes);
}

}  // namespace longipet::ad
