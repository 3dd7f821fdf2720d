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

#include "longipet/volume_io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>

#include "json.hpp"
#include "longipet/error.hpp"

namespace longipet {

namespace fs = std::filesystem;
using nlohmann::json;

// ---------------------------------------------------------------------------
// Volume3D

std::string to_string(const Dims3& dims) {
  return "(" + std::to_string(dims.nx) + "," + std::to_string(dims.ny) + "," +
         std::to_string(dims.nz) + ")";
}

Affine4 identity_affine() {
  Affine4 a{};
  for (int i = 0; i < 4; ++i) a[i][i] = 1.0;
  return a;
}

Volume3D::Volume3D(Dims3 dims, double fill, Affine4 affine)
    : dims_(dims), data_(dims.voxels(), fill), affine_(affine) {
  check(dims.positive(), ErrorKind::kShape, "volume dims must be positive, got " + to_string(dims));
}

Volume3D::Volume3D(Dims3 dims, std::vector<double> data, Affine4 affine)
    : dims_(dims), data_(std::move(data)), affine_(affine) {
  check(dims.positive(), ErrorKind::kShape, "volume dims must be positive, got " + to_string(dims));
  check(data_.size() == dims.voxels(), ErrorKind::kShape,
        "data length " + std::to_string(data_.size()) + " does not match dims " +
            to_string(dims));
}

double Volume3D::sum() const {
  double s = 0.0;
  for (double v : data_) s += v;
  return s;
}

double Volume3D::min() const {
  return data_.empty() ? 0.0 : *std::min_element(data_.begin(), data_.end());
}

double Volume3D::max() const {
  return data_.empty() ? 0.0 : *std::max_element(data_.begin(), data_.end());
}

bool Volume3D::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

void require_same_dims(const Volume3D& a, const Volume3D& b, const char* what) {
  if (!(a.dims() == b.dims())) {
    fail(ErrorKind::kShape, std::string(what) + ": dims " + to_string(a.dims()) + " vs " +
                                to_string(b.dims()));
  }
}

// ---------------------------------------------------------------------------
// Byte helpers

namespace {

constexpr int kNiftiHeaderSize = 348;
constexpr std::int16_t kDtInt16 = 4;
constexpr std::int16_t kDtFloat32 = 16;
constexpr std::int16_t kDtFloat64 = 64;

std::vector<char> read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::kIo, "cannot open " + path.string());
  in.seekg(0, std::ios::end);
  auto size = static_cast<std::size_t>(in.tellg());
  in.seekg(0, std::ios::beg);
  std::vector<char> bytes(size);
  if (size > 0 && !in.read(bytes.data(), static_cast<std::streamsize>(size))) {
    fail(ErrorKind::kIo, "cannot read " + path.string());
  }
  return bytes;
}

template <typename T>
T load(const char* p, bool swap) {
  std::array<char, sizeof(T)> raw;
  std::memcpy(raw.data(), p, sizeof(T));
  if (swap) std::reverse(raw.begin(), raw.end());
  T v;
  std::memcpy(&v, raw.data(), sizeof(T));
  return v;
}

template <typename T>
void store_le(std::vector<char>& out, std::size_t offset, T v) {
  std::array<char, sizeof(T)> raw;
  std::memcpy(raw.data(), &v, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(raw.begin(), raw.end());
  std::memcpy(out.data() + offset, raw.data(), sizeof(T));
}

constexpr bool kHostBig = std::endian::native == std::endian::big;

struct NiftiHeader {
  Dims3 dims;
  std::int16_t datatype = 0;
  std::size_t vox_offset = 0;
  double slope = 1.0;
  double inter = 0.0;
  Affine4 affine = identity_affine();
  bool swap = false;
};

NiftiHeader parse_nifti_header(const std::vector<char>& bytes, const fs::path& path) {
  if (bytes.size() < kNiftiHeaderSize) {
    fail(ErrorKind::kFormat, path.string() + ": file shorter than a NIfTI-1 header");
  }
  NiftiHeader h;
  const char* p = bytes.data();
  std::int32_t sizeof_hdr = load<std::int32_t>(p, false);
  if (sizeof_hdr != kNiftiHeaderSize) {
    h.swap = true;
    if (load<std::int32_t>(p, true) != kNiftiHeaderSize) {
      fail(ErrorKind::kFormat, path.string() + ": bad sizeof_hdr");
    }
  }
  // The file's byte order is the opposite of host order when swapping.
  if (std::memcmp(p + 344, "n+1\0", 4) != 0) {
    fail(ErrorKind::kFormat, path.string() + ": missing single-file NIfTI-1 magic");
  }
  const bool sw = h.swap;
  std::int16_t dim[8];
  for (int i = 0; i < 8; ++i) dim[i] = load<std::int16_t>(p + 40 + 2 * i, sw);
  if (dim[0] < 3 || dim[0] > 7) fail(ErrorKind::kFormat, path.string() + ": bad dim[0]");
  for (int i = 4; i <= dim[0]; ++i) {
    if (dim[i] > 1) fail(ErrorKind::kUnsupported, path.string() + ": multi-frame NIfTI");
  }
  h.dims = {dim[1], dim[2], dim[3]};
  if (!h.dims.positive()) fail(ErrorKind::kFormat, path.string() + ": non-positive dims");
  h.datatype = load<std::int16_t>(p + 70, sw);
  float vox_offset = load<float>(p + 108, sw);
  if (!(vox_offset >= kNiftiHeaderSize)) {
    fail(ErrorKind::kFormat, path.string() + ": bad vox_offset");
  }
  h.vox_offset = static_cast<std::size_t>(vox_offset);
  float slope = load<float>(p + 112, sw);
  float inter = load<float>(p + 116, sw);
  if (std::isfinite(slope) && slope != 0.0f) {
    h.slope = slope;
    h.inter = std::isfinite(inter) ? inter : 0.0;
  }
  std::int16_t sform_code = load<std::int16_t>(p + 254, sw);
  if (sform_code > 0) {
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 4; ++c) h.affine[r][c] = load<float>(p + 280 + 16 * r + 4 * c, sw);
    }
  } else {
    for (int i = 0; i < 3; ++i) {
      float pd = load<float>(p + 80 + 4 * i, sw);
      h.affine[i][i] = pd > 0.0f ? pd : 1.0;
    }
  }
  return h;
}

std::size_t datatype_bytes(std::int16_t datatype, const fs::path& path) {
  switch (datatype) {
    case kDtInt16: return 2;
    case kDtFloat32: return 4;
    case kDtFloat64: return 8;
    default:
      fail(ErrorKind::kUnsupported,
           path.string() + ": NIfTI datatype " + std::to_string(datatype) + " not supported");
  }
}

Volume3D read_nifti(const fs::path& path) {
  std::vector<char> bytes = read_file(path);
  NiftiHeader h = parse_nifti_header(bytes, path);
  std::size_t width = datatype_bytes(h.datatype, path);
  std::size_t n = h.dims.voxels();
  if (bytes.size() < h.vox_offset || bytes.size() - h.vox_offset != n * width) {
    fail(ErrorKind::kCorrupt, path.string() + ": payload size does not match dims " +
                                  to_string(h.dims));
  }
  std::vector<double> data(n);
  const char* payload = bytes.data() + h.vox_offset;
  for (std::size_t i = 0; i < n; ++i) {
    const char* q = payload + i * width;
    double raw = 0.0;
    switch (h.datatype) {
      case kDtInt16: raw = load<std::int16_t>(q, h.swap); break;
      case kDtFloat32: raw = load<float>(q, h.swap); break;
      default: raw = load<double>(q, h.swap); break;
    }
    data[i] = raw * h.slope + h.inter;
    if (!std::isfinite(data[i])) {
      fail(ErrorKind::kCorrupt, path.string() + ": non-finite voxel value");
    }
  }
  return Volume3D(h.dims, std::move(data), h.affine);
}

struct RawHeader {
  Dims3 dims;
  Affine4 affine = identity_affine();
};

RawHeader read_raw_sidecar(const fs::path& sidecar) {
  std::ifstream in(sidecar);
  if (!in) fail(ErrorKind::kIo, "cannot open sidecar " + sidecar.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    fail(ErrorKind::kFormat, sidecar.string() + ": " + e.what());
  }
  RawHeader h;
  if (!j.is_object() || !j.contains("dims") || !j["dims"].is_array() || j["dims"].size() != 3) {
    fail(ErrorKind::kFormat, sidecar.string() + ": sidecar needs dims:[nx,ny,nz]");
  }
  try {
    h.dims = {j["dims"][0].get<int>(), j["dims"][1].get<int>(), j["dims"][2].get<int>()};
    if (j.contains("affine")) {
      const json& a = j["affine"];
      if (!a.is_array() || a.size() != 4) fail(ErrorKind::kFormat, "affine must be 4x4");
      for (int r = 0; r < 4; ++r) {
        if (!a[r].is_array() || a[r].size() != 4) fail(ErrorKind::kFormat, "affine must be 4x4");
        for (int c = 0; c < 4; ++c) h.affine[r][c] = a[r][c].get<double>();
      }
    }
  } catch (const json::exception& e) {
    fail(ErrorKind::kFormat, sidecar.string() + ": " + e.what());
  }
  if (!h.dims.positive()) fail(ErrorKind::kFormat, sidecar.string() + ": non-positive dims");
  return h;
}

fs::path raw_payload_path(const fs::path& path) {
  if (path.extension() == ".json") {
    fs::path p = path;
    return p.replace_extension(".vol");
  }
  return path;
}

Volume3D read_raw(const fs::path& path) {
  fs::path payload_path = raw_payload_path(path);
  RawHeader h = read_raw_sidecar(raw_sidecar_path(payload_path));
  std::vector<char> bytes = read_file(payload_path);
  std::size_t n = h.dims.voxels();
  if (bytes.size() != n * sizeof(float)) {
    fail(ErrorKind::kCorrupt, payload_path.string() + ": payload has " +
                                  std::to_string(bytes.size()) + " bytes, dims " +
                                  to_string(h.dims) + " need " +
                                  std::to_string(n * sizeof(float)));
  }
  std::vector<double> data(n);
  for (std::size_t i = 0; i < n; ++i) {
    data[i] = load<float>(bytes.data() + 4 * i, kHostBig);
    if (!std::isfinite(data[i])) {
      fail(ErrorKind::kCorrupt, payload_path.string() + ": non-finite voxel value");
    }
  }
  return Volume3D(h.dims, std::move(data), h.affine);
}

void write_bytes(const fs::path& path, const std::vector<char>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::kIo, "cannot open for writing " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) fail(ErrorKind::kIo, "write failed for " + path.string());
}

void write_raw(const Volume3D& vol, const fs::path& path) {
  std::vector<char> bytes(vol.size() * sizeof(float));
  auto data = vol.data();
  for (std::size_t i = 0; i < data.size(); ++i) {
    store_le<float>(bytes, 4 * i, static_cast<float>(data[i]));
  }
  json sidecar;
  sidecar["dims"] = {vol.dims().nx, vol.dims().ny, vol.dims().nz};
  json affine = json::array();
  for (const auto& row : vol.affine()) affine.push_back(json(row));
  sidecar["affine"] = affine;
  write_bytes(path, bytes);
  std::string text = sidecar.dump() + "\n";
  write_bytes(raw_sidecar_path(path), std::vector<char>(text.begin(), text.end()));
}

void write_nifti(const Volume3D& vol, const fs::path& path) {
  constexpr std::size_t kVoxOffset = 352;
  std::vector<char> bytes(kVoxOffset + vol.size() * sizeof(float), 0);
  store_le<std::int32_t>(bytes, 0, kNiftiHeaderSize);
  const Dims3& d = vol.dims();
  const std::int16_t dim[8] = {3, static_cast<std::int16_t>(d.nx), static_cast<std::int16_t>(d.ny),
                               static_cast<std::int16_t>(d.nz), 1, 1, 1, 1};
  for (int i = 0; i < 8; ++i) store_le<std::int16_t>(bytes, 40 + 2 * i, dim[i]);
  store_le<std::int16_t>(bytes, 70, kDtFloat32);
  store_le<std::int16_t>(bytes, 72, 32);
  const Affine4& a = vol.affine();
  store_le<float>(bytes, 76, 1.0f);
  for (int i = 0; i < 3; ++i) {
    double norm = std::sqrt(a[0][i] * a[0][i] + a[1][i] * a[1][i] + a[2][i] * a[2][i]);
    store_le<float>(bytes, 80 + 4 * i, static_cast<float>(norm));
  }
  store_le<float>(bytes, 108, static_cast<float>(kVoxOffset));
  store_le<float>(bytes, 112, 1.0f);
  store_le<float>(bytes, 116, 0.0f);
  store_le<std::int16_t>(bytes, 252, 0);
  store_le<std::int16_t>(bytes, 254, 2);
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 4; ++c) store_le<float>(bytes, 280 + 16 * r + 4 * c, static_cast<float>(a[r][c]));
  }
  std::memcpy(bytes.data() + 344, "n+1\0", 4);
  auto data = vol.data();
  for (std::size_t i = 0; i < data.size(); ++i) {
    store_le<float>(bytes, kVoxOffset + 4 * i, static_cast<float>(data[i]));
  }
  write_bytes(path, bytes);
}

}  // namespace

// ---------------------------------------------------------------------------

VolumeFormat format_for_path(const fs::path& path) {
  return path.extension() == ".nii" ? VolumeFormat::kNifti : VolumeFormat::kRaw;
}

fs::path raw_sidecar_path(const fs::path& vol_path) {
  fs::path p = vol_path;
  return p.replace_extension(".json");
}

Volume3D read_volume(const fs::path& path) {
  if (!fs::exists(path)) fail(ErrorKind::kIo, "no such file " + path.string());
  return format_for_path(path) == VolumeFormat::kNifti ? read_nifti(path) : read_raw(path);
}

Dims3 probe_volume(const fs::path& path) {
  if (!fs::exists(path)) fail(ErrorKind::kIo, "no such file " + path.string());
  if (format_for_path(path) == VolumeFormat::kNifti) {
    std::vector<char> head(kNiftiHeaderSize);
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorKind::kIo, "cannot open " + path.string());
    in.read(head.data(), kNiftiHeaderSize);
    head.resize(static_cast<std::size_t>(in.gcount()));
    NiftiHeader h = parse_nifti_header(head, path);
    std::size_t need = h.vox_offset + h.dims.voxels() * datatype_bytes(h.datatype, path);
    if (fs::file_size(path) != need) {
      fail(ErrorKind::kCorrupt, path.string() + ": payload size does not match dims");
    }
    return h.dims;
  }
  fs::path payload = raw_payload_path(path);
  RawHeader h = read_raw_sidecar(raw_sidecar_path(payload));
  if (!fs::exists(payload)) fail(ErrorKind::kIo, "no such file " + payload.string());
  if (fs::file_size(payload) != h.dims.voxels() * sizeof(float)) {
    fail(ErrorKind::kCorrupt, payload.string() + ": payload size does not match dims");
  }
  return h.dims;
}

void write_volume(const Volume3D& vol, const fs::path& path, VolumeFormat format) {
  check(vol.all_finite(), ErrorKind::kContract, "refusing to write non-finite volume");
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
  }
  if (format == VolumeFormat::kNifti) {
    write_nifti(vol, path);
  } else {
    write_raw(vol, path);
  }
}

void write_volume(const Volume3D& vol, const fs::path& path) {
  write_volume(vol, path, format_for_path(path));
}

Volume3D pad_to_even(const Volume3D& vol) {
  const Dims3& d = vol.dims();
  Dims3 padded{d.nx + (d.nx % 2), d.ny + (d.ny % 2), d.nz + (d.nz % 2)};
  if (padded == d) return vol;
  Volume3D out(padded, 0.0, vol.affine());
  for (int z = 0; z < d.nz; ++z) {
    for (int y = 0; y < d.ny; ++y) {
      for (int x = 0; x < d.nx; ++x) out.at(x, y, z) = vol.at(x, y, z);
    }
  }
  return out;
}

}  // namespace longipet
