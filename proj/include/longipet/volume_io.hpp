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

#ifndef LONGIPET_VOLUME_IO_HPP_
#define LONGIPET_VOLUME_IO_HPP_

#include <filesystem>

#include "longipet/volume.hpp"

namespace longipet {

// Raw: `<name>.vol` little-endian float32 payload plus `<name>.json` sidecar
// {"dims":[nx,ny,nz],"affine":[[4x4]]}. Nifti: single-file NIfTI-1 (.nii).
enum class VolumeFormat { kRaw, kNifti };

// Picks the format from the extension: ".nii" is NIfTI-1, everything else raw.
VolumeFormat format_for_path(const std::filesystem::path& path);

// Reads either format. NIfTI-1 accepts int16, float32 and float64 payloads in
// either byte order and applies scl_slope/scl_inter (slope 0 means unscaled).
// The affine comes from the sform when sform_code > 0, otherwise from pixdim.
Volume3D read_volume(const std::filesystem::path& path);

// Header-only check: returns dims after validating the header and payload size.
Dims3 probe_volume(const std::filesystem::path& path);

// Values are rounded to float32. For raw output `path` names the .vol file; the
// sidecar is written next to it.
void write_volume(const Volume3D& vol, const std::filesystem::path& path, VolumeFormat format);
void write_volume(const Volume3D& vol, const std::filesystem::path& path);

std::filesystem::path raw_sidecar_path(const std::filesystem::path& vol_path);

// Appends one zero plane at the high-index end of every odd axis.
Volume3D pad_to_even(const Volume3D& vol);

}  // namespace longipet

#endif  // LONGIPET_VOLUME_IO_HPP_
