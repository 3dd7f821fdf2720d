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

#ifndef LONGIPET_PARAM_IO_HPP_
#define LONGIPET_PARAM_IO_HPP_

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "longipet/optim.hpp"

namespace longipet::ad {

// Named-tensor container:
//   8 bytes   magic "LPPARAMS"
//   4 bytes   little-endian uint32 length L of the JSON index
//   L bytes   JSON index {"format","version","metadata","tensors":[...],"blob_bytes"}
//   rest      little-endian float32 blob; each tensor entry names its offset/count
inline constexpr int kParamFormatVersion = 1;
inline constexpr const char* kParamFormatTag = "longipet-params";

std::vector<char> encode_parameters(const ParameterSet& params, const nlohmann::json& metadata);

struct DecodedParameters {
  ParameterSet params;
  nlohmann::json metadata;
};

// Format error on bad magic, unknown tag/version, or any blob length mismatch.
DecodedParameters decode_parameters(const std::vector<char>& bytes);

void save_parameters(const ParameterSet& params, const nlohmann::json& metadata,
                     const std::filesystem::path& path);
DecodedParameters load_parameters(const std::filesystem::path& path);

}  // namespace longipet::ad

#endif  // LONGIPET_PARAM_IO_HPP_
