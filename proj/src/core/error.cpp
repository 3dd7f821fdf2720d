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

#include "longipet/error.hpp"

namespace longipet {

const char* error_kind_name(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kIo: return "io";
    case ErrorKind::kFormat: return "format";
    case ErrorKind::kUnsupported: return "unsupported";
    case ErrorKind::kCorrupt: return "corruption";
    case ErrorKind::kManifest: return "manifest";
    case ErrorKind::kShape: return "shape";
    case ErrorKind::kParameter: return "parameter";
    case ErrorKind::kNormalization: return "normalization";
    case ErrorKind::kState: return "state";
    case ErrorKind::kInput: return "input";
    case ErrorKind::kDivergence: return "divergence";
    case ErrorKind::kPlan: return "plan";
    case ErrorKind::kLeakage: return "leakage";
    case ErrorKind::kDegenerate: return "degenerate";
    case ErrorKind::kContract: return "contract";
    case ErrorKind::kUsage: return "usage";
  }
  return "unknown";
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(error_kind_name(kind)) + " error: " + message),
      kind_(kind) {}

void fail(ErrorKind kind, const std::string& message) { throw Error(kind, message); }

}  // namespace longipet
