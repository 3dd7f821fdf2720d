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

#ifndef LONGIPET_ERROR_HPP_
#define LONGIPET_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace longipet {

// Error categories. Each maps 1:1 onto an lp_status code of the C API and a
// process exit code of the command-line tool.
enum class ErrorKind {
  kIo,
  kFormat,
  kUnsupported,
  kCorrupt,
  kManifest,
  kShape,
  kParameter,
  kNormalization,
  kState,
  kInput,
  kDivergence,
  kPlan,
  kLeakage,
  kDegenerate,
  kContract,
  kUsage,
};

const char* error_kind_name(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message);
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& message);

inline void check(bool condition, ErrorKind kind, const std::string& message) {
  if (!condition) fail(kind, message);
}

}  // namespace longipet

#endif  // LONGIPET_ERROR_HPP_
