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

#ifndef LONGIPET_PARALLEL_HPP_
#define LONGIPET_PARALLEL_HPP_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <string_view>

namespace longipet {

// Worker cap: LONGIPET_THREADS if set and positive, else hardware concurrency.
int max_threads();

// Runs body(i) for i in [0, n) on up to max_threads() workers. Each index is
// processed by exactly one worker, so results written per index are schedule
// independent. The first exception thrown by any body is rethrown here.
// Nested calls from inside a worker run serially.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

// Stable 64-bit hash (FNV-1a) used to derive per-subject random streams.
std::uint64_t stable_hash(std::string_view text, std::uint64_t seed = 0);

// Deterministic sub-stream seed from a master seed and labelled indices.
std::uint64_t derive_seed(std::uint64_t master, std::string_view label,
                          std::uint64_t a = 0, std::uint64_t b = 0);

using Rng = std::mt19937_64;

}  // namespace longipet

#endif  // LONGIPET_PARALLEL_HPP_
