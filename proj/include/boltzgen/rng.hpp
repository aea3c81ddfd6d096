// Copyright 2026 The boltzgen Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <random>

namespace boltzgen {

using Engine = std::mt19937_64;

/// splitmix64 finalizer.
std::uint64_t mix64(std::uint64_t x);

/// Derives an independent 64-bit seed for sub-stream `index` of `seed`.
/// `tag` separates unrelated consumers sharing one user seed.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index, std::uint64_t tag = 0);

/// Engine for stream(seed, index). Sample i of every batch owns stream i, so
/// output does not depend on how work is scheduled.
Engine make_stream(std::uint64_t seed, std::uint64_t index, std::uint64_t tag = 0);

// Tags for derive_seed; one per consumer.
namespace stream_tag {
inline constexpr std::uint64_t kUniform = 0x756e69;
inline constexpr std::uint64_t kExact = 0x657861;
inline constexpr std::uint64_t kMcmc = 0x6d636d;
inline constexpr std::uint64_t kSimcim = 0x73696d;
inline constexpr std::uint64_t kThermo = 0x746865;
inline constexpr std::uint64_t kAis = 0x616973;
inline constexpr std::uint64_t kTrain = 0x747261;
inline constexpr std::uint64_t kInit = 0x696e69;
inline constexpr std::uint64_t kShuffle = 0x736875;
inline constexpr std::uint64_t kBench = 0x62656e;
}  // namespace stream_tag

}  // namespace boltzgen
