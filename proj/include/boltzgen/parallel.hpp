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

#include <cstddef>
#include <functional>

namespace boltzgen {

/// Caps the number of worker threads used by library routines. 0 selects
/// std::thread::hardware_concurrency(). Results never depend on this value.
void set_thread_count(std::size_t threads);
std::size_t thread_count();

/// Runs body(begin, end) over consecutive chunks of [0, count) of at most
/// `chunk` items. Chunks are claimed dynamically by up to thread_count()
/// threads; callers must only write state owned by their chunk. The first
/// exception thrown by any chunk is rethrown on the calling thread.
void parallel_chunks(std::size_t count, std::size_t chunk,
                     const std::function<void(std::size_t, std::size_t)>& body);

}  // namespace boltzgen
