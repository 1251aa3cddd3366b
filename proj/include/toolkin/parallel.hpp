// Copyright 2026 The Toolkin Authors
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

// Thin OpenMP wrapper. Work items must be independent; results are written to
// per-item slots so output never depends on the thread count.

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>

namespace toolkin {

/// Number of worker threads in use. Honors TOOLKIN_THREADS when set,
/// otherwise the machine's core count.
int thread_count();

/// Overrides the worker count for the rest of the process (1 = serial).
void set_thread_count(int n);

/// Runs fn(i) for i in [0, n) across the worker pool, static schedule.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

/// splitmix64 step; used to derive independent per-worker seeds.
std::uint64_t splitmix64(std::uint64_t& state);

/// Seed for stream `index` derived from a master seed.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

}  // namespace toolkin
