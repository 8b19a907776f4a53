// Copyright 2026 The drr Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <cstdint>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace drr {

// 0 means "all hardware threads".
inline unsigned resolve_threads(unsigned requested) {
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? hw : 1;
}

// Runs fn(begin, end) over contiguous blocks of [0, count). Blocks are
// handed out statically, so any per-index work that does not share state
// produces the same result for every thread count. The first exception
// thrown by any block is rethrown on the calling thread after all join.
template <typename Fn>
void parallel_for_blocks(std::int64_t count, unsigned threads, Fn&& fn) {
  if (count <= 0) return;
  const auto workers = static_cast<std::int64_t>(
      std::min<std::int64_t>(resolve_threads(threads), count));
  if (workers <= 1) {
    fn(std::int64_t{0}, count);
    return;
  }
  std::exception_ptr error;
  std::mutex error_mutex;
  auto guarded = [&](std::int64_t begin, std::int64_t end) {
    try {
      fn(begin, end);
    } catch (...) {
      std::lock_guard lock(error_mutex);
      if (!error) error = std::current_exception();
    }
  };
  {
    std::vector<std::jthread> pool;
    pool.reserve(static_cast<std::size_t>(workers - 1));
    const std::int64_t chunk = (count + workers - 1) / workers;
    for (std::int64_t w = 1; w < workers; ++w) {
      const std::int64_t begin = w * chunk;
      const std::int64_t end = std::min(count, begin + chunk);
      if (begin >= end) break;
      pool.emplace_back([&guarded, begin, end] { guarded(begin, end); });
    }
    guarded(std::int64_t{0}, std::min(count, chunk));
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace drr
