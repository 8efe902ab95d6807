// Copyright 2026 flow4d contributors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

#include "flow4d/grid.hpp"

namespace flow4d {

/// Runs fn(begin, end) over a fixed-size chunking of [0, n). Workers pull
/// chunk indices from a shared counter; every chunk's work depends only on
/// its own range, so results are identical for any thread count.
template <typename Fn>
void parallelChunks(Index n, Index chunk_size, int threads, Fn&& fn) {
  if (n <= 0) return;
  if (chunk_size < 1) chunk_size = 1;
  const Index n_chunks = (n + chunk_size - 1) / chunk_size;
  if (threads <= 1 || n_chunks == 1) {
    for (Index c = 0; c < n_chunks; ++c) {
      const Index begin = c * chunk_size;
      fn(begin, std::min(begin + chunk_size, n));
    }
    return;
  }

  std::atomic<Index> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  auto worker = [&]() {
    try {
      for (;;) {
        const Index c = next.fetch_add(1, std::memory_order_relaxed);
        if (c >= n_chunks) return;
        const Index begin = c * chunk_size;
        fn(begin, std::min(begin + chunk_size, n));
      }
    } catch (...) {
      std::lock_guard<std::mutex> lock(error_mutex);
      if (!first_error) first_error = std::current_exception();
    }
  };

  std::vector<std::thread> pool;
  const int n_workers = int(std::min<Index>(threads, n_chunks));
  pool.reserve(size_t(n_workers));
  for (int i = 0; i < n_workers; ++i) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace flow4d
