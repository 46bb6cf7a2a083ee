/*
 * Copyright 2026 The tripinfer Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace tripinfer {

inline unsigned default_threads() {
  return std::max(1U, std::thread::hardware_concurrency());
}

// Runs fn(begin, end) over `threads` contiguous, statically assigned chunks of
// [0, n). Chunk boundaries depend only on (n, threads), so callers that write
// results to per-index slots get output independent of scheduling. The first
// exception thrown by any chunk is rethrown on the calling thread.
template <typename Fn>
void parallel_chunks(std::size_t n, unsigned threads, Fn&& fn) {
  threads = std::max(1U, threads);
  if (threads == 1 || n < 2) {
    fn(std::size_t{0}, n);
    return;
  }
  auto const chunks = std::min<std::size_t>(threads, n);
  std::exception_ptr error;
  std::mutex error_mutex;
  {
    std::vector<std::jthread> workers;
    workers.reserve(chunks);
    for (std::size_t c = 0; c < chunks; ++c) {
      auto const begin = n * c / chunks;
      auto const end = n * (c + 1) / chunks;
      workers.emplace_back([&, begin, end] {
        try {
          fn(begin, end);
        } catch (...) {
          std::lock_guard lock{error_mutex};
          if (!error) {
            error = std::current_exception();
          }
        }
      });
    }
  }
  if (error) {
    std::rethrow_exception(error);
  }
}

template <typename Fn>
void parallel_for(std::size_t n, unsigned threads, Fn&& fn) {
  parallel_chunks(n, threads, [&](std::size_t begin, std::size_t end) {
    for (auto i = begin; i < end; ++i) {
      fn(i);
    }
  });
}

}  // namespace tripinfer
