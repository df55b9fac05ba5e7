// Copyright 2026 The HLP Authors
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

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace hlp {

// A contiguous slice [begin, end) of a row range, tagged with its position so
// that per-chunk results can be assembled in order.
struct Chunk {
  std::size_t index;
  std::size_t begin;
  std::size_t end;
};

// Splits [0, n) into at most `parts` contiguous chunks of near-equal size.
// The split depends only on (n, parts).
inline std::vector<Chunk> split_range(std::size_t n, std::size_t parts) {
  parts = std::max<std::size_t>(1, std::min(parts, std::max<std::size_t>(n, 1)));
  std::vector<Chunk> chunks;
  chunks.reserve(parts);
  std::size_t base = n / parts, extra = n % parts, begin = 0;
  for (std::size_t i = 0; i < parts; ++i) {
    std::size_t len = base + (i < extra ? 1 : 0);
    chunks.push_back({i, begin, begin + len});
    begin += len;
  }
  return chunks;
}

// Runs fn(chunk) for each chunk of [0, n) on up to `threads` threads and
// waits for all of them. The first exception thrown by a worker is rethrown
// on the calling thread.
template <typename Fn>
void parallel_chunks(std::size_t n, unsigned threads, Fn&& fn) {
  auto chunks = split_range(n, std::max(1u, threads));
  if (chunks.size() == 1) {
    fn(chunks.front());
    return;
  }
  std::vector<std::exception_ptr> errors(chunks.size());
  {
    std::vector<std::jthread> workers;
    workers.reserve(chunks.size());
    for (const Chunk& chunk : chunks) {
      workers.emplace_back([&, chunk] {
        try {
          fn(chunk);
        } catch (...) {
          errors[chunk.index] = std::current_exception();
        }
      });
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace hlp
