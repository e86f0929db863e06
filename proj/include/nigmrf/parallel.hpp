// Copyright 2026-present the nigmrf authors
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
#include <mutex>
#include <vector>

namespace nigmrf {

// Number of worker threads used by the compute modules (OpenMP when available).
void set_num_threads(int n);
int num_threads();

// Fixed chunk size for reductions. Chunk boundaries do not depend on the thread
// count, and partials are combined in chunk order, so reductions are bit-identical
// for any number of threads.
inline constexpr std::size_t kReduceChunk = 2048;

inline std::size_t chunk_count(std::size_t n) { return (n + kReduceChunk - 1) / kReduceChunk; }

// Exceptions may not leave an OpenMP region; the first one is kept and rethrown afterwards.
class ExceptionSlot {
 public:
  template <class F>
  void run(F&& f) noexcept {
    try {
      f();
    } catch (...) {
      std::lock_guard<std::mutex> lock(mu_);
      if (!first_) first_ = std::current_exception();
    }
  }
  void rethrow() const {
    if (first_) std::rethrow_exception(first_);
  }

 private:
  std::mutex mu_;
  std::exception_ptr first_;
};

// Runs body(chunk, begin, end) for every chunk, possibly in parallel.
template <class Body>
void for_each_chunk(std::size_t n, Body&& body) {
  const std::ptrdiff_t chunks = static_cast<std::ptrdiff_t>(chunk_count(n));
  ExceptionSlot slot;
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t c = 0; c < chunks; ++c) {
    const std::size_t begin = static_cast<std::size_t>(c) * kReduceChunk;
    const std::size_t end = std::min(n, begin + kReduceChunk);
    slot.run([&] { body(static_cast<std::size_t>(c), begin, end); });
  }
  slot.rethrow();
}

// Parallel loop over an index range without reduction.
template <class Body>
void parallel_for(std::size_t n, Body&& body) {
  const std::ptrdiff_t count = static_cast<std::ptrdiff_t>(n);
  ExceptionSlot slot;
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < count; ++i) slot.run([&] { body(static_cast<std::size_t>(i)); });
  slot.rethrow();
}

// Deterministic reduction: partial(begin, end) -> T per chunk, combined left to right.
template <class T, class Partial, class Combine>
T chunked_reduce(std::size_t n, T init, Partial&& partial, Combine&& combine) {
  std::vector<T> parts(chunk_count(n), init);
  for_each_chunk(n, [&](std::size_t c, std::size_t b, std::size_t e) { parts[c] = partial(b, e); });
  T acc = init;
  for (auto& p : parts) acc = combine(std::move(acc), p);
  return acc;
}

}  // namespace nigmrf
