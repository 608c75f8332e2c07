// src/parallel.h

// Copyright 2026  The svtk Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef SVTK_PARALLEL_H_
#define SVTK_PARALLEL_H_

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace svtk {

/// Runs fn(i) for i in [0, n) over up to num_threads threads (0 = hardware
/// concurrency), each on a contiguous block.  If any call throws, the
/// exception from the lowest failing index is rethrown after all threads
/// have joined.
template <typename Fn>
void ParallelFor(size_t n, int num_threads, Fn &&fn) {
  size_t threads = num_threads > 0 ? static_cast<size_t>(num_threads)
                                   : std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, std::max<size_t>(n, 1));
  if (threads <= 1) {
    for (size_t i = 0; i < n; i++) fn(i);
    return;
  }
  std::vector<std::exception_ptr> errors(threads);
  std::vector<std::thread> pool;
  const size_t block = (n + threads - 1) / threads;
  for (size_t t = 0; t < threads; t++) {
    pool.emplace_back([&, t] {
      size_t begin = t * block, end = std::min(n, begin + block);
      try {
        for (size_t i = begin; i < end; i++) fn(i);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (std::thread &th : pool) th.join();
  for (const std::exception_ptr &e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace svtk

#endif  // SVTK_PARALLEL_H_
