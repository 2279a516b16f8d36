// Copyright 2026 The Coughpipe Authors
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

#ifndef COUGHPIPE_PARALLEL_H_
#define COUGHPIPE_PARALLEL_H_

#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace coughpipe {

// Worker count: COUGHPIPE_THREADS when set and positive, otherwise the
// hardware concurrency (at least 1).
inline unsigned worker_count() {
  if (const char* env = std::getenv("COUGHPIPE_THREADS")) {
    const long n = std::strtol(env, nullptr, 10);
    if (n > 0) return static_cast<unsigned>(n);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? hw : 1;
}

// Runs fn(i) for i in [0, n). Each index is owned by exactly one worker
// and workers write only to their own indices, so results are identical
// to the serial order no matter how many threads run.
inline void parallel_for(size_t n, const std::function<void(size_t)>& fn) {
  const unsigned workers = worker_count();
  if (workers <= 1 || n <= 1) {
    for (size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  const unsigned used = static_cast<unsigned>(
      std::min<size_t>(workers, n));
  pool.reserve(used);
  for (unsigned w = 0; w < used; ++w) {
    pool.emplace_back([&, w] {
      for (size_t i = w; i < n; i += used) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace coughpipe

#endif  // COUGHPIPE_PARALLEL_H_
