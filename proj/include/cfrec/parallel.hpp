// Copyright 2026 The Authors.
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

#include <exception>
#include <functional>
#include <thread>
#include <vector>

#include "cfrec/types.hpp"

namespace cfrec {

// Runs fn(0), ..., fn(n - 1) on up to `jobs` threads. Work is split into
// contiguous chunks, so results written to per-index slots are identical to
// a sequential run. The first exception wins and is rethrown.
inline void parallel_for(int n, int jobs, const std::function<void(int)>& fn) {
  if (n <= 0) return;
  if (jobs < 1) throw ContractError("jobs must be at least 1");
  if (jobs == 1 || n == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  int workers = jobs < n ? jobs : n;
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> threads;
  threads.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    int begin = static_cast<int>(static_cast<int64_t>(n) * w / workers);
    int end = static_cast<int>(static_cast<int64_t>(n) * (w + 1) / workers);
    threads.emplace_back([&, w, begin, end]() {
      try {
        for (int i = begin; i < end; ++i) fn(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (std::thread& t : threads) t.join();
  for (const std::exception_ptr& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace cfrec
