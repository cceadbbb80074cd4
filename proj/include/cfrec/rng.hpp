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

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace cfrec {

// Derives an independent stream seed from a root seed and a stream label.
// FNV-1a over the label, then splitmix64 mixing. Keeps artifact outputs
// reproducible: the same root seed always yields the same named streams.
inline uint64_t substream_seed(uint64_t root, std::string_view label) {
  uint64_t h = 1469598103934665603ull;
  for (char c : label) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ull;
  }
  uint64_t z = root ^ h;
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

// Deterministic Gaussian source. std::normal_distribution is not pinned
// across standard library implementations, so the transform is done by hand
// (Box-Muller over mt19937_64) to keep checkpoints byte-stable.
class GaussianSource {
 public:
  explicit GaussianSource(uint64_t seed) : engine_(seed) {}

  double next(double stddev) {
    if (have_spare_) {
      have_spare_ = false;
      return spare_ * stddev;
    }
    double u1 = uniform01();
    double u2 = uniform01();
    while (u1 <= 1e-300) u1 = uniform01();
    double r = std::sqrt(-2.0 * std::log(u1));
    double theta = 2.0 * M_PI * u2;
    spare_ = r * std::sin(theta);
    have_spare_ = true;
    return r * std::cos(theta) * stddev;
  }

  uint64_t next_u64() {
    have_spare_ = false;
    return engine_();
  }

  // Uniform integer in [0, n). Rejection sampling, bias free.
  uint64_t next_below(uint64_t n) {
    have_spare_ = false;
    uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    uint64_t x = engine_();
    while (x >= limit) x = engine_();
    return x % n;
  }

 private:
  double uniform01() {
    return (engine_() >> 11) * (1.0 / 9007199254740992.0);
  }

  std::mt19937_64 engine_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace cfrec
