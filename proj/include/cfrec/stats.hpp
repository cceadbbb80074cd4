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

#include <cstdint>
#include <utility>
#include <vector>

namespace cfrec {

// Paired success/failure comparison between two methods on the same users.
struct McNemarResult {
  int64_t b = 0;           // first method succeeded, second failed
  int64_t c = 0;           // first method failed, second succeeded
  double statistic = 0.0;  // chi-square value in the large-sample branch
  double p_value = 1.0;
  bool exact = false;      // exact binomial branch (b + c < 25)
  bool degenerate = false; // no discordant pairs
};

// Two-sided McNemar test on paired binary outcomes. Small discordant counts
// use the exact binomial tail; otherwise the continuity-corrected chi-square
// approximation with one degree of freedom.
McNemarResult mcnemar(const std::vector<std::pair<bool, bool>>& outcomes);

struct PairedTResult {
  int64_t n = 0;
  double mean_diff = 0.0;
  double t = 0.0;
  double p_value = 1.0;
  bool degenerate = false;  // zero variance of the differences
};

// One-sided paired t test of H1: mean(a) < mean(b) on aligned samples.
// Requires at least two pairs. A zero-variance difference vector is flagged
// and resolved by the sign of the mean difference.
PairedTResult paired_t_less(const std::vector<double>& a, const std::vector<double>& b);

// Pearson correlation. Throws NumericError for fewer than two points;
// returns NaN when either sample has zero variance.
double pearson(const std::vector<double>& x, const std::vector<double>& y);

// Root mean squared difference between aligned samples.
double rmse(const std::vector<double>& estimate, const std::vector<double>& truth);

}  // namespace cfrec
