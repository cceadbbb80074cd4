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

#include "cfrec/stats.hpp"

#include <cmath>
#include <cstdlib>

#include "cfrec/special.hpp"
#include "cfrec/types.hpp"

namespace cfrec {

McNemarResult mcnemar(const std::vector<std::pair<bool, bool>>& outcomes) {
  if (outcomes.empty()) throw ContractError("mcnemar: no outcomes");
  McNemarResult r;
  for (const auto& [first, second] : outcomes) {
    if (first && !second) ++r.b;
    if (!first && second) ++r.c;
  }
  int64_t discordant = r.b + r.c;
  if (discordant == 0) {
    r.degenerate = true;
    r.exact = true;
    r.p_value = 1.0;
    return r;
  }
  if (discordant < 25) {
    r.exact = true;
    int k = static_cast<int>(r.b < r.c ? r.b : r.c);
    r.statistic = static_cast<double>(k);
    r.p_value = binomial_two_sided_half(k, static_cast<int>(discordant));
    return r;
  }
  double diff = std::fabs(static_cast<double>(r.b - r.c)) - 1.0;
  r.statistic = diff * diff / static_cast<double>(discordant);
  r.p_value = chi_square1_sf(r.statistic);
  return r;
}

PairedTResult paired_t_less(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw ContractError("paired_t_less: samples must be aligned");
  if (a.size() < 2) throw ContractError("paired_t_less: need at least two pairs");
  PairedTResult r;
  r.n = static_cast<int64_t>(a.size());
  double mean = 0.0;
  for (size_t i = 0; i < a.size(); ++i) mean += a[i] - b[i];
  mean /= static_cast<double>(r.n);
  double ss = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    double d = a[i] - b[i] - mean;
    ss += d * d;
  }
  r.mean_diff = mean;
  double var = ss / static_cast<double>(r.n - 1);
  if (var <= 0.0) {
    r.degenerate = true;
    r.t = mean < 0.0 ? -HUGE_VAL : HUGE_VAL;
    r.p_value = mean < 0.0 ? 0.0 : 1.0;
    return r;
  }
  r.t = mean / std::sqrt(var / static_cast<double>(r.n));
  r.p_value = student_t_cdf(r.t, static_cast<double>(r.n - 1));
  return r;
}

double pearson(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw ContractError("pearson: samples must be aligned");
  if (x.size() < 2) throw NumericError("pearson: correlation undefined for fewer than two points");
  double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    double dx = x[i] - mx;
    double dy = y[i] - my;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  if (sxx <= 0.0 || syy <= 0.0) return std::nan("");
  return sxy / std::sqrt(sxx * syy);
}

double rmse(const std::vector<double>& estimate, const std::vector<double>& truth) {
  if (estimate.size() != truth.size()) throw ContractError("rmse: samples must be aligned");
  if (estimate.empty()) throw ContractError("rmse: empty samples");
  double ss = 0.0;
  for (size_t i = 0; i < estimate.size(); ++i) {
    double d = estimate[i] - truth[i];
    ss += d * d;
  }
  return std::sqrt(ss / static_cast<double>(estimate.size()));
}

}  // namespace cfrec
