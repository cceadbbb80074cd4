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

namespace cfrec {

// Small special-function kit backing the hypothesis tests. Everything here
// is deterministic and allocation free.

// log of the binomial coefficient C(n, k).
double log_binomial(int n, int k);

// Regularized incomplete beta function I_x(a, b), continued fraction
// evaluation. Domain: 0 <= x <= 1, a > 0, b > 0.
double regularized_incomplete_beta(double x, double a, double b);

// CDF of Student's t distribution with nu degrees of freedom.
double student_t_cdf(double t, double nu);

// Survival function of the chi-square distribution with one degree of
// freedom: P(X > x).
double chi_square1_sf(double x);

// Two-sided exact binomial tail for a symmetric Bernoulli(1/2) count:
// min(1, 2 * P(X <= k)) with X ~ Binomial(n, 1/2).
double binomial_two_sided_half(int k, int n);

}  // namespace cfrec
