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

// Forward-mode dual number plus the scalar pieces of both losses, templated
// so the same expressions serve values (double) and exact directional
// derivatives (Dual). Internal to the model implementations.

#include <cmath>

namespace cfrec::detail {

struct Dual {
  double v = 0.0;  // value
  double d = 0.0;  // derivative along the seeded direction

  Dual() = default;
  Dual(double value) : v(value) {}  // NOLINT: implicit by design
  Dual(double value, double deriv) : v(value), d(deriv) {}
};

inline Dual operator+(Dual x, Dual y) { return {x.v + y.v, x.d + y.d}; }
inline Dual operator-(Dual x, Dual y) { return {x.v - y.v, x.d - y.d}; }
inline Dual operator-(Dual x) { return {-x.v, -x.d}; }
inline Dual operator*(Dual x, Dual y) { return {x.v * y.v, x.d * y.v + x.v * y.d}; }
inline Dual operator/(Dual x, Dual y) {
  double inv = 1.0 / y.v;
  double q = x.v * inv;
  return {q, (x.d - q * y.d) * inv};
}
inline Dual& operator+=(Dual& x, Dual y) { x = x + y; return x; }
inline Dual& operator-=(Dual& x, Dual y) { x = x - y; return x; }
inline Dual& operator*=(Dual& x, Dual y) { x = x * y; return x; }

inline Dual exp(Dual x) {
  double e = std::exp(x.v);
  return {e, x.d * e};
}
inline Dual log1p(Dual x) { return {std::log1p(x.v), x.d / (1.0 + x.v)}; }
inline Dual sqrt(Dual x) {
  double s = std::sqrt(x.v);
  return {s, 0.5 * x.d / s};
}
inline Dual erf(Dual x) {
  constexpr double kTwoOverSqrtPi = 1.1283791670955126;
  return {std::erf(x.v), x.d * kTwoOverSqrtPi * std::exp(-x.v * x.v)};
}

inline double value(double x) { return x; }
inline double value(Dual x) { return x.v; }

using std::erf;
using std::exp;
using std::log1p;
using std::sqrt;

// Numerically stable log(1 + exp(x)).
template <typename T>
T softplus(T x) {
  if (value(x) > 0.0) return x + log1p(exp(-x));
  return log1p(exp(x));
}

// Logistic function, stable on both tails.
template <typename T>
T sigmoid(T x) {
  if (value(x) >= 0.0) {
    T e = exp(-x);
    return T(1.0) / (T(1.0) + e);
  }
  T e = exp(x);
  return e / (T(1.0) + e);
}

// Smooth gating activation 0.5 x (1 + erf(x / sqrt(2))) and its derivative.
// Twice differentiable, which the curvature computations rely on.
template <typename T>
T gelu(T x) {
  constexpr double kInvSqrt2 = 0.7071067811865476;
  return T(0.5) * x * (T(1.0) + erf(x * T(kInvSqrt2)));
}

template <typename T>
T gelu_prime(T x) {
  constexpr double kInvSqrt2 = 0.7071067811865476;
  constexpr double kInvSqrt2Pi = 0.3989422804014327;
  return T(0.5) * (T(1.0) + erf(x * T(kInvSqrt2))) +
         x * T(kInvSqrt2Pi) * exp(T(-0.5) * x * x);
}

}  // namespace cfrec::detail
