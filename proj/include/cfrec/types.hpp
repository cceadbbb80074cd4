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
#include <stdexcept>
#include <string>

namespace cfrec {

// Error taxonomy shared across the library. The CLI maps each class to a
// distinct process exit code, so library code must throw the narrowest type
// that applies.

// Malformed input files, schema mismatches, unusable artifacts.
struct ParseError : std::runtime_error {
  explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

// References to unknown users, items or training points.
struct LookupError : std::runtime_error {
  explicit LookupError(const std::string& what) : std::runtime_error(what) {}
};

// Numerical failure: divergent training, singular or non-converging solves,
// undefined statistics.
struct NumericError : std::runtime_error {
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

// Caller violated a documented precondition.
struct ContractError : std::invalid_argument {
  explicit ContractError(const std::string& what) : std::invalid_argument(what) {}
};

}  // namespace cfrec
