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

#include <string>
#include <vector>

#include <json.hpp>

#include "cfrec/eval.hpp"
#include "cfrec/explain.hpp"
#include "cfrec/stats.hpp"

namespace cfrec {

// Row converters map dense identifiers back to the original ids of the
// dataset and NaN to null.
nlohmann::json to_json(const Explanation& explanation, const Dataset& dataset);
nlohmann::json to_json(const EvalOutcome& outcome, const Dataset& dataset);
nlohmann::json to_json(const OracleOutcome& outcome, const Dataset& dataset);

// JSON lines file: one meta object {"schema":..., "config":...} first, then
// one row per line.
void write_jsonl(const std::string& path, const std::string& schema,
                 const nlohmann::json& config, const std::vector<nlohmann::json>& rows);

// Aggregate table, one row per method and k. The resolved configuration is
// embedded as a leading '#' comment line.
void write_summary_csv(const std::string& path, const nlohmann::json& config,
                       const std::vector<EvalSummary>& rows);

struct PairwiseTestRow {
  std::string method_a;
  std::string method_b;
  int k = 0;
  std::string metric;  // "success" or "set_size"
  std::string mode;    // "mcnemar_exact", "mcnemar_chi2", "paired_t", "degenerate"
  double statistic = 0.0;
  double p_value = 1.0;
  int64_t n = 0;
};

void write_pairwise_csv(const std::string& path, const nlohmann::json& config,
                        const std::vector<PairwiseTestRow>& rows);

// Method-versus-method hypothesis tests on aligned per-user outcomes:
// McNemar on success indicators over all users, and a one-sided paired t
// test (a smaller) on set sizes over users where both methods succeeded.
std::vector<PairwiseTestRow> pairwise_tests(const std::vector<EvalOutcome>& a,
                                            const std::vector<EvalOutcome>& b);

}  // namespace cfrec
