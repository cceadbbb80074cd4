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

#include <limits>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "cfrec/explain.hpp"
#include "cfrec/influence.hpp"
#include "cfrec/model.hpp"

namespace cfrec {

struct EvalOptions {
  int k = 5;
  bool verify = true;     // retrain behind every claimed counterfactual set
  int retry_budget = 2;   // extra removals after a failed verification
  int jobs = 1;           // worker threads for the retraining phase
};

// One user's result for one method and k. Item fields are dense ids; the
// reporting layer translates to original ids.
struct EvalOutcome {
  Method method = Method::accent;
  int k = 0;
  int user = -1;
  int rec = -1;
  int rec_star = -1;
  bool success = false;
  bool verification_ran = false;
  bool verified = false;        // retraining displaced the recommendation
  bool strict_success = false;  // retrained top-1 equals the predicted replacement
  bool diverged = false;        // retraining failed numerically
  int new_top1 = -1;            // retrained top-1, -1 when unavailable
  int resumed_steps = 0;
  std::vector<InfluenceRecord> set;
  std::vector<int> skipped;
  double estimated_gap_initial = std::numeric_limits<double>::quiet_NaN();
  double estimated_gap_remaining = std::numeric_limits<double>::quiet_NaN();
  double estimated_set_influence = std::numeric_limits<double>::quiet_NaN();
  double true_gap_influence = std::numeric_limits<double>::quiet_NaN();
};

struct EvalSummary {
  Method method = Method::accent;
  int k = 0;
  int n_users = 0;
  int n_success = 0;
  int n_verified = 0;
  int n_strict = 0;
  int n_diverged = 0;
  int n_influence_pairs = 0;
  double cf_rate = 0.0;         // successes / users
  double displaced_rate = 0.0;  // verified / successes
  double strict_rate = 0.0;     // strict / successes
  double mean_size = std::numeric_limits<double>::quiet_NaN();           // over successes
  double mean_size_verified = std::numeric_limits<double>::quiet_NaN();  // over verified
  double influence_rmse = std::numeric_limits<double>::quiet_NaN();
  double influence_corr = std::numeric_limits<double>::quiet_NaN();
};

// Memoized retraining results, keyed by (user, removed training points).
// Entries keep the user's full post-retraining score row so later queries
// need no model object.
class RetrainCache {
 public:
  struct Entry {
    bool diverged = false;
    bool scored = false;          // false when the user's pool became empty
    int top1 = -1;                // over non-interacted items of the base dataset
    std::vector<double> scores;   // per dense item, empty unless scored
  };

  static Entry compute(const Model& model, int user, const std::vector<int>& removed_points);

  const Entry* find(int user, const std::vector<int>& removed_points) const;
  const Entry& put(int user, std::vector<int> removed_points, Entry entry);
  const Entry& get_or_compute(const Model& model, int user,
                              const std::vector<int>& removed_points);
  size_t size() const { return map_.size(); }
  uint64_t computed() const { return computed_; }

 private:
  std::map<std::pair<int, std::vector<int>>, Entry> map_;
  uint64_t computed_ = 0;
};

// Retrains behind a successful explanation. When the recommendation
// survives, extends the set by the next best estimated removals, one per
// retry, re-checking each time.
Explanation verify_and_resume(const Model& model, InfluenceEngine& engine,
                              const ExplainInputs& inputs, Explanation explanation,
                              int retry_budget, RetrainCache& cache);

// Runs one method for every user at one k: explanation, verification and
// influence diagnostics per user, plus the aggregate summary.
std::pair<std::vector<EvalOutcome>, EvalSummary> evaluate(const Model& model,
                                                          InfluenceEngine& engine, Method method,
                                                          const EvalOptions& options,
                                                          RetrainCache& cache);

struct DiagnosticsResult {
  int n = 0;
  double rmse = std::numeric_limits<double>::quiet_NaN();
  double pearson = std::numeric_limits<double>::quiet_NaN();
};

// Estimated set influence against retrained truth, over outcomes carrying
// both numbers.
DiagnosticsResult influence_diagnostics(const std::vector<EvalOutcome>& outcomes);

struct OracleOutcome {
  int user = -1;
  bool eligible = false;
  std::string reason;  // why the user was skipped
  int rec = -1;
  bool found = false;
  std::vector<int> items;  // smallest displacing removal set, dense ids
  int new_top1 = -1;
  int retrains = 0;
};

// Ground-truth smallest counterfactual set by exhaustive retraining over
// profile subsets, sizes ascending, lexicographic within a size. Users with
// profiles larger than max_profile are skipped as ineligible.
OracleOutcome exhaustive_counterfactual(const Model& model, int user, int max_profile,
                                        int max_size, RetrainCache& cache);

}  // namespace cfrec
