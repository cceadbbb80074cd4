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
#include <string>
#include <vector>

#include "cfrec/influence.hpp"
#include "cfrec/model.hpp"

namespace cfrec {

// Counterfactual question for one user: which profile items, when removed,
// replace the current recommendation with one of the candidates.
struct ExplainInputs {
  int user = -1;
  int k = 0;
  int rec = -1;
  double rec_score = 0.0;
  std::vector<int> candidates;  // rest of the top-k, rank order
  std::vector<double> candidate_scores;
  std::vector<int> profile;     // ascending item ids
};

struct Explanation {
  std::string method;
  int user = -1;
  int k = 0;
  int rec = -1;
  bool success = false;
  int rec_star = -1;                 // predicted replacement, -1 when none
  std::vector<InfluenceRecord> set;  // removal order; value = method's selection score
  std::vector<int> skipped;          // items rejected by a filtering rule
  double estimated_gap_initial = std::numeric_limits<double>::quiet_NaN();
  double estimated_gap_remaining = std::numeric_limits<double>::quiet_NaN();
  bool verification_ran = false;
  bool verified = false;  // retraining displaced the recommendation
  int resumed_steps = 0;  // extra removals added after failed verification
};

// Estimated-influence oracle the gap-based methods run against. Production
// code adapts InfluenceEngine; tests may inject fixed tables.
class GapInfluenceView {
 public:
  virtual ~GapInfluenceView() = default;
  virtual double score_influence(int profile_item, int target_item) = 0;
  virtual double gap_influence(int profile_item, int rec_item, int target_item) = 0;
};

// Fixed-parameter world of the attention baselines: pooling weights and
// rescoring with profile items dropped, parameters untouched.
class FixedParamView {
 public:
  virtual ~FixedParamView() = default;
  virtual std::vector<double> recommendation_weights() = 0;  // profile order
  virtual double score_without(int target_item, const std::vector<int>& removed_items) = 0;
};

// Greedy search over every candidate: per candidate, take profile items by
// descending gap influence while the estimated gap stays non-negative and
// the influence positive; keep the smallest winning set, earlier candidate
// on ties.
Explanation accent(const ExplainInputs& inputs, GapInfluenceView& view);

// One-versus-all variant: re-derives the runner-up from additively updated
// score estimates after every single removal.
Explanation accent_one_vs_all(const ExplainInputs& inputs, GapInfluenceView& view);

// Baseline: items by descending influence on the recommendation score,
// accounted against the fixed original runner-up until the gap flips.
Explanation pure_fia(const ExplainInputs& inputs, GapInfluenceView& view);

// Same ordering, but items whose removal does not reduce the gap are
// skipped instead of taken.
Explanation fia(const ExplainInputs& inputs, GapInfluenceView& view);

// Baseline: items by descending pooling weight, displacement checked by
// rescoring with the removals applied and parameters fixed.
Explanation pure_attention(const ExplainInputs& inputs, FixedParamView& view);

// Same ordering, but an item is only taken when adding it strictly reduces
// the rescored gap against the original runner-up.
Explanation attention_filtered(const ExplainInputs& inputs, FixedParamView& view);

enum class Method { accent, accent_ova, pure_fia, fia, pure_attention, attention };

std::string to_string(Method method);
Method method_from_string(const std::string& s);
const std::vector<Method>& all_methods();
bool method_applicable(Method method, ModelKind kind);

// Assembles the counterfactual question from the model's top-k. Requires
// k >= 2 so at least one candidate remains.
ExplainInputs build_inputs(const Model& model, int user, int k);

// Runs one method against a live model and influence engine.
Explanation run_method(Method method, const Model& model, InfluenceEngine& engine,
                       const ExplainInputs& inputs);

// InfluenceEngine-backed view for one user's explanation question.
class EngineGapView final : public GapInfluenceView {
 public:
  EngineGapView(InfluenceEngine& engine, int user);

  double score_influence(int profile_item, int target_item) override;
  double gap_influence(int profile_item, int rec_item, int target_item) override;

 private:
  InfluenceEngine& engine_;
  int user_;
};

// Model-backed fixed-parameter view.
class ModelFixedView final : public FixedParamView {
 public:
  ModelFixedView(const Model& model, int user, int rec);

  std::vector<double> recommendation_weights() override;
  double score_without(int target_item, const std::vector<int>& removed_items) override;

 private:
  const Model& model_;
  int user_;
  int rec_;
};

}  // namespace cfrec
