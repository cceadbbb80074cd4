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

#include "cfrec/explain.hpp"

#include <algorithm>
#include <optional>

#include <fmt/core.h>

#include "cfrec/types.hpp"

namespace cfrec {

namespace {

void check_inputs(const ExplainInputs& inputs, bool allow_empty_profile) {
  if (inputs.rec < 0) throw ContractError("explanation inputs carry no recommendation");
  if (inputs.candidates.empty()) {
    throw ContractError("explanation inputs carry no replacement candidates");
  }
  if (inputs.candidates.size() != inputs.candidate_scores.size()) {
    throw ContractError("candidate scores are not aligned with candidates");
  }
  if (!allow_empty_profile && inputs.profile.empty()) {
    throw ContractError("user has an empty profile");
  }
}

Explanation base_explanation(const char* method, const ExplainInputs& inputs) {
  Explanation e;
  e.method = method;
  e.user = inputs.user;
  e.k = inputs.k;
  e.rec = inputs.rec;
  e.estimated_gap_initial = inputs.rec_score - inputs.candidate_scores.front();
  return e;
}

// Descending by value, ties to the smaller item id.
void sort_records(std::vector<InfluenceRecord>& records) {
  std::sort(records.begin(), records.end(), [](const InfluenceRecord& a, const InfluenceRecord& b) {
    if (a.value != b.value) return a.value > b.value;
    return a.item < b.item;
  });
}

}  // namespace

Explanation accent(const ExplainInputs& inputs, GapInfluenceView& view) {
  check_inputs(inputs, false);
  Explanation out = base_explanation("accent", inputs);

  std::optional<std::vector<InfluenceRecord>> best;
  int best_candidate = -1;
  double best_gap = 0.0;
  double best_remaining = 0.0;
  for (size_t ci = 0; ci < inputs.candidates.size(); ++ci) {
    int cand = inputs.candidates[ci];
    std::vector<InfluenceRecord> ranked;
    ranked.reserve(inputs.profile.size());
    for (int item : inputs.profile) {
      double v = view.gap_influence(item, inputs.rec, cand);
      ranked.push_back({-1, item, v});
    }
    sort_records(ranked);

    double remaining = inputs.rec_score - inputs.candidate_scores[ci];
    std::vector<InfluenceRecord> chosen;
    for (const InfluenceRecord& r : ranked) {
      if (remaining < 0.0) break;
      if (r.value <= 0.0) break;
      chosen.push_back(r);
      remaining -= r.value;
    }
    if (remaining < 0.0 && !chosen.empty()) {
      if (!best || chosen.size() < best->size()) {
        best = std::move(chosen);
        best_candidate = cand;
        best_gap = inputs.rec_score - inputs.candidate_scores[ci];
        best_remaining = remaining;
      }
    }
  }

  if (best) {
    out.success = true;
    out.rec_star = best_candidate;
    out.set = std::move(*best);
    out.estimated_gap_initial = best_gap;
    out.estimated_gap_remaining = best_remaining;
  }
  return out;
}

Explanation accent_one_vs_all(const ExplainInputs& inputs, GapInfluenceView& view) {
  check_inputs(inputs, true);
  Explanation out = base_explanation("accent_ova", inputs);

  double est_rec = inputs.rec_score;
  std::vector<double> est = inputs.candidate_scores;
  std::vector<int> pool = inputs.profile;

  auto runner = [&]() {
    size_t arg = 0;
    for (size_t i = 1; i < est.size(); ++i) {
      bool better = est[i] > est[arg] ||
                    (est[i] == est[arg] && inputs.candidates[i] < inputs.candidates[arg]);
      if (better) arg = i;
    }
    return arg;
  };

  while (true) {
    size_t r = runner();
    double gap = est_rec - est[r];
    if (gap < 0.0) {
      out.success = true;
      out.rec_star = inputs.candidates[r];
      out.estimated_gap_remaining = gap;
      break;
    }
    if (pool.empty()) {
      out.estimated_gap_remaining = gap;
      break;
    }
    int best_item = -1;
    double best_value = 0.0;
    for (int item : pool) {
      double v = view.gap_influence(item, inputs.rec, inputs.candidates[r]);
      if (best_item < 0 || v > best_value || (v == best_value && item < best_item)) {
        best_item = item;
        best_value = v;
      }
    }
    if (best_value <= 0.0) {
      out.estimated_gap_remaining = gap;
      break;
    }
    out.set.push_back({-1, best_item, best_value});
    pool.erase(std::find(pool.begin(), pool.end(), best_item));
    est_rec -= view.score_influence(best_item, inputs.rec);
    for (size_t i = 0; i < est.size(); ++i) {
      est[i] -= view.score_influence(best_item, inputs.candidates[i]);
    }
  }
  if (!out.success) {
    out.rec_star = -1;
    out.set.clear();
  }
  return out;
}

Explanation pure_fia(const ExplainInputs& inputs, GapInfluenceView& view) {
  check_inputs(inputs, false);
  Explanation out = base_explanation("pure_fia", inputs);
  int cand = inputs.candidates.front();

  std::vector<InfluenceRecord> ranked;
  ranked.reserve(inputs.profile.size());
  for (int item : inputs.profile) {
    ranked.push_back({-1, item, view.score_influence(item, inputs.rec)});
  }
  sort_records(ranked);

  double remaining = out.estimated_gap_initial;
  for (const InfluenceRecord& r : ranked) {
    if (remaining < 0.0) break;
    double reduction = view.gap_influence(r.item, inputs.rec, cand);
    out.set.push_back({-1, r.item, reduction});
    remaining -= reduction;
  }
  out.estimated_gap_remaining = remaining;
  if (remaining < 0.0) {
    out.success = true;
    out.rec_star = cand;
  } else {
    out.set.clear();
  }
  return out;
}

Explanation fia(const ExplainInputs& inputs, GapInfluenceView& view) {
  check_inputs(inputs, false);
  Explanation out = base_explanation("fia", inputs);
  int cand = inputs.candidates.front();

  std::vector<InfluenceRecord> ranked;
  ranked.reserve(inputs.profile.size());
  for (int item : inputs.profile) {
    ranked.push_back({-1, item, view.score_influence(item, inputs.rec)});
  }
  sort_records(ranked);

  double remaining = out.estimated_gap_initial;
  for (const InfluenceRecord& r : ranked) {
    if (remaining < 0.0) break;
    double reduction = view.gap_influence(r.item, inputs.rec, cand);
    if (reduction <= 0.0) {
      out.skipped.push_back(r.item);
      continue;
    }
    out.set.push_back({-1, r.item, reduction});
    remaining -= reduction;
  }
  out.estimated_gap_remaining = remaining;
  if (remaining < 0.0) {
    out.success = true;
    out.rec_star = cand;
  } else {
    out.set.clear();
    out.skipped.clear();
  }
  return out;
}

namespace {

// Shared skeleton of the two attention baselines: walk profile items by
// descending pooling weight, optionally filtering each addition, and stop
// when rescoring shows the recommendation displaced.
Explanation attention_walk(const char* method, const ExplainInputs& inputs, FixedParamView& view,
                           bool filter_gap_reducers) {
  check_inputs(inputs, false);
  Explanation out = base_explanation(method, inputs);
  int cand0 = inputs.candidates.front();

  std::vector<double> weights = view.recommendation_weights();
  if (weights.size() != inputs.profile.size()) {
    throw ContractError("pooling weights are not aligned with the profile");
  }
  std::vector<InfluenceRecord> ranked;
  ranked.reserve(inputs.profile.size());
  for (size_t i = 0; i < inputs.profile.size(); ++i) {
    ranked.push_back({-1, inputs.profile[i], weights[i]});
  }
  sort_records(ranked);

  std::vector<int> removed;
  double current_gap = inputs.rec_score - inputs.candidate_scores.front();
  out.estimated_gap_remaining = current_gap;
  for (const InfluenceRecord& r : ranked) {
    if (removed.size() + 1 >= inputs.profile.size()) break;  // never empty the pool

    if (filter_gap_reducers) {
      std::vector<int> trial = removed;
      trial.push_back(r.item);
      double gap = view.score_without(inputs.rec, trial) - view.score_without(cand0, trial);
      if (gap >= current_gap) {
        out.skipped.push_back(r.item);
        continue;
      }
      current_gap = gap;
    }

    removed.push_back(r.item);
    out.set.push_back(r);

    double rec_score = view.score_without(inputs.rec, removed);
    int arg = -1;
    double best = 0.0;
    for (int cand : inputs.candidates) {
      double s = view.score_without(cand, removed);
      if (arg < 0 || s > best) {
        arg = cand;
        best = s;
      }
    }
    out.estimated_gap_remaining = rec_score - best;
    if (best > rec_score) {
      out.success = true;
      out.rec_star = arg;
      break;
    }
  }
  if (!out.success) {
    out.rec_star = -1;
    out.set.clear();
    out.skipped.clear();
  }
  return out;
}

}  // namespace

Explanation pure_attention(const ExplainInputs& inputs, FixedParamView& view) {
  return attention_walk("pure_attention", inputs, view, false);
}

Explanation attention_filtered(const ExplainInputs& inputs, FixedParamView& view) {
  return attention_walk("attention", inputs, view, true);
}

std::string to_string(Method method) {
  switch (method) {
    case Method::accent:
      return "accent";
    case Method::accent_ova:
      return "accent_ova";
    case Method::pure_fia:
      return "pure_fia";
    case Method::fia:
      return "fia";
    case Method::pure_attention:
      return "pure_attention";
    case Method::attention:
      return "attention";
  }
  throw ContractError("unknown method");
}

Method method_from_string(const std::string& s) {
  for (Method m : all_methods()) {
    if (to_string(m) == s) return m;
  }
  throw ParseError(fmt::format("unknown method '{}'", s));
}

const std::vector<Method>& all_methods() {
  static const std::vector<Method> kAll = {Method::accent,        Method::accent_ova,
                                           Method::pure_fia,      Method::fia,
                                           Method::pure_attention, Method::attention};
  return kAll;
}

bool method_applicable(Method method, ModelKind kind) {
  if (method == Method::pure_attention || method == Method::attention) {
    return kind == ModelKind::attention;
  }
  return true;
}

ExplainInputs build_inputs(const Model& model, int user, int k) {
  if (k < 2) throw ContractError("k must be at least 2 to leave a replacement candidate");
  std::vector<ItemScore> top = model.topk(user, k);
  if (static_cast<int>(top.size()) < 2) {
    throw ContractError(fmt::format("user {} has fewer than two rankable items", user));
  }
  ExplainInputs inputs;
  inputs.user = user;
  inputs.k = k;
  inputs.rec = top[0].item;
  inputs.rec_score = top[0].score;
  for (size_t i = 1; i < top.size(); ++i) {
    inputs.candidates.push_back(top[i].item);
    inputs.candidate_scores.push_back(top[i].score);
  }
  inputs.profile = model.data().profiles[user];
  return inputs;
}

Explanation run_method(Method method, const Model& model, InfluenceEngine& engine,
                       const ExplainInputs& inputs) {
  if (!method_applicable(method, model.kind())) {
    throw ContractError(
        fmt::format("method '{}' requires the attention model", to_string(method)));
  }
  Explanation out;
  if (method == Method::pure_attention || method == Method::attention) {
    ModelFixedView view(model, inputs.user, inputs.rec);
    out = method == Method::pure_attention ? pure_attention(inputs, view)
                                           : attention_filtered(inputs, view);
  } else if (model.kind() == ModelKind::attention && inputs.profile.size() < 2) {
    // Dropping the only pooled interaction leaves the user unscorable, so
    // the estimates behind the gap methods are undefined and no removal can
    // be ranked. Mirrors the pooled baselines, which never empty the pool.
    check_inputs(inputs, method == Method::accent_ova);
    out = base_explanation(to_string(method).c_str(), inputs);
  } else {
    EngineGapView view(engine, inputs.user);
    switch (method) {
      case Method::accent:
        out = accent(inputs, view);
        break;
      case Method::accent_ova:
        out = accent_one_vs_all(inputs, view);
        break;
      case Method::pure_fia:
        out = pure_fia(inputs, view);
        break;
      default:
        out = fia(inputs, view);
        break;
    }
  }
  // Resolve the training points behind the selected profile items.
  for (InfluenceRecord& r : out.set) {
    r.point = model.data().positive_point(inputs.user, r.item);
  }
  return out;
}

EngineGapView::EngineGapView(InfluenceEngine& engine, int user) : engine_(engine), user_(user) {}

double EngineGapView::score_influence(int profile_item, int target_item) {
  int point = engine_.model().data().positive_point(user_, profile_item);
  return engine_.influence_on_score(point, user_, target_item);
}

double EngineGapView::gap_influence(int profile_item, int rec_item, int target_item) {
  int point = engine_.model().data().positive_point(user_, profile_item);
  return engine_.influence_on_gap(point, user_, rec_item, target_item).value;
}

ModelFixedView::ModelFixedView(const Model& model, int user, int rec)
    : model_(model), user_(user), rec_(rec) {}

std::vector<double> ModelFixedView::recommendation_weights() {
  return model_.attention_weights(user_, rec_);
}

double ModelFixedView::score_without(int target_item, const std::vector<int>& removed_items) {
  if (removed_items.empty()) return model_.score(user_, target_item);
  return model_.score_without(user_, target_item, removed_items);
}

}  // namespace cfrec
