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

#include "cfrec/eval.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include <fmt/core.h>

#include "cfrec/parallel.hpp"
#include "cfrec/stats.hpp"
#include "cfrec/types.hpp"

namespace cfrec {

namespace {

std::vector<int> sorted_points(const std::vector<InfluenceRecord>& set) {
  std::vector<int> out;
  out.reserve(set.size());
  for (const InfluenceRecord& r : set) out.push_back(r.point);
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

RetrainCache::Entry RetrainCache::compute(const Model& model, int user,
                                          const std::vector<int>& removed_points) {
  Entry e;
  std::unique_ptr<Model> retrained;
  try {
    retrained = retrain_without(model, removed_points);
  } catch (const NumericError&) {
    e.diverged = true;
    return e;
  }
  if (retrained->kind() == ModelKind::attention &&
      retrained->data().profiles[user].empty()) {
    return e;  // nothing can be scored for this user anymore
  }
  e.scored = true;
  e.scores.resize(model.data().num_items);
  for (int item = 0; item < model.data().num_items; ++item) {
    e.scores[item] = retrained->score(user, item);
  }
  std::vector<int> excluded = model.data().interacted(user);
  int best = -1;
  for (int item = 0; item < model.data().num_items; ++item) {
    if (std::binary_search(excluded.begin(), excluded.end(), item)) continue;
    if (best < 0 || e.scores[item] > e.scores[best]) best = item;
  }
  e.top1 = best;
  return e;
}

const RetrainCache::Entry* RetrainCache::find(int user,
                                              const std::vector<int>& removed_points) const {
  auto it = map_.find({user, removed_points});
  return it == map_.end() ? nullptr : &it->second;
}

const RetrainCache::Entry& RetrainCache::put(int user, std::vector<int> removed_points,
                                             Entry entry) {
  auto [it, inserted] =
      map_.insert_or_assign({user, std::move(removed_points)}, std::move(entry));
  if (inserted) ++computed_;
  return it->second;
}

const RetrainCache::Entry& RetrainCache::get_or_compute(const Model& model, int user,
                                                        const std::vector<int>& removed_points) {
  if (const Entry* hit = find(user, removed_points)) return *hit;
  return put(user, removed_points, compute(model, user, removed_points));
}

Explanation verify_and_resume(const Model& model, InfluenceEngine& engine,
                              const ExplainInputs& inputs, Explanation explanation,
                              int retry_budget, RetrainCache& cache) {
  if (!explanation.success) {
    throw ContractError("verify_and_resume: explanation claims no counterfactual set");
  }
  if (retry_budget < 0) throw ContractError("verify_and_resume: negative retry budget");

  explanation.verification_ran = true;
  const RetrainCache::Entry* entry =
      &cache.get_or_compute(model, inputs.user, sorted_points(explanation.set));
  auto displaced = [&](const RetrainCache::Entry& e) {
    if (e.diverged) return false;
    if (!e.scored) return true;  // the recommendation is gone with the pool
    return e.top1 != inputs.rec;
  };
  if (displaced(*entry)) {
    explanation.verified = true;
    return explanation;
  }

  for (int retry = 0; retry < retry_budget; ++retry) {
    if (entry->diverged) break;
    // Extend by the best remaining removal toward the already chosen
    // replacement.
    std::vector<int> taken;
    for (const InfluenceRecord& r : explanation.set) taken.push_back(r.item);
    int best_item = -1;
    InfluenceRecord best_record;
    for (int item : inputs.profile) {
      if (std::find(taken.begin(), taken.end(), item) != taken.end()) continue;
      int point = model.data().positive_point(inputs.user, item);
      InfluenceRecord r =
          engine.influence_on_gap(point, inputs.user, inputs.rec, explanation.rec_star);
      if (r.value <= 0.0) continue;
      if (best_item < 0 || r.value > best_record.value ||
          (r.value == best_record.value && item < best_item)) {
        best_item = item;
        best_record = r;
      }
    }
    if (best_item < 0) break;
    explanation.set.push_back(best_record);
    ++explanation.resumed_steps;
    entry = &cache.get_or_compute(model, inputs.user, sorted_points(explanation.set));
    if (displaced(*entry)) {
      explanation.verified = true;
      break;
    }
  }
  return explanation;
}

std::pair<std::vector<EvalOutcome>, EvalSummary> evaluate(const Model& model,
                                                          InfluenceEngine& engine, Method method,
                                                          const EvalOptions& options,
                                                          RetrainCache& cache) {
  if (options.k < 2) throw ContractError("evaluate: k must be at least 2");
  if (options.jobs < 1) throw ContractError("evaluate: jobs must be at least 1");
  int num_users = model.data().num_users;

  // Explanations first; influence work shares the engine's caches.
  std::vector<ExplainInputs> inputs(num_users);
  std::vector<Explanation> explanations(num_users);
  for (int u = 0; u < num_users; ++u) {
    inputs[u] = build_inputs(model, u, options.k);
    explanations[u] = run_method(method, model, engine, inputs[u]);
  }

  // Retraining phase. Workers fill disjoint slots, so the outcome is
  // independent of the thread count.
  if (options.verify) {
    std::vector<std::pair<int, std::vector<int>>> jobs;
    for (int u = 0; u < num_users; ++u) {
      if (!explanations[u].success) continue;
      std::vector<int> key = sorted_points(explanations[u].set);
      if (cache.find(u, key) == nullptr) jobs.emplace_back(u, std::move(key));
    }
    std::vector<RetrainCache::Entry> computed(jobs.size());
    parallel_for(static_cast<int>(jobs.size()), options.jobs, [&](int i) {
      computed[i] = RetrainCache::compute(model, jobs[i].first, jobs[i].second);
    });
    for (size_t i = 0; i < jobs.size(); ++i) {
      cache.put(jobs[i].first, std::move(jobs[i].second), std::move(computed[i]));
    }
  }

  std::vector<EvalOutcome> outcomes(num_users);
  for (int u = 0; u < num_users; ++u) {
    Explanation expl = std::move(explanations[u]);
    if (expl.success && options.verify) {
      expl = verify_and_resume(model, engine, inputs[u], std::move(expl), options.retry_budget,
                               cache);
    }

    EvalOutcome& o = outcomes[u];
    o.method = method;
    o.k = options.k;
    o.user = u;
    o.rec = expl.rec;
    o.rec_star = expl.rec_star;
    o.success = expl.success;
    o.verification_ran = expl.verification_ran;
    o.verified = expl.verified;
    o.resumed_steps = expl.resumed_steps;
    o.set = expl.set;
    o.skipped = expl.skipped;
    o.estimated_gap_initial = expl.estimated_gap_initial;
    o.estimated_gap_remaining = expl.estimated_gap_remaining;

    if (expl.success) {
      double est = 0.0;
      if (expl.rec_star >= 0) {
        for (const InfluenceRecord& r : expl.set) {
          est += engine.influence_on_gap(r.point, u, expl.rec, expl.rec_star).value;
        }
        o.estimated_set_influence = est;
      }
      if (expl.verification_ran) {
        const RetrainCache::Entry* entry = cache.find(u, sorted_points(expl.set));
        o.diverged = entry->diverged;
        if (entry->scored) {
          o.new_top1 = entry->top1;
          o.strict_success = entry->top1 == expl.rec_star;
          double before = engine.base_score(u, expl.rec) - engine.base_score(u, expl.rec_star);
          double after = entry->scores[expl.rec] - entry->scores[expl.rec_star];
          o.true_gap_influence = before - after;
        }
      }
    }
  }

  EvalSummary s;
  s.method = method;
  s.k = options.k;
  s.n_users = num_users;
  double size_sum = 0.0;
  double size_sum_verified = 0.0;
  for (const EvalOutcome& o : outcomes) {
    if (!o.success) continue;
    ++s.n_success;
    size_sum += static_cast<double>(o.set.size());
    if (o.verified) {
      ++s.n_verified;
      size_sum_verified += static_cast<double>(o.set.size());
    }
    if (o.strict_success) ++s.n_strict;
    if (o.diverged) ++s.n_diverged;
  }
  s.cf_rate = num_users > 0 ? static_cast<double>(s.n_success) / num_users : 0.0;
  if (s.n_success > 0) {
    s.displaced_rate = static_cast<double>(s.n_verified) / s.n_success;
    s.strict_rate = static_cast<double>(s.n_strict) / s.n_success;
    s.mean_size = size_sum / s.n_success;
  }
  if (s.n_verified > 0) s.mean_size_verified = size_sum_verified / s.n_verified;
  DiagnosticsResult diag = influence_diagnostics(outcomes);
  s.n_influence_pairs = diag.n;
  s.influence_rmse = diag.rmse;
  s.influence_corr = diag.pearson;
  return {std::move(outcomes), std::move(s)};
}

DiagnosticsResult influence_diagnostics(const std::vector<EvalOutcome>& outcomes) {
  DiagnosticsResult out;
  std::vector<double> est;
  std::vector<double> truth;
  for (const EvalOutcome& o : outcomes) {
    if (std::isfinite(o.estimated_set_influence) && std::isfinite(o.true_gap_influence)) {
      est.push_back(o.estimated_set_influence);
      truth.push_back(o.true_gap_influence);
    }
  }
  out.n = static_cast<int>(est.size());
  if (out.n >= 1) out.rmse = rmse(est, truth);
  if (out.n >= 2) out.pearson = pearson(est, truth);
  return out;
}

OracleOutcome exhaustive_counterfactual(const Model& model, int user, int max_profile,
                                        int max_size, RetrainCache& cache) {
  if (max_size < 1) throw ContractError("exhaustive_counterfactual: max_size must be positive");
  OracleOutcome out;
  out.user = user;
  const std::vector<int>& profile = model.data().profiles[user];
  if (profile.empty()) {
    out.reason = "empty profile";
    return out;
  }
  if (static_cast<int>(profile.size()) > max_profile) {
    out.reason = fmt::format("profile size {} exceeds limit {}", profile.size(), max_profile);
    return out;
  }
  out.eligible = true;
  out.rec = model.topk(user, 1).front().item;

  int m = static_cast<int>(profile.size());
  int cap = std::min(max_size, m);
  // Removing the whole profile leaves the attention pool empty; the
  // recommendation is then undefined rather than displaced, so skip it.
  if (model.kind() == ModelKind::attention && cap == m) cap = m - 1;

  std::vector<int> combo;
  for (int size = 1; size <= cap && !out.found; ++size) {
    combo.assign(size, 0);
    for (int i = 0; i < size; ++i) combo[i] = i;
    while (true) {
      std::vector<int> removed;
      removed.reserve(size);
      for (int idx : combo) {
        removed.push_back(model.data().positive_point(user, profile[idx]));
      }
      std::sort(removed.begin(), removed.end());
      const RetrainCache::Entry& entry = cache.get_or_compute(model, user, removed);
      ++out.retrains;
      bool displaced = false;
      if (!entry.diverged) displaced = entry.scored ? entry.top1 != out.rec : true;
      if (displaced) {
        out.found = true;
        for (int idx : combo) out.items.push_back(profile[idx]);
        out.new_top1 = entry.scored ? entry.top1 : -1;
        break;
      }
      // Next lexicographic combination.
      int pos = size - 1;
      while (pos >= 0 && combo[pos] == m - size + pos) --pos;
      if (pos < 0) break;
      ++combo[pos];
      for (int i = pos + 1; i < size; ++i) combo[i] = combo[i - 1] + 1;
    }
  }
  return out;
}

}  // namespace cfrec
