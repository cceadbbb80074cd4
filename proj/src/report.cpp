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

#include "cfrec/report.hpp"

#include <cmath>
#include <fstream>

#include <fmt/core.h>

#include "cfrec/types.hpp"

namespace cfrec {

namespace {

nlohmann::json number_or_null(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;
}

nlohmann::json item_or_null(int dense, const Dataset& dataset) {
  if (dense < 0) return nullptr;
  return dataset.item_ids.at(dense);
}

nlohmann::json set_to_json(const std::vector<InfluenceRecord>& set, const Dataset& dataset) {
  nlohmann::json out = nlohmann::json::array();
  for (const InfluenceRecord& r : set) {
    out.push_back({{"item", dataset.item_ids.at(r.item)}, {"value", r.value}});
  }
  return out;
}

nlohmann::json items_to_json(const std::vector<int>& items, const Dataset& dataset) {
  nlohmann::json out = nlohmann::json::array();
  for (int item : items) out.push_back(dataset.item_ids.at(item));
  return out;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ParseError(fmt::format("cannot write '{}'", path));
  return out;
}

}  // namespace

nlohmann::json to_json(const Explanation& e, const Dataset& dataset) {
  return {{"method", e.method},
          {"k", e.k},
          {"user", dataset.user_ids.at(e.user)},
          {"rec", item_or_null(e.rec, dataset)},
          {"rec_star", item_or_null(e.rec_star, dataset)},
          {"success", e.success},
          {"set", set_to_json(e.set, dataset)},
          {"skipped", items_to_json(e.skipped, dataset)},
          {"estimated_gap_initial", number_or_null(e.estimated_gap_initial)},
          {"estimated_gap_remaining", number_or_null(e.estimated_gap_remaining)}};
}

nlohmann::json to_json(const EvalOutcome& o, const Dataset& dataset) {
  return {{"method", to_string(o.method)},
          {"k", o.k},
          {"user", dataset.user_ids.at(o.user)},
          {"rec", item_or_null(o.rec, dataset)},
          {"rec_star", item_or_null(o.rec_star, dataset)},
          {"success", o.success},
          {"verification_ran", o.verification_ran},
          {"verified", o.verified},
          {"strict_success", o.strict_success},
          {"diverged", o.diverged},
          {"new_top1", item_or_null(o.new_top1, dataset)},
          {"resumed_steps", o.resumed_steps},
          {"set_size", o.set.size()},
          {"set", set_to_json(o.set, dataset)},
          {"skipped", items_to_json(o.skipped, dataset)},
          {"estimated_gap_initial", number_or_null(o.estimated_gap_initial)},
          {"estimated_gap_remaining", number_or_null(o.estimated_gap_remaining)},
          {"estimated_set_influence", number_or_null(o.estimated_set_influence)},
          {"true_gap_influence", number_or_null(o.true_gap_influence)}};
}

nlohmann::json to_json(const OracleOutcome& o, const Dataset& dataset) {
  nlohmann::json j = {{"user", dataset.user_ids.at(o.user)},
                      {"eligible", o.eligible},
                      {"found", o.found},
                      {"retrains", o.retrains},
                      {"rec", item_or_null(o.rec, dataset)},
                      {"new_top1", item_or_null(o.new_top1, dataset)},
                      {"items", items_to_json(o.items, dataset)}};
  if (!o.reason.empty()) j["reason"] = o.reason;
  return j;
}

void write_jsonl(const std::string& path, const std::string& schema,
                 const nlohmann::json& config, const std::vector<nlohmann::json>& rows) {
  std::ofstream out = open_out(path);
  nlohmann::json meta = {{"schema", schema}, {"config", config}};
  out << meta.dump() << '\n';
  for (const nlohmann::json& row : rows) out << row.dump() << '\n';
}

void write_summary_csv(const std::string& path, const nlohmann::json& config,
                       const std::vector<EvalSummary>& rows) {
  std::ofstream out = open_out(path);
  out << "# config: " << config.dump() << '\n';
  out << "method,k,n_users,n_success,n_verified,n_strict,n_diverged,cf_rate,displaced_rate,"
         "strict_rate,mean_size,mean_size_verified,influence_rmse,influence_pearson,"
         "n_influence_pairs\n";
  for (const EvalSummary& s : rows) {
    out << fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n", to_string(s.method),
                       s.k, s.n_users, s.n_success, s.n_verified, s.n_strict, s.n_diverged,
                       s.cf_rate, s.displaced_rate, s.strict_rate, s.mean_size,
                       s.mean_size_verified, s.influence_rmse, s.influence_corr,
                       s.n_influence_pairs);
  }
}

void write_pairwise_csv(const std::string& path, const nlohmann::json& config,
                        const std::vector<PairwiseTestRow>& rows) {
  std::ofstream out = open_out(path);
  out << "# config: " << config.dump() << '\n';
  out << "method_a,method_b,k,metric,mode,statistic,p_value,n\n";
  for (const PairwiseTestRow& r : rows) {
    out << fmt::format("{},{},{},{},{},{},{},{}\n", r.method_a, r.method_b, r.k, r.metric,
                       r.mode, r.statistic, r.p_value, r.n);
  }
}

std::vector<PairwiseTestRow> pairwise_tests(const std::vector<EvalOutcome>& a,
                                            const std::vector<EvalOutcome>& b) {
  if (a.size() != b.size()) throw ContractError("pairwise_tests: outcome lists not aligned");
  if (a.empty()) throw ContractError("pairwise_tests: empty outcome lists");
  for (size_t i = 0; i < a.size(); ++i) {
    if (a[i].user != b[i].user || a[i].k != b[i].k) {
      throw ContractError("pairwise_tests: outcome lists not aligned");
    }
  }

  std::vector<PairwiseTestRow> rows;
  PairwiseTestRow base;
  base.method_a = to_string(a.front().method);
  base.method_b = to_string(b.front().method);
  base.k = a.front().k;

  std::vector<std::pair<bool, bool>> paired;
  paired.reserve(a.size());
  for (size_t i = 0; i < a.size(); ++i) paired.emplace_back(a[i].success, b[i].success);
  McNemarResult mc = mcnemar(paired);
  PairwiseTestRow success_row = base;
  success_row.metric = "success";
  success_row.mode = mc.degenerate ? "degenerate" : (mc.exact ? "mcnemar_exact" : "mcnemar_chi2");
  success_row.statistic = mc.statistic;
  success_row.p_value = mc.p_value;
  success_row.n = mc.b + mc.c;
  rows.push_back(success_row);

  std::vector<double> sizes_a;
  std::vector<double> sizes_b;
  for (size_t i = 0; i < a.size(); ++i) {
    if (a[i].success && b[i].success) {
      sizes_a.push_back(static_cast<double>(a[i].set.size()));
      sizes_b.push_back(static_cast<double>(b[i].set.size()));
    }
  }
  PairwiseTestRow size_row = base;
  size_row.metric = "set_size";
  size_row.n = static_cast<int64_t>(sizes_a.size());
  if (sizes_a.size() >= 2) {
    PairedTResult t = paired_t_less(sizes_a, sizes_b);
    size_row.mode = t.degenerate ? "degenerate" : "paired_t";
    size_row.statistic = t.t;
    size_row.p_value = t.p_value;
  } else {
    size_row.mode = "degenerate";
    size_row.statistic = 0.0;
    size_row.p_value = 1.0;
  }
  rows.push_back(size_row);
  return rows;
}

}  // namespace cfrec
