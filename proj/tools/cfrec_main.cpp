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

// Command-line front end: ingest ratings, train the stand-in recommenders,
// produce counterfactual explanations, evaluate the competing methods and
// compute exhaustive ground truth on small instances.
//
// Exit codes: 0 success, 2 unusable input or bad usage, 3 unknown
// user/item/point, 4 numerical failure.

#include <filesystem>
#include <fstream>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/core.h>
#include <json.hpp>

#include "cfrec/config.hpp"
#include "cfrec/data.hpp"
#include "cfrec/eval.hpp"
#include "cfrec/explain.hpp"
#include "cfrec/influence.hpp"
#include "cfrec/model.hpp"
#include "cfrec/report.hpp"
#include "cfrec/types.hpp"

namespace {

using cfrec::RunConfig;

std::string join_path(const std::string& dir, const std::string& file) {
  return (std::filesystem::path(dir) / file).string();
}

void ensure_out_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw cfrec::ParseError(fmt::format("cannot create output directory '{}'", dir));
}

struct LoadedModel {
  std::shared_ptr<const cfrec::Dataset> dataset;
  std::unique_ptr<cfrec::Model> model;
};

LoadedModel load_pair(const RunConfig& cfg) {
  auto dataset = std::make_shared<cfrec::Dataset>(cfrec::load_dataset(cfg.dataset));
  auto model = cfrec::load_model(cfg.checkpoint, dataset);
  return {std::move(dataset), std::move(model)};
}

std::vector<cfrec::Method> resolve_methods(const RunConfig& cfg, cfrec::ModelKind kind) {
  std::vector<cfrec::Method> out;
  for (const std::string& name : cfg.methods) {
    cfrec::Method m = cfrec::method_from_string(name);
    if (!cfrec::method_applicable(m, kind)) {
      throw cfrec::ContractError(
          fmt::format("method '{}' requires the attention model", name));
    }
    out.push_back(m);
  }
  if (out.empty()) throw cfrec::ContractError("no methods selected");
  return out;
}

std::vector<int> resolve_users(const RunConfig& cfg, const cfrec::Dataset& dataset) {
  std::vector<int> users;
  if (cfg.users.empty()) {
    users.resize(dataset.num_users);
    for (int u = 0; u < dataset.num_users; ++u) users[u] = u;
  } else {
    for (int original : cfg.users) users.push_back(dataset.user_dense(original));
  }
  return users;
}

int cmd_ingest(const RunConfig& cfg) {
  ensure_out_dir(cfg.out_dir);
  std::vector<cfrec::Rating> ratings = cfrec::load_ratings(cfg.ratings);
  std::vector<cfrec::Interaction> interactions = cfrec::binarize(ratings, cfg.threshold);
  cfrec::DatasetSkeleton skeleton =
      cfrec::prune_users(interactions, cfg.min_pos, cfg.min_neg);
  skeleton.threshold = cfg.threshold;
  fmt::print("pruned to {} users, {} items\n", skeleton.num_users, skeleton.num_items);

  if (cfg.kind == "pointwise" || cfg.kind == "both") {
    cfrec::Dataset d = cfrec::build_pointwise(skeleton);
    std::string path = join_path(cfg.out_dir, "dataset_pointwise.json");
    cfrec::save_dataset(d, path);
    fmt::print("pointwise: {} points -> {}\n", d.points.size(), path);
  }
  if (cfg.kind == "pairwise" || cfg.kind == "both") {
    cfrec::Dataset d = cfrec::pair_negatives(skeleton, cfg.seed);
    std::string path = join_path(cfg.out_dir, "dataset_pairwise.json");
    cfrec::save_dataset(d, path);
    fmt::print("pairwise: {} points -> {}\n", d.points.size(), path);
  }
  if (cfg.kind != "pointwise" && cfg.kind != "pairwise" && cfg.kind != "both") {
    throw cfrec::ContractError("kind must be pointwise, pairwise or both");
  }
  return 0;
}

int cmd_train(const RunConfig& cfg) {
  ensure_out_dir(cfg.out_dir);
  auto dataset = std::make_shared<cfrec::Dataset>(cfrec::load_dataset(cfg.dataset));
  cfrec::ModelKind kind = dataset->kind == cfrec::DatasetKind::pointwise
                              ? cfrec::ModelKind::pointwise
                              : cfrec::ModelKind::attention;
  std::unique_ptr<cfrec::Model> model = cfrec::train(dataset, cfg.train_config(kind));
  std::string path =
      join_path(cfg.out_dir, fmt::format("checkpoint_{}.json", cfrec::to_string(kind)));
  cfrec::save_model(*model, path);
  fmt::print("{} model: final loss {:.6f}, gradient norm {:.3e} -> {}\n",
             cfrec::to_string(kind), model->stats().final_loss,
             model->stats().final_grad_norm, path);
  return 0;
}

int cmd_explain(const RunConfig& cfg) {
  ensure_out_dir(cfg.out_dir);
  LoadedModel lm = load_pair(cfg);
  std::vector<cfrec::Method> methods = resolve_methods(cfg, lm.model->kind());
  std::vector<int> users = resolve_users(cfg, *lm.dataset);

  cfrec::InfluenceEngine engine(*lm.model, cfg.influence_options());
  std::vector<nlohmann::json> rows;
  for (int k : cfg.k_values) {
    for (cfrec::Method method : methods) {
      for (int user : users) {
        cfrec::ExplainInputs inputs = cfrec::build_inputs(*lm.model, user, k);
        cfrec::Explanation e = cfrec::run_method(method, *lm.model, engine, inputs);
        rows.push_back(cfrec::to_json(e, *lm.dataset));
      }
    }
  }
  std::string path = join_path(cfg.out_dir, "explanations.jsonl");
  cfrec::write_jsonl(path, "cfrec-explanations-v1", cfrec::resolved_config(cfg, "explain"),
                     rows);
  fmt::print("{} explanations -> {}\n", rows.size(), path);
  return 0;
}

int cmd_evaluate(const RunConfig& cfg) {
  ensure_out_dir(cfg.out_dir);
  LoadedModel lm = load_pair(cfg);
  std::vector<cfrec::Method> methods = resolve_methods(cfg, lm.model->kind());

  cfrec::InfluenceEngine engine(*lm.model, cfg.influence_options());
  cfrec::RetrainCache cache;
  std::vector<nlohmann::json> outcome_rows;
  std::vector<cfrec::EvalSummary> summaries;
  std::vector<cfrec::PairwiseTestRow> tests;
  for (int k : cfg.k_values) {
    std::vector<std::vector<cfrec::EvalOutcome>> per_method;
    for (cfrec::Method method : methods) {
      cfrec::EvalOptions opts;
      opts.k = k;
      opts.verify = cfg.verify;
      opts.retry_budget = cfg.retry_budget;
      opts.jobs = cfg.jobs;
      auto [outcomes, summary] = cfrec::evaluate(*lm.model, engine, method, opts, cache);
      fmt::print("{} k={}: {}/{} explained, mean size {:.2f}\n", cfrec::to_string(method), k,
                 summary.n_success, summary.n_users, summary.mean_size);
      for (const cfrec::EvalOutcome& o : outcomes) {
        outcome_rows.push_back(cfrec::to_json(o, *lm.dataset));
      }
      summaries.push_back(summary);
      per_method.push_back(std::move(outcomes));
    }
    for (size_t i = 0; i < per_method.size(); ++i) {
      for (size_t j = i + 1; j < per_method.size(); ++j) {
        std::vector<cfrec::PairwiseTestRow> rows =
            cfrec::pairwise_tests(per_method[i], per_method[j]);
        tests.insert(tests.end(), rows.begin(), rows.end());
      }
    }
  }

  nlohmann::json config = cfrec::resolved_config(cfg, "evaluate");
  cfrec::write_jsonl(join_path(cfg.out_dir, "outcomes.jsonl"), "cfrec-outcomes-v1", config,
                     outcome_rows);
  cfrec::write_summary_csv(join_path(cfg.out_dir, "summary.csv"), config, summaries);
  cfrec::write_pairwise_csv(join_path(cfg.out_dir, "pairwise.csv"), config, tests);
  fmt::print("{} retrains -> {}\n", cache.computed(), join_path(cfg.out_dir, "summary.csv"));
  return 0;
}

int cmd_oracle(const RunConfig& cfg) {
  ensure_out_dir(cfg.out_dir);
  LoadedModel lm = load_pair(cfg);
  if (cfg.methods.size() != 1) {
    throw cfrec::ContractError("oracle compares against exactly one method");
  }
  cfrec::Method method = resolve_methods(cfg, lm.model->kind()).front();
  int k = cfg.k_values.front();

  cfrec::InfluenceEngine engine(*lm.model, cfg.influence_options());
  cfrec::RetrainCache cache;
  cfrec::EvalOptions opts;
  opts.k = k;
  opts.verify = true;
  opts.retry_budget = cfg.retry_budget;
  opts.jobs = cfg.jobs;
  auto [outcomes, summary] = cfrec::evaluate(*lm.model, engine, method, opts, cache);

  std::vector<nlohmann::json> rows;
  int eligible = 0, found = 0, comparable = 0, dominated = 0;
  for (int u = 0; u < lm.dataset->num_users; ++u) {
    cfrec::OracleOutcome oracle = cfrec::exhaustive_counterfactual(
        *lm.model, u, cfg.oracle_max_profile, cfg.oracle_max_size, cache);
    nlohmann::json row = cfrec::to_json(oracle, *lm.dataset);
    const cfrec::EvalOutcome& o = outcomes[u];
    row["method"] = {{"name", cfrec::to_string(method)},
                     {"success", o.success},
                     {"verified", o.verified},
                     {"set_size", o.set.size()}};
    if (oracle.eligible) {
      ++eligible;
      if (oracle.found) ++found;
      if (oracle.found && o.success && o.verified) {
        ++comparable;
        if (static_cast<int>(oracle.items.size()) <= static_cast<int>(o.set.size())) {
          ++dominated;
        }
      }
    }
    rows.push_back(std::move(row));
  }
  nlohmann::json aggregate = {{"aggregate",
                               {{"eligible", eligible},
                                {"found", found},
                                {"comparable", comparable},
                                {"oracle_not_larger", dominated}}}};
  rows.push_back(std::move(aggregate));
  std::string path = join_path(cfg.out_dir, "oracle.jsonl");
  cfrec::write_jsonl(path, "cfrec-oracle-v1", cfrec::resolved_config(cfg, "oracle"), rows);
  fmt::print("oracle: {} eligible, {} found, {} retrains -> {}\n", eligible, found,
             cache.computed(), path);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"counterfactual explanation laboratory for small recommenders"};
  app.require_subcommand(1);
  RunConfig cfg;
  std::string config_path;

  auto add_common = [&cfg, &config_path](CLI::App* sub) {
    sub->add_option("--config", config_path, "key=value file; command-line flags win");
    sub->add_option("--out", cfg.out_dir, "output directory")->envname("CFREC_OUT_DIR");
  };
  auto add_influence = [&cfg](CLI::App* sub) {
    sub->add_option("--lambda", cfg.lambda, "Hessian damping");
    sub->add_flag("!--no-pool-exclusion", cfg.pool_exclusion,
                  "keep removed items in the attention pool");
    sub->add_option("--subset", cfg.subset, "movable blocks: touched or user");
  };

  CLI::App* ingest = app.add_subcommand("ingest", "build dataset artifacts from ratings");
  add_common(ingest);
  ingest->add_option("--ratings", cfg.ratings, "whitespace separated ratings file")->required();
  ingest->add_option("--kind", cfg.kind, "pointwise, pairwise or both");
  ingest->add_option("--threshold", cfg.threshold, "positive rating threshold");
  ingest->add_option("--min-pos", cfg.min_pos, "minimum positives per kept user");
  ingest->add_option("--min-neg", cfg.min_neg, "minimum negatives per kept user");
  ingest->add_option("--seed", cfg.seed, "seed for the pairing fallback");

  CLI::App* train = app.add_subcommand("train", "train a model on a dataset artifact");
  add_common(train);
  train->add_option("--dataset", cfg.dataset, "dataset artifact")->required();
  train->add_option("--dim", cfg.dim, "embedding dimension");
  train->add_option("--lr", cfg.learning_rate, "learning rate");
  train->add_option("--epochs", cfg.epochs, "full-batch epochs");
  train->add_option("--l2", cfg.l2_reg, "per-point L2 regularization");
  train->add_option("--init-scale", cfg.init_scale, "initialization standard deviation");
  train->add_option("--seed", cfg.seed, "initialization seed");

  CLI::App* explain = app.add_subcommand("explain", "explain recommendations for users");
  add_common(explain);
  add_influence(explain);
  explain->add_option("--dataset", cfg.dataset, "dataset artifact")->required();
  explain->add_option("--checkpoint", cfg.checkpoint, "model checkpoint")->required();
  explain->add_option("--method", cfg.methods, "methods to run")->delimiter(',');
  explain->add_option("--k", cfg.k_values, "top-k sizes")->delimiter(',');
  explain->add_option("--user", cfg.users, "original user ids; all users when omitted")
      ->delimiter(',');

  CLI::App* evaluate = app.add_subcommand("evaluate", "evaluate methods with retraining");
  add_common(evaluate);
  add_influence(evaluate);
  evaluate->add_option("--dataset", cfg.dataset, "dataset artifact")->required();
  evaluate->add_option("--checkpoint", cfg.checkpoint, "model checkpoint")->required();
  evaluate->add_option("--methods", cfg.methods, "methods to compare")->delimiter(',');
  evaluate->add_option("--k", cfg.k_values, "top-k sizes")->delimiter(',');
  evaluate->add_flag("!--no-verify", cfg.verify, "skip retraining verification");
  evaluate->add_option("--retry-budget", cfg.retry_budget,
                       "extra removals after failed verification");
  evaluate->add_option("--jobs", cfg.jobs, "worker threads for retraining");

  CLI::App* oracle = app.add_subcommand("oracle", "exhaustive smallest counterfactual sets");
  add_common(oracle);
  add_influence(oracle);
  oracle->add_option("--dataset", cfg.dataset, "dataset artifact")->required();
  oracle->add_option("--checkpoint", cfg.checkpoint, "model checkpoint")->required();
  oracle->add_option("--method", cfg.methods, "method to compare against")->delimiter(',');
  oracle->add_option("--k", cfg.k_values, "top-k size for the method")->delimiter(',');
  oracle->add_option("--max-size", cfg.oracle_max_size, "largest removal set to try");
  oracle->add_option("--max-profile", cfg.oracle_max_profile,
                     "skip users with bigger profiles");
  oracle->add_option("--retry-budget", cfg.retry_budget,
                     "extra removals after failed verification");
  oracle->add_option("--jobs", cfg.jobs, "worker threads for retraining");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  // Config files are layered under the flags by replaying them through the
  // parsed subcommand: values only land on options the command line left
  // untouched.
  if (!config_path.empty()) {
    std::ifstream file(config_path);
    if (!file.is_open()) {
      fmt::print(stderr, "error: cannot open config file '{}'\n", config_path);
      return 2;
    }
    try {
      app.get_subcommands().front()->parse_from_stream(file);
    } catch (const CLI::ParseError& e) {
      int code = app.exit(e);
      return code == 0 ? 0 : 2;
    }
  }

  try {
    if (ingest->parsed()) return cmd_ingest(cfg);
    if (train->parsed()) return cmd_train(cfg);
    if (explain->parsed()) return cmd_explain(cfg);
    if (evaluate->parsed()) return cmd_evaluate(cfg);
    if (oracle->parsed()) return cmd_oracle(cfg);
    return 2;
  } catch (const cfrec::ParseError& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 2;
  } catch (const cfrec::ContractError& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 2;
  } catch (const cfrec::LookupError& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 3;
  } catch (const cfrec::NumericError& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 4;
  }
}
