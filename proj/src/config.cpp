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

#include "cfrec/config.hpp"

#include "cfrec/types.hpp"

namespace cfrec {

InfluenceOptions RunConfig::influence_options() const {
  InfluenceOptions opts;
  opts.lambda = lambda;
  opts.pool_exclusion = pool_exclusion;
  if (subset == "touched") {
    opts.subset = SubsetMode::touched_embeddings;
  } else if (subset == "user") {
    opts.subset = SubsetMode::user_side_only;
  } else {
    throw ContractError("subset must be 'touched' or 'user'");
  }
  return opts;
}

TrainConfig RunConfig::train_config(ModelKind kind) const {
  TrainConfig cfg;
  cfg.model = kind;
  cfg.dim = dim;
  cfg.learning_rate = learning_rate;
  cfg.epochs = epochs;
  cfg.l2_reg = l2_reg;
  cfg.init_scale = init_scale;
  cfg.seed = seed;
  return cfg;
}

nlohmann::json resolved_config(const RunConfig& c, const std::string& command) {
  return {{"command", command},
          {"ratings", c.ratings},
          {"dataset", c.dataset},
          {"checkpoint", c.checkpoint},
          {"out_dir", c.out_dir},
          {"kind", c.kind},
          {"threshold", c.threshold},
          {"min_pos", c.min_pos},
          {"min_neg", c.min_neg},
          {"seed", c.seed},
          {"dim", c.dim},
          {"learning_rate", c.learning_rate},
          {"epochs", c.epochs},
          {"l2_reg", c.l2_reg},
          {"init_scale", c.init_scale},
          {"lambda", c.lambda},
          {"pool_exclusion", c.pool_exclusion},
          {"subset", c.subset},
          {"methods", c.methods},
          {"k_values", c.k_values},
          {"users", c.users},
          {"verify", c.verify},
          {"retry_budget", c.retry_budget},
          {"jobs", c.jobs},
          {"oracle_max_profile", c.oracle_max_profile},
          {"oracle_max_size", c.oracle_max_size}};
}

}  // namespace cfrec
