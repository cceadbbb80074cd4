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
#include <string>
#include <vector>

#include <json.hpp>

#include "cfrec/influence.hpp"
#include "cfrec/model.hpp"

namespace cfrec {

// Fully resolved command-line run: every knob with its default. The
// resolved state is embedded into each artifact for reproducibility.
struct RunConfig {
  std::string ratings;
  std::string dataset;
  std::string checkpoint;
  std::string out_dir = ".";
  std::string kind = "both";  // ingest: pointwise, pairwise or both

  int threshold = 3;
  int min_pos = 10;
  int min_neg = 10;
  uint64_t seed = 7;

  int dim = 6;
  double learning_rate = 1.0;
  int epochs = 800;
  double l2_reg = 0.01;
  double init_scale = 0.3;

  double lambda = 0.01;
  bool pool_exclusion = true;
  std::string subset = "touched";  // or "user"

  std::vector<std::string> methods = {"accent"};
  std::vector<int> k_values = {5};
  std::vector<int> users;  // original ids; empty selects everyone
  bool verify = true;
  int retry_budget = 2;
  int jobs = 1;

  int oracle_max_profile = 12;
  int oracle_max_size = 3;

  InfluenceOptions influence_options() const;
  TrainConfig train_config(ModelKind kind) const;
};

nlohmann::json resolved_config(const RunConfig& config, const std::string& command);

}  // namespace cfrec
