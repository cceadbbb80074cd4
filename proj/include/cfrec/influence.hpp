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
#include <map>
#include <memory>
#include <unordered_map>
#include <vector>

#include "cfrec/model.hpp"

namespace cfrec {

struct InfluenceOptions {
  // Damping added to the averaged Hessian before solving.
  double lambda = 0.01;
  // Which parameter blocks a removed point is allowed to move.
  SubsetMode subset = SubsetMode::touched_embeddings;
  // Attention model: also drop the removed positive from the pooling set
  // when predicting the post-removal score.
  bool pool_exclusion = true;
  // Solver: direct factorization up to this many coordinates, conjugate
  // gradients beyond it.
  int dense_solver_limit = 512;
  double solve_tolerance = 1e-10;
  int cg_max_iterations = 20000;
};

// Averaged training Hessian restricted to a block subset, plus damping.
struct DampedHessian {
  std::vector<Block> blocks;
  Eigen::MatrixXd matrix;  // includes the lambda * I term
  double lambda = 0.0;

  int size() const { return static_cast<int>(matrix.rows()); }
};

// Estimated effect of removing one training point on a score gap.
struct InfluenceRecord {
  int point = -1;      // training point index, -1 when synthesized in tests
  int item = -1;       // profile item whose positive interaction is removed
  double value = 0.0;
};

// Additivity: a set of removals is estimated by the sum of its members.
double set_influence(const std::vector<InfluenceRecord>& records);

// Caching layer around one trained model: parameter deltas per removed
// point, restricted Hessian blocks, and base scores. Not thread safe.
class InfluenceEngine {
 public:
  struct Counters {
    uint64_t solves = 0;
    uint64_t score_influences = 0;
    uint64_t gap_influences = 0;
    uint64_t hessian_pairs = 0;
  };

  InfluenceEngine(const Model& model, InfluenceOptions options);

  const Model& model() const { return model_; }
  const InfluenceOptions& options() const { return options_; }

  // First-order estimate of the parameter displacement caused by dropping
  // one training point, solved through the damped restricted Hessian.
  const ParamDelta& removal_delta(int point_index);

  // Estimated change of score(user, item) caused by the removal:
  // current score minus the post-removal estimate.
  double influence_on_score(int point_index, int user, int item);

  // Estimated change of score(user, rec) - score(user, other).
  InfluenceRecord influence_on_gap(int point_index, int user, int rec_item, int other_item);

  // Restricted averaged Hessian, assembled from cached block pairs.
  Eigen::MatrixXd hessian_block(const std::vector<Block>& S);
  DampedHessian damped_hessian(const std::vector<Block>& S);

  double base_score(int user, int item);

  const Counters& counters() const { return counters_; }
  void reset_counters() { counters_ = Counters{}; }

 private:
  const Eigen::MatrixXd& pair_sum(const Block& a, const Block& b);
  const std::vector<int>& points_touching(const Block& block) const;

  const Model& model_;
  InfluenceOptions options_;
  std::unordered_map<Block, std::vector<int>, BlockHash> touch_index_;
  std::map<std::pair<Block, Block>, Eigen::MatrixXd> pair_cache_;
  std::unordered_map<int, ParamDelta> delta_cache_;
  std::unordered_map<int64_t, double> score_cache_;
  Counters counters_;
};

// Dataset with the given training points removed and per-user profiles
// rebuilt accordingly. Point order and dense identifiers are preserved.
Dataset reduced_dataset(const Dataset& base, const std::vector<int>& removed_points);

// Retrains from scratch on the reduced dataset with the identical
// configuration, including the seed.
std::unique_ptr<Model> retrain_without(const Model& model, const std::vector<int>& removed_points);

// Actual change of gap(user, rec vs other) from removing the points and
// retraining: gap at the current parameters minus the retrained gap.
double true_influence(const Model& model, const std::vector<int>& removed_points, int user,
                      int rec_item, int other_item);

}  // namespace cfrec
