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

#include <Eigen/Dense>
#include <compare>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "cfrec/data.hpp"

namespace cfrec {

enum class ModelKind { pointwise, attention };

std::string to_string(ModelKind kind);
ModelKind model_kind_from_string(const std::string& s);

// Identifies one parameter group. Embedding blocks carry the row index;
// head blocks use id 0. `user` is the per-user row of the pointwise model,
// `hist` the per-item history row of the attention model.
struct Block {
  enum class Kind : int { user = 0, hist = 1, item = 2, head_h = 3, head_b = 4, head_w = 5, head_a = 6 };
  Kind kind = Kind::user;
  int id = 0;

  auto operator<=>(const Block&) const = default;

  static Block user(int u) { return {Kind::user, u}; }
  static Block hist(int i) { return {Kind::hist, i}; }
  static Block item(int i) { return {Kind::item, i}; }
  static Block head_h() { return {Kind::head_h, 0}; }
  static Block head_b() { return {Kind::head_b, 0}; }
  static Block head_w() { return {Kind::head_w, 0}; }
  static Block head_a() { return {Kind::head_a, 0}; }
};

struct BlockHash {
  size_t operator()(const Block& b) const {
    return std::hash<int64_t>()((static_cast<int64_t>(b.kind) << 32) ^ static_cast<uint32_t>(b.id));
  }
};

// Sparse vector over parameter blocks. Doubles as a gradient restricted to
// the blocks a point touches and as a parameter displacement.
struct SparseGrad {
  std::vector<std::pair<Block, Eigen::VectorXd>> entries;

  const Eigen::VectorXd* find(const Block& block) const;
  // Accumulates into the block, creating it when absent.
  void add(const Block& block, const Eigen::VectorXd& value);
  double squared_norm() const;
};

using ParamDelta = SparseGrad;

struct TrainConfig {
  ModelKind model = ModelKind::pointwise;
  int dim = 6;
  double learning_rate = 1.0;
  int epochs = 800;
  double l2_reg = 0.01;
  double init_scale = 0.3;
  uint64_t seed = 7;
};

// Embedding tables are accessed row-wise throughout, so parameters are kept
// row-major.
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Raw parameter storage. The pointwise model uses P (per user), Q, h, b;
// the attention model uses P (per item, history side), Q, W, a.
struct ModelParams {
  RowMatrix P;
  RowMatrix Q;
  Eigen::VectorXd h;
  double b = 0.0;
  RowMatrix W;
  Eigen::VectorXd a;
};

struct TrainStats {
  std::vector<double> epoch_loss;
  double final_loss = 0.0;
  double final_grad_norm = 0.0;
};

struct ItemScore {
  int item = 0;
  double score = 0.0;
};

// Which parameter blocks a removed training point is allowed to move.
enum class SubsetMode {
  touched_embeddings,  // every embedding row the point touches directly
  user_side_only,      // only the user-side row (ablation)
};

class Model {
 public:
  virtual ~Model() = default;

  ModelKind kind() const { return config_.model; }
  const TrainConfig& config() const { return config_; }
  const Dataset& data() const { return *data_; }
  std::shared_ptr<const Dataset> data_ptr() const { return data_; }
  const ModelParams& params() const { return params_; }
  const TrainStats& stats() const { return stats_; }
  int dim() const { return config_.dim; }

  // Dimensionality of one parameter block.
  int block_size(const Block& block) const;

  virtual double score(int user, int item) const = 0;

  // Score after shifting parameters by delta. For the attention model an
  // excluded profile item (>= 0) is also dropped from the pooling set.
  virtual double score_adjusted(int user, int item, const ParamDelta& delta,
                                int excluded_profile_item) const = 0;

  // Per-point training loss, including this point's regularization share.
  virtual double loss(int point_index) const = 0;

  // Exact gradient of loss() over the touched blocks.
  virtual SparseGrad grad_loss(int point_index) const = 0;

  // Exact second derivative of loss() for one block pair. Zero when the
  // point does not touch both blocks.
  virtual Eigen::MatrixXd point_hessian(int point_index, const Block& row,
                                        const Block& col) const = 0;

  // Average Hessian of the training objective restricted to the given
  // blocks, symmetrized. Order of S defines the coordinate layout.
  Eigen::MatrixXd hessian_block(const std::vector<Block>& S) const;

  virtual std::vector<Block> touched_blocks(int point_index) const = 0;
  virtual std::vector<Block> removal_blocks(int point_index, SubsetMode mode) const = 0;

  // Attention pooling weights over the user's profile, profile order.
  // Pointwise models do not support this.
  virtual std::vector<double> attention_weights(int user, int item) const;

  // Score with the given profile items dropped from the pooling set,
  // parameters untouched. Attention only.
  virtual double score_without(int user, int item, const std::vector<int>& removed) const;

  // Top-k items by score, ties to the smaller id, interacted items of the
  // user excluded.
  std::vector<ItemScore> topk(int user, int k) const;
  std::vector<ItemScore> topk(int user, int k, const std::vector<int>& excluded_sorted) const;

  friend std::unique_ptr<Model> train(std::shared_ptr<const Dataset> data,
                                      const TrainConfig& config);

 protected:
  Model(TrainConfig config, std::shared_ptr<const Dataset> data, ModelParams params,
        TrainStats stats);

  // Adds d loss(z) / d theta into grad and returns loss(z).
  virtual double accumulate_grad(int point_index, ModelParams& grad) const = 0;

  void check_user(int user) const;
  void check_item(int item) const;
  void check_point(int point_index) const;

  TrainConfig config_;
  std::shared_ptr<const Dataset> data_;
  ModelParams params_;
  TrainStats stats_;
};

// Trains from scratch with deterministic initialization and full-batch
// fixed-step gradient descent. Throws NumericError when the loss stops
// being finite.
std::unique_ptr<Model> train(std::shared_ptr<const Dataset> data, const TrainConfig& config);

// Rebuilds a model instance around existing parameters.
std::unique_ptr<Model> make_model(std::shared_ptr<const Dataset> data, const TrainConfig& config,
                                  ModelParams params, TrainStats stats);

// Checkpoint round trip, schema cfrec-model-v1. Loading verifies that the
// dataset matches the one the checkpoint was trained against.
void save_model(const Model& model, const std::string& path);
std::unique_ptr<Model> load_model(const std::string& path, std::shared_ptr<const Dataset> data);

// Fingerprint binding a checkpoint to its dataset.
uint64_t dataset_fingerprint(const Dataset& dataset);

}  // namespace cfrec
