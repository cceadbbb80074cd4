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

#include "cfrec/influence.hpp"

#include <algorithm>
#include <set>

#include <fmt/core.h>

#include "cfrec/types.hpp"

namespace cfrec {

double set_influence(const std::vector<InfluenceRecord>& records) {
  double total = 0.0;
  for (const InfluenceRecord& r : records) total += r.value;
  return total;
}

InfluenceEngine::InfluenceEngine(const Model& model, InfluenceOptions options)
    : model_(model), options_(options) {
  if (options_.lambda < 0.0) throw ContractError("lambda must be non-negative");
  if (options_.solve_tolerance <= 0.0) throw ContractError("solve_tolerance must be positive");
  int n = static_cast<int>(model_.data().points.size());
  for (int z = 0; z < n; ++z) {
    for (const Block& b : model_.touched_blocks(z)) touch_index_[b].push_back(z);
  }
}

const std::vector<int>& InfluenceEngine::points_touching(const Block& block) const {
  static const std::vector<int> kEmpty;
  auto it = touch_index_.find(block);
  return it == touch_index_.end() ? kEmpty : it->second;
}

const Eigen::MatrixXd& InfluenceEngine::pair_sum(const Block& a, const Block& b) {
  bool flip = b < a;
  std::pair<Block, Block> key = flip ? std::make_pair(b, a) : std::make_pair(a, b);
  auto it = pair_cache_.find(key);
  if (it != pair_cache_.end()) return it->second;

  ++counters_.hessian_pairs;
  const std::vector<int>& pa = points_touching(key.first);
  const std::vector<int>& pb = points_touching(key.second);
  std::vector<int> both;
  std::set_intersection(pa.begin(), pa.end(), pb.begin(), pb.end(), std::back_inserter(both));
  Eigen::MatrixXd sum =
      Eigen::MatrixXd::Zero(model_.block_size(key.first), model_.block_size(key.second));
  for (int z : both) sum += model_.point_hessian(z, key.first, key.second);
  return pair_cache_.emplace(key, std::move(sum)).first->second;
}

Eigen::MatrixXd InfluenceEngine::hessian_block(const std::vector<Block>& S) {
  if (S.empty()) throw ContractError("hessian_block: empty block list");
  std::vector<int> offset(S.size() + 1, 0);
  for (size_t i = 0; i < S.size(); ++i) {
    for (size_t j = i + 1; j < S.size(); ++j) {
      if (S[i] == S[j]) throw ContractError("hessian_block: duplicate block");
    }
    offset[i + 1] = offset[i] + model_.block_size(S[i]);
  }
  int dim = offset[S.size()];
  Eigen::MatrixXd H(dim, dim);
  for (size_t i = 0; i < S.size(); ++i) {
    for (size_t j = 0; j < S.size(); ++j) {
      const Eigen::MatrixXd& sum = pair_sum(S[i], S[j]);
      if (S[i] < S[j] || S[i] == S[j]) {
        H.block(offset[i], offset[j], sum.rows(), sum.cols()) = sum;
      } else {
        H.block(offset[i], offset[j], sum.cols(), sum.rows()) = sum.transpose();
      }
    }
  }
  H /= static_cast<double>(model_.data().points.size());
  return 0.5 * (H + H.transpose());
}

DampedHessian InfluenceEngine::damped_hessian(const std::vector<Block>& S) {
  DampedHessian out;
  out.blocks = S;
  out.lambda = options_.lambda;
  out.matrix = hessian_block(S);
  out.matrix.diagonal().array() += options_.lambda;
  return out;
}

namespace {

// Conjugate gradients on a symmetric positive definite system.
Eigen::VectorXd cg_solve(const Eigen::MatrixXd& A, const Eigen::VectorXd& rhs, double tol,
                         int max_iterations) {
  Eigen::VectorXd x = Eigen::VectorXd::Zero(rhs.size());
  Eigen::VectorXd r = rhs;
  Eigen::VectorXd p = r;
  double rr = r.squaredNorm();
  double stop = tol * tol * rhs.squaredNorm();
  for (int it = 0; it < max_iterations && rr > stop; ++it) {
    Eigen::VectorXd Ap = A * p;
    double alpha = rr / p.dot(Ap);
    x += alpha * p;
    r -= alpha * Ap;
    double rr_next = r.squaredNorm();
    p = r + (rr_next / rr) * p;
    rr = rr_next;
  }
  return x;
}

}  // namespace

const ParamDelta& InfluenceEngine::removal_delta(int point_index) {
  auto hit = delta_cache_.find(point_index);
  if (hit != delta_cache_.end()) return hit->second;

  std::vector<Block> S = model_.removal_blocks(point_index, options_.subset);
  SparseGrad grad = model_.grad_loss(point_index);
  DampedHessian H = damped_hessian(S);

  Eigen::VectorXd g(H.size());
  int off = 0;
  for (const Block& b : S) {
    int sz = model_.block_size(b);
    const Eigen::VectorXd* gb = grad.find(b);
    if (gb != nullptr) {
      g.segment(off, sz) = *gb;
    } else {
      g.segment(off, sz).setZero();
    }
    off += sz;
  }

  ++counters_.solves;
  Eigen::VectorXd x;
  if (g.norm() == 0.0) {
    x = Eigen::VectorXd::Zero(H.size());
  } else {
    if (H.size() <= options_.dense_solver_limit) {
      x = H.matrix.ldlt().solve(g);
    } else {
      x = cg_solve(H.matrix, g, options_.solve_tolerance, options_.cg_max_iterations);
    }
    double rel = (H.matrix * x - g).norm() / g.norm();
    if (!(rel <= options_.solve_tolerance)) {
      throw NumericError(fmt::format(
          "removal_delta: solve for point {} did not converge (relative residual {:.3e})",
          point_index, rel));
    }
  }
  x /= static_cast<double>(model_.data().points.size());

  ParamDelta delta;
  off = 0;
  for (const Block& b : S) {
    int sz = model_.block_size(b);
    delta.entries.emplace_back(b, x.segment(off, sz));
    off += sz;
  }
  return delta_cache_.emplace(point_index, std::move(delta)).first->second;
}

double InfluenceEngine::base_score(int user, int item) {
  int64_t key = (static_cast<int64_t>(user) << 32) | static_cast<uint32_t>(item);
  auto it = score_cache_.find(key);
  if (it != score_cache_.end()) return it->second;
  double s = model_.score(user, item);
  score_cache_.emplace(key, s);
  return s;
}

double InfluenceEngine::influence_on_score(int point_index, int user, int item) {
  ++counters_.score_influences;
  const ParamDelta& delta = removal_delta(point_index);
  const TrainingPoint& z = model_.data().points[point_index];
  int excluded = -1;
  if (model_.kind() == ModelKind::attention && options_.pool_exclusion) excluded = z.item;
  double adjusted = model_.score_adjusted(user, item, delta, excluded);
  return base_score(user, item) - adjusted;
}

InfluenceRecord InfluenceEngine::influence_on_gap(int point_index, int user, int rec_item,
                                                  int other_item) {
  ++counters_.gap_influences;
  const ParamDelta& delta = removal_delta(point_index);
  const TrainingPoint& z = model_.data().points[point_index];
  int excluded = -1;
  if (model_.kind() == ModelKind::attention && options_.pool_exclusion) excluded = z.item;
  double gap_now = base_score(user, rec_item) - base_score(user, other_item);
  double gap_then = model_.score_adjusted(user, rec_item, delta, excluded) -
                    model_.score_adjusted(user, other_item, delta, excluded);
  return {point_index, z.item, gap_now - gap_then};
}

Dataset reduced_dataset(const Dataset& base, const std::vector<int>& removed_points) {
  std::set<int> removed(removed_points.begin(), removed_points.end());
  int n = static_cast<int>(base.points.size());
  for (int idx : removed) {
    if (idx < 0 || idx >= n) throw LookupError(fmt::format("training point {} out of range", idx));
  }
  if (static_cast<int>(removed.size()) >= n) {
    throw ContractError("cannot remove every training point");
  }

  Dataset out;
  out.kind = base.kind;
  out.num_users = base.num_users;
  out.num_items = base.num_items;
  out.user_ids = base.user_ids;
  out.item_ids = base.item_ids;
  out.threshold = base.threshold;
  out.min_pos = base.min_pos;
  out.min_neg = base.min_neg;
  out.pair_seed = base.pair_seed;
  out.points.reserve(base.points.size() - removed.size());
  for (int idx = 0; idx < n; ++idx) {
    if (!removed.count(idx)) out.points.push_back(base.points[idx]);
  }

  if (base.kind == DatasetKind::pointwise) {
    out.profiles.assign(base.num_users, {});
    out.negatives.assign(base.num_users, {});
    for (const TrainingPoint& z : out.points) {
      (z.label == 1 ? out.profiles : out.negatives)[z.user].push_back(z.item);
    }
    for (int u = 0; u < out.num_users; ++u) {
      std::sort(out.profiles[u].begin(), out.profiles[u].end());
      std::sort(out.negatives[u].begin(), out.negatives[u].end());
    }
  } else {
    // A removed triple takes its positive out of the pooling profile; the
    // negative side stays a plain interaction.
    out.profiles.assign(base.num_users, {});
    out.negatives = base.negatives;
    for (const TrainingPoint& z : out.points) out.profiles[z.user].push_back(z.item);
    for (int u = 0; u < out.num_users; ++u) {
      std::sort(out.profiles[u].begin(), out.profiles[u].end());
      out.profiles[u].erase(std::unique(out.profiles[u].begin(), out.profiles[u].end()),
                            out.profiles[u].end());
    }
  }
  out.finalize();
  return out;
}

std::unique_ptr<Model> retrain_without(const Model& model,
                                       const std::vector<int>& removed_points) {
  auto reduced = std::make_shared<Dataset>(reduced_dataset(model.data(), removed_points));
  return train(std::move(reduced), model.config());
}

double true_influence(const Model& model, const std::vector<int>& removed_points, int user,
                      int rec_item, int other_item) {
  std::unique_ptr<Model> retrained = retrain_without(model, removed_points);
  double before = model.score(user, rec_item) - model.score(user, other_item);
  double after = retrained->score(user, rec_item) - retrained->score(user, other_item);
  return before - after;
}

}  // namespace cfrec
