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

#include <fmt/core.h>

#include "cfrec/types.hpp"
#include "models_detail.hpp"
#include "scalar_math.hpp"

namespace cfrec::detail {

namespace {

constexpr int kMaxDim = 64;

// Dot-product model with an elementwise head: score = h . (p ⊙ q) + b,
// binary cross entropy against the interaction label. Every expression is
// templated so dual numbers produce exact second derivatives.

template <typename T>
T pw_score(const T* p, const T* q, const T* h, T b, int d) {
  T s = b;
  for (int k = 0; k < d; ++k) s += h[k] * p[k] * q[k];
  return s;
}

template <typename T>
T pw_loss(const T* p, const T* q, const T* h, T b, int y, double l2, int d) {
  T s = pw_score(p, q, h, b, d);
  T out = softplus(s) - T(static_cast<double>(y)) * s;
  T reg = b * b;
  for (int k = 0; k < d; ++k) reg += p[k] * p[k] + q[k] * q[k] + h[k] * h[k];
  return out + T(0.5 * l2) * reg;
}

template <typename T>
void pw_grad(const T* p, const T* q, const T* h, T b, int y, double l2, int d,
             T* gp, T* gq, T* gh, T* gb) {
  T s = pw_score(p, q, h, b, d);
  T w = sigmoid(s) - T(static_cast<double>(y));
  for (int k = 0; k < d; ++k) {
    gp[k] = w * h[k] * q[k] + T(l2) * p[k];
    gq[k] = w * h[k] * p[k] + T(l2) * q[k];
    gh[k] = w * p[k] * q[k] + T(l2) * h[k];
  }
  *gb = w + T(l2) * b;
}

class PointwiseModel final : public Model {
 public:
  PointwiseModel(std::shared_ptr<const Dataset> data, const TrainConfig& config,
                 ModelParams params, TrainStats stats)
      : Model(config, std::move(data), std::move(params), std::move(stats)) {
    if (config_.dim < 1 || config_.dim > kMaxDim) {
      throw ContractError(fmt::format("dim must be in [1, {}]", kMaxDim));
    }
    if (params_.P.rows() != data_->num_users || params_.P.cols() != config_.dim ||
        params_.Q.rows() != data_->num_items || params_.Q.cols() != config_.dim ||
        params_.h.size() != config_.dim) {
      throw ContractError("pointwise parameter shapes do not match the dataset");
    }
  }

  double score(int user, int item) const override {
    check_user(user);
    check_item(item);
    return (params_.h.array() * params_.P.row(user).transpose().array() *
            params_.Q.row(item).transpose().array())
               .sum() +
           params_.b;
  }

  double score_adjusted(int user, int item, const ParamDelta& delta,
                        int excluded_profile_item) const override {
    check_user(user);
    check_item(item);
    if (excluded_profile_item >= 0) {
      throw ContractError("pooling exclusion does not apply to the pointwise model");
    }
    Eigen::VectorXd p = params_.P.row(user);
    Eigen::VectorXd q = params_.Q.row(item);
    Eigen::VectorXd h = params_.h;
    double b = params_.b;
    if (const Eigen::VectorXd* dv = delta.find(Block::user(user))) p += *dv;
    if (const Eigen::VectorXd* dv = delta.find(Block::item(item))) q += *dv;
    if (const Eigen::VectorXd* dv = delta.find(Block::head_h())) h += *dv;
    if (const Eigen::VectorXd* dv = delta.find(Block::head_b())) b += (*dv)(0);
    return (h.array() * p.array() * q.array()).sum() + b;
  }

  double loss(int point_index) const override {
    check_point(point_index);
    const TrainingPoint& z = data_->points[point_index];
    return pw_loss(params_.P.row(z.user).data(), params_.Q.row(z.item).data(),
                   params_.h.data(), params_.b, z.label, config_.l2_reg, config_.dim);
  }

  SparseGrad grad_loss(int point_index) const override {
    check_point(point_index);
    const TrainingPoint& z = data_->points[point_index];
    int d = config_.dim;
    double gp[kMaxDim], gq[kMaxDim], gh[kMaxDim], gb;
    pw_grad(params_.P.row(z.user).data(), params_.Q.row(z.item).data(), params_.h.data(),
            params_.b, z.label, config_.l2_reg, d, gp, gq, gh, &gb);
    SparseGrad g;
    g.entries.reserve(4);
    g.entries.emplace_back(Block::user(z.user), Eigen::Map<Eigen::VectorXd>(gp, d));
    g.entries.emplace_back(Block::item(z.item), Eigen::Map<Eigen::VectorXd>(gq, d));
    g.entries.emplace_back(Block::head_h(), Eigen::Map<Eigen::VectorXd>(gh, d));
    g.entries.emplace_back(Block::head_b(), Eigen::VectorXd::Constant(1, gb));
    return g;
  }

  Eigen::MatrixXd point_hessian(int point_index, const Block& row,
                                const Block& col) const override {
    check_point(point_index);
    const TrainingPoint& z = data_->points[point_index];
    int d = config_.dim;
    // Workspace layout: p | q | h | b.
    auto offset_of = [&](const Block& blk) -> int {
      switch (blk.kind) {
        case Block::Kind::user:
          return blk.id == z.user ? 0 : -1;
        case Block::Kind::item:
          return blk.id == z.item ? d : -1;
        case Block::Kind::head_h:
          return 2 * d;
        case Block::Kind::head_b:
          return 3 * d;
        default:
          return -1;
      }
    };
    int row_off = offset_of(row);
    int col_off = offset_of(col);
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(block_size(row), block_size(col));
    if (row_off < 0 || col_off < 0) return out;

    Dual x[3 * kMaxDim + 1];
    for (int k = 0; k < d; ++k) {
      x[k] = params_.P(z.user, k);
      x[d + k] = params_.Q(z.item, k);
      x[2 * d + k] = params_.h(k);
    }
    x[3 * d] = params_.b;
    Dual gx[3 * kMaxDim + 1];
    for (int c = 0; c < out.cols(); ++c) {
      x[col_off + c].d = 1.0;
      pw_grad(x, x + d, x + 2 * d, x[3 * d], z.label, config_.l2_reg, d, gx, gx + d,
              gx + 2 * d, gx + 3 * d);
      for (int r = 0; r < out.rows(); ++r) out(r, c) = gx[row_off + r].d;
      x[col_off + c].d = 0.0;
    }
    return out;
  }

  std::vector<Block> touched_blocks(int point_index) const override {
    check_point(point_index);
    const TrainingPoint& z = data_->points[point_index];
    return {Block::user(z.user), Block::item(z.item), Block::head_h(), Block::head_b()};
  }

  std::vector<Block> removal_blocks(int point_index, SubsetMode mode) const override {
    check_point(point_index);
    const TrainingPoint& z = data_->points[point_index];
    if (mode == SubsetMode::user_side_only) return {Block::user(z.user)};
    return {Block::user(z.user), Block::item(z.item)};
  }

 protected:
  double accumulate_grad(int point_index, ModelParams& grad) const override {
    const TrainingPoint& z = data_->points[point_index];
    int d = config_.dim;
    double gp[kMaxDim], gq[kMaxDim], gh[kMaxDim], gb;
    pw_grad(params_.P.row(z.user).data(), params_.Q.row(z.item).data(), params_.h.data(),
            params_.b, z.label, config_.l2_reg, d, gp, gq, gh, &gb);
    grad.P.row(z.user) += Eigen::Map<Eigen::RowVectorXd>(gp, d);
    grad.Q.row(z.item) += Eigen::Map<Eigen::RowVectorXd>(gq, d);
    grad.h += Eigen::Map<Eigen::VectorXd>(gh, d);
    grad.b += gb;
    return pw_loss(params_.P.row(z.user).data(), params_.Q.row(z.item).data(), params_.h.data(),
                   params_.b, z.label, config_.l2_reg, d);
  }
};

}  // namespace

std::unique_ptr<Model> make_pointwise_model(std::shared_ptr<const Dataset> data,
                                            const TrainConfig& config, ModelParams params,
                                            TrainStats stats) {
  return std::make_unique<PointwiseModel>(std::move(data), config, std::move(params),
                                          std::move(stats));
}

}  // namespace cfrec::detail
