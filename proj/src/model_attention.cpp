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

#include <algorithm>
#include <vector>

#include <fmt/core.h>

#include "cfrec/types.hpp"
#include "models_detail.hpp"
#include "scalar_math.hpp"

namespace cfrec::detail {

namespace {

constexpr int kMaxDim = 64;

// History-attention scorer. For a target item with embedding q and a pooled
// history {p_j}: m_j = p_j ⊙ q, s_j = a . gelu(W m_j), alpha = softmax(s),
// score = sum_j alpha_j (p_j . q). Training pairs a positive against its
// paired negative with a logistic loss on the score difference.

template <typename T>
struct AttnPass {
  // Per pool slot, flattened by d: elementwise products, gate activations
  // and their slopes. Filled by the forward pass, consumed by backward.
  // Buffers keep their capacity across calls, so a reused pass is
  // allocation-free once warm.
  std::vector<T> m, g, gp;
  std::vector<T> s, v;
  std::vector<T> alpha, beta;
  std::vector<T> u;
  T score;
};

template <typename T>
T attn_forward(int d, const std::vector<const T*>& pool, const T* q, const T* W, const T* a,
               AttnPass<T>* pass) {
  int mcount = static_cast<int>(pool.size());
  std::vector<T>& s = pass->s;
  std::vector<T>& v = pass->v;
  std::vector<T>& m = pass->m;
  std::vector<T>& g = pass->g;
  std::vector<T>& gp = pass->gp;
  s.assign(mcount, T(0.0));
  v.assign(mcount, T(0.0));
  m.assign(static_cast<size_t>(mcount) * d, T(0.0));
  g.assign(static_cast<size_t>(mcount) * d, T(0.0));
  gp.assign(static_cast<size_t>(mcount) * d, T(0.0));
  for (int j = 0; j < mcount; ++j) {
    T* mj = m.data() + static_cast<size_t>(j) * d;
    T* gj = g.data() + static_cast<size_t>(j) * d;
    T* gpj = gp.data() + static_cast<size_t>(j) * d;
    T dot(0.0);
    for (int k = 0; k < d; ++k) {
      mj[k] = pool[j][k] * q[k];
      dot += pool[j][k] * q[k];
    }
    v[j] = dot;
    T sj(0.0);
    for (int r = 0; r < d; ++r) {
      T hr(0.0);
      for (int c = 0; c < d; ++c) hr += W[r * d + c] * mj[c];
      gj[r] = gelu(hr);
      gpj[r] = gelu_prime(hr);
      sj += a[r] * gj[r];
    }
    s[j] = sj;
  }
  int arg = 0;
  for (int j = 1; j < mcount; ++j) {
    if (value(s[j]) > value(s[arg])) arg = j;
  }
  T smax = s[arg];
  T zsum(0.0);
  pass->alpha.assign(mcount, T(0.0));
  for (int j = 0; j < mcount; ++j) {
    pass->alpha[j] = exp(s[j] - smax);
    zsum += pass->alpha[j];
  }
  T y(0.0);
  for (int j = 0; j < mcount; ++j) {
    pass->alpha[j] = pass->alpha[j] / zsum;
    y += pass->alpha[j] * v[j];
  }
  pass->beta.assign(mcount, T(0.0));
  for (int j = 0; j < mcount; ++j) pass->beta[j] = pass->alpha[j] * (v[j] - y);
  pass->score = y;
  return y;
}

// Accumulates w * d(score)/d(inputs) into the output arrays. dpool entries
// may be null for slots the caller does not need. Scratch lives in the pass.
template <typename T>
void attn_backward(int d, const std::vector<const T*>& pool, const T* q, const T* W, const T* a,
                   AttnPass<T>& pass, T w, const std::vector<T*>& dpool, T* dq, T* dW,
                   T* da) {
  int mcount = static_cast<int>(pool.size());
  std::vector<T>& u = pass.u;  // W^T (a ⊙ gelu'(h_j)) for the current slot
  u.assign(d, T(0.0));
  for (int j = 0; j < mcount; ++j) {
    const T* mj = pass.m.data() + static_cast<size_t>(j) * d;
    const T* gj = pass.g.data() + static_cast<size_t>(j) * d;
    const T* gpj = pass.gp.data() + static_cast<size_t>(j) * d;
    T alpha = pass.alpha[j];
    T beta = pass.beta[j];
    for (int c = 0; c < d; ++c) {
      T acc(0.0);
      for (int r = 0; r < d; ++r) acc += W[r * d + c] * (a[r] * gpj[r]);
      u[c] = acc;
    }
    if (da != nullptr) {
      for (int r = 0; r < d; ++r) da[r] += w * beta * gj[r];
    }
    if (dW != nullptr) {
      for (int r = 0; r < d; ++r) {
        T coef = w * beta * a[r] * gpj[r];
        for (int c = 0; c < d; ++c) dW[r * d + c] += coef * mj[c];
      }
    }
    if (dpool[j] != nullptr) {
      for (int k = 0; k < d; ++k) {
        dpool[j][k] += w * (alpha * q[k] + beta * u[k] * q[k]);
      }
    }
    if (dq != nullptr) {
      for (int k = 0; k < d; ++k) {
        dq[k] += w * (alpha * pool[j][k] + beta * u[k] * pool[j][k]);
      }
    }
  }
}

// Workspace layout for one training triple, flattened:
// pool rows | q_pos | q_neg | W | a.
template <typename T>
struct TripleView {
  int d = 0;
  int mcount = 0;
  int pos_slot = 0;
  const T* x = nullptr;

  const T* pool(int j) const { return x + static_cast<size_t>(j) * d; }
  const T* q_pos() const { return x + static_cast<size_t>(mcount) * d; }
  const T* q_neg() const { return x + static_cast<size_t>(mcount) * d + d; }
  const T* W() const { return x + static_cast<size_t>(mcount) * d + 2 * d; }
  const T* a() const { return x + static_cast<size_t>(mcount) * d + 2 * d + d * d; }
  int total() const { return mcount * d + 2 * d + d * d + d; }
};

// Reusable buffers for one triple evaluation; warm reuse is allocation-free.
template <typename T>
struct TripleScratch {
  AttnPass<T> pos, neg;
  std::vector<const T*> pool;
  std::vector<T*> dpool;
  std::vector<T> x, gx;
};

template <typename T>
T triple_gap(const TripleView<T>& in, TripleScratch<T>& ws) {
  ws.pool.assign(in.mcount, nullptr);
  for (int j = 0; j < in.mcount; ++j) ws.pool[j] = in.pool(j);
  T y_pos = attn_forward(in.d, ws.pool, in.q_pos(), in.W(), in.a(), &ws.pos);
  T y_neg = attn_forward(in.d, ws.pool, in.q_neg(), in.W(), in.a(), &ws.neg);
  return y_pos - y_neg;
}

template <typename T>
T triple_loss(const TripleView<T>& in, double l2, TripleScratch<T>& ws) {
  T gap = triple_gap(in, ws);
  T out = softplus(T(0.0) - gap);
  T reg(0.0);
  const T* pp = in.pool(in.pos_slot);
  for (int k = 0; k < in.d; ++k) {
    reg += pp[k] * pp[k] + in.q_pos()[k] * in.q_pos()[k] + in.q_neg()[k] * in.q_neg()[k] +
           in.a()[k] * in.a()[k];
  }
  for (int k = 0; k < in.d * in.d; ++k) reg += in.W()[k] * in.W()[k];
  return out + T(0.5 * l2) * reg;
}

// Gradient of triple_loss over the whole workspace; gx must be zeroed and
// aliases the same layout as in.x. Returns the loss value from the shared
// forward pass.
template <typename T>
T triple_grad(const TripleView<T>& in, double l2, T* gx, TripleScratch<T>& ws) {
  T gap = triple_gap(in, ws);
  T w = T(0.0) - sigmoid(T(0.0) - gap);  // d softplus(-gap) / d gap

  ws.dpool.assign(in.mcount, nullptr);
  for (int j = 0; j < in.mcount; ++j) {
    ws.dpool[j] = gx + static_cast<size_t>(j) * in.d;
  }
  T* gq_pos = gx + static_cast<size_t>(in.mcount) * in.d;
  T* gq_neg = gq_pos + in.d;
  T* gW = gq_neg + in.d;
  T* ga = gW + in.d * in.d;

  attn_backward(in.d, ws.pool, in.q_pos(), in.W(), in.a(), ws.pos, w, ws.dpool, gq_pos, gW, ga);
  attn_backward(in.d, ws.pool, in.q_neg(), in.W(), in.a(), ws.neg, T(0.0) - w, ws.dpool, gq_neg,
                gW, ga);

  T reg(0.0);
  T* gp_pos = gx + static_cast<size_t>(in.pos_slot) * in.d;
  const T* pp = in.pool(in.pos_slot);
  for (int k = 0; k < in.d; ++k) {
    gp_pos[k] += T(l2) * pp[k];
    gq_pos[k] += T(l2) * in.q_pos()[k];
    gq_neg[k] += T(l2) * in.q_neg()[k];
    ga[k] += T(l2) * in.a()[k];
    reg += pp[k] * pp[k] + in.q_pos()[k] * in.q_pos()[k] + in.q_neg()[k] * in.q_neg()[k] +
           in.a()[k] * in.a()[k];
  }
  for (int k = 0; k < in.d * in.d; ++k) {
    gW[k] += T(l2) * in.W()[k];
    reg += in.W()[k] * in.W()[k];
  }
  return softplus(T(0.0) - gap) + T(0.5 * l2) * reg;
}

class AttentionModel final : public Model {
 public:
  AttentionModel(std::shared_ptr<const Dataset> data, const TrainConfig& config,
                 ModelParams params, TrainStats stats)
      : Model(config, std::move(data), std::move(params), std::move(stats)) {
    if (config_.dim < 1 || config_.dim > kMaxDim) {
      throw ContractError(fmt::format("dim must be in [1, {}]", kMaxDim));
    }
    if (params_.P.rows() != data_->num_items || params_.P.cols() != config_.dim ||
        params_.Q.rows() != data_->num_items || params_.Q.cols() != config_.dim ||
        params_.W.rows() != config_.dim || params_.W.cols() != config_.dim ||
        params_.a.size() != config_.dim) {
      throw ContractError("attention parameter shapes do not match the dataset");
    }
  }

  double score(int user, int item) const override {
    check_user(user);
    check_item(item);
    return pooled_score(data_->profiles[user], item, nullptr);
  }

  double score_adjusted(int user, int item, const ParamDelta& delta,
                        int excluded_profile_item) const override {
    check_user(user);
    check_item(item);
    const std::vector<int>& profile = data_->profiles[user];
    std::vector<int> pool;
    pool.reserve(profile.size());
    for (int j : profile) {
      if (j != excluded_profile_item) pool.push_back(j);
    }
    if (excluded_profile_item >= 0 && pool.size() == profile.size()) {
      throw LookupError(
          fmt::format("item {} is not in the profile of user {}", excluded_profile_item, user));
    }
    if (pool.empty()) throw ContractError("pooling set is empty after exclusion");

    int d = config_.dim;
    std::vector<double> storage(pool.size() * d);
    std::vector<const double*> pool_ptrs(pool.size());
    for (size_t j = 0; j < pool.size(); ++j) {
      Eigen::Map<Eigen::RowVectorXd> row(storage.data() + j * d, d);
      row = params_.P.row(pool[j]);
      if (const Eigen::VectorXd* dv = delta.find(Block::hist(pool[j]))) row += dv->transpose();
      pool_ptrs[j] = storage.data() + j * d;
    }
    Eigen::VectorXd q = params_.Q.row(item);
    if (const Eigen::VectorXd* dv = delta.find(Block::item(item))) q += *dv;
    RowMatrix W = params_.W;
    if (const Eigen::VectorXd* dv = delta.find(Block::head_w())) {
      W += Eigen::Map<const RowMatrix>(dv->data(), d, d);
    }
    Eigen::VectorXd a = params_.a;
    if (const Eigen::VectorXd* dv = delta.find(Block::head_a())) a += *dv;

    AttnPass<double> pass;
    return attn_forward(d, pool_ptrs, q.data(), W.data(), a.data(), &pass);
  }

  double loss(int point_index) const override {
    check_point(point_index);
    TripleView<double> in = gather(point_index, ws_.x);
    return triple_loss(in, config_.l2_reg, ws_);
  }

  SparseGrad grad_loss(int point_index) const override {
    check_point(point_index);
    const TrainingPoint& z = data_->points[point_index];
    const std::vector<int>& profile = data_->profiles[z.user];
    TripleView<double> in = gather(point_index, ws_.x);
    std::vector<double>& gx = ws_.gx;
    gx.assign(in.total(), 0.0);
    triple_grad(in, config_.l2_reg, gx.data(), ws_);

    int d = config_.dim;
    SparseGrad g;
    g.entries.reserve(profile.size() + 4);
    for (size_t j = 0; j < profile.size(); ++j) {
      g.entries.emplace_back(Block::hist(profile[j]),
                             Eigen::Map<Eigen::VectorXd>(gx.data() + j * d, d));
    }
    g.add(Block::item(z.item), Eigen::Map<Eigen::VectorXd>(gx.data() + profile.size() * d, d));
    g.add(Block::item(z.other),
          Eigen::Map<Eigen::VectorXd>(gx.data() + profile.size() * d + d, d));
    g.entries.emplace_back(
        Block::head_w(),
        Eigen::Map<Eigen::VectorXd>(gx.data() + profile.size() * d + 2 * d, d * d));
    g.entries.emplace_back(
        Block::head_a(),
        Eigen::Map<Eigen::VectorXd>(gx.data() + profile.size() * d + 2 * d + d * d, d));
    return g;
  }

  Eigen::MatrixXd point_hessian(int point_index, const Block& row,
                                const Block& col) const override {
    check_point(point_index);
    const TrainingPoint& z = data_->points[point_index];
    const std::vector<int>& profile = data_->profiles[z.user];
    int d = config_.dim;
    auto offset_of = [&](const Block& blk) -> int {
      switch (blk.kind) {
        case Block::Kind::hist: {
          auto it = std::lower_bound(profile.begin(), profile.end(), blk.id);
          if (it == profile.end() || *it != blk.id) return -1;
          return static_cast<int>(it - profile.begin()) * d;
        }
        case Block::Kind::item:
          if (blk.id == z.item) return static_cast<int>(profile.size()) * d;
          if (blk.id == z.other) return static_cast<int>(profile.size()) * d + d;
          return -1;
        case Block::Kind::head_w:
          return static_cast<int>(profile.size()) * d + 2 * d;
        case Block::Kind::head_a:
          return static_cast<int>(profile.size()) * d + 2 * d + d * d;
        default:
          return -1;
      }
    };
    int row_off = offset_of(row);
    int col_off = offset_of(col);
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(block_size(row), block_size(col));
    if (row_off < 0 || col_off < 0) return out;

    TripleView<Dual> in = gather_dual(point_index);
    std::vector<Dual>& x = dual_ws_.x;
    std::vector<Dual>& gx = dual_ws_.gx;
    gx.resize(in.total());
    for (int c = 0; c < out.cols(); ++c) {
      x[col_off + c].d = 1.0;
      std::fill(gx.begin(), gx.end(), Dual(0.0));
      triple_grad(in, config_.l2_reg, gx.data(), dual_ws_);
      for (int r = 0; r < out.rows(); ++r) out(r, c) = gx[row_off + r].d;
      x[col_off + c].d = 0.0;
    }
    return out;
  }

  std::vector<Block> touched_blocks(int point_index) const override {
    check_point(point_index);
    const TrainingPoint& z = data_->points[point_index];
    std::vector<Block> out;
    out.reserve(data_->profiles[z.user].size() + 4);
    for (int j : data_->profiles[z.user]) out.push_back(Block::hist(j));
    out.push_back(Block::item(z.item));
    out.push_back(Block::item(z.other));
    out.push_back(Block::head_w());
    out.push_back(Block::head_a());
    return out;
  }

  std::vector<Block> removal_blocks(int point_index, SubsetMode mode) const override {
    check_point(point_index);
    const TrainingPoint& z = data_->points[point_index];
    if (mode == SubsetMode::user_side_only) return {Block::hist(z.item)};
    return {Block::hist(z.item), Block::item(z.item), Block::item(z.other)};
  }

  std::vector<double> attention_weights(int user, int item) const override {
    check_user(user);
    check_item(item);
    std::vector<double> alpha;
    pooled_score(data_->profiles[user], item, &alpha);
    return alpha;
  }

  double score_without(int user, int item, const std::vector<int>& removed) const override {
    check_user(user);
    check_item(item);
    const std::vector<int>& profile = data_->profiles[user];
    std::vector<int> pool;
    pool.reserve(profile.size());
    for (int j : removed) {
      if (!std::binary_search(profile.begin(), profile.end(), j)) {
        throw LookupError(fmt::format("item {} is not in the profile of user {}", j, user));
      }
    }
    for (int j : profile) {
      if (std::find(removed.begin(), removed.end(), j) == removed.end()) pool.push_back(j);
    }
    if (pool.empty()) throw ContractError("pooling set is empty after removal");
    return pooled_score(pool, item, nullptr);
  }

 protected:
  double accumulate_grad(int point_index, ModelParams& grad) const override {
    const TrainingPoint& z = data_->points[point_index];
    const std::vector<int>& profile = data_->profiles[z.user];
    TripleView<double> in = gather(point_index, ws_.x);
    std::vector<double>& gx = ws_.gx;
    gx.assign(in.total(), 0.0);
    double out = triple_grad(in, config_.l2_reg, gx.data(), ws_);

    int d = config_.dim;
    for (size_t j = 0; j < profile.size(); ++j) {
      grad.P.row(profile[j]) += Eigen::Map<Eigen::RowVectorXd>(gx.data() + j * d, d);
    }
    grad.Q.row(z.item) += Eigen::Map<Eigen::RowVectorXd>(gx.data() + profile.size() * d, d);
    grad.Q.row(z.other) +=
        Eigen::Map<Eigen::RowVectorXd>(gx.data() + profile.size() * d + d, d);
    grad.W += Eigen::Map<RowMatrix>(gx.data() + profile.size() * d + 2 * d, d, d);
    grad.a += Eigen::Map<Eigen::VectorXd>(gx.data() + profile.size() * d + 2 * d + d * d, d);
    return out;
  }

 private:
  double pooled_score(const std::vector<int>& pool, int item, std::vector<double>* alpha) const {
    if (pool.empty()) throw ContractError("user has an empty profile");
    std::vector<const double*>& pool_ptrs = score_ptrs_;
    pool_ptrs.assign(pool.size(), nullptr);
    for (size_t j = 0; j < pool.size(); ++j) pool_ptrs[j] = params_.P.row(pool[j]).data();
    double y = attn_forward(config_.dim, pool_ptrs, params_.Q.row(item).data(),
                            params_.W.data(), params_.a.data(), &score_pass_);
    if (alpha != nullptr) *alpha = score_pass_.alpha;
    return y;
  }

  // Copies the triple's inputs into a flat workspace.
  TripleView<double> gather(int point_index, std::vector<double>& x) const {
    const TrainingPoint& z = data_->points[point_index];
    const std::vector<int>& profile = data_->profiles[z.user];
    if (profile.empty()) throw ContractError("user has an empty profile");
    auto it = std::lower_bound(profile.begin(), profile.end(), z.item);
    if (it == profile.end() || *it != z.item) {
      throw ContractError("triple's positive item is missing from the profile");
    }
    TripleView<double> in;
    in.d = config_.dim;
    in.mcount = static_cast<int>(profile.size());
    in.pos_slot = static_cast<int>(it - profile.begin());
    x.resize(in.total());
    int d = config_.dim;
    for (int j = 0; j < in.mcount; ++j) {
      Eigen::Map<Eigen::RowVectorXd>(x.data() + static_cast<size_t>(j) * d, d) =
          params_.P.row(profile[j]);
    }
    size_t off = static_cast<size_t>(in.mcount) * d;
    Eigen::Map<Eigen::RowVectorXd>(x.data() + off, d) = params_.Q.row(z.item);
    Eigen::Map<Eigen::RowVectorXd>(x.data() + off + d, d) = params_.Q.row(z.other);
    Eigen::Map<RowMatrix>(x.data() + off + 2 * d, d, d) = params_.W;
    Eigen::Map<Eigen::VectorXd>(x.data() + off + 2 * d + d * d, d) = params_.a;
    in.x = x.data();
    return in;
  }

  TripleView<Dual> gather_dual(int point_index) const {
    TripleView<double> in = gather(point_index, ws_.x);
    dual_ws_.x.assign(ws_.x.begin(), ws_.x.end());
    TripleView<Dual> out;
    out.d = in.d;
    out.mcount = in.mcount;
    out.pos_slot = in.pos_slot;
    out.x = dual_ws_.x.data();
    return out;
  }

  // Scratch reused across calls; instances are not safe for concurrent use.
  mutable TripleScratch<double> ws_;
  mutable TripleScratch<Dual> dual_ws_;
  mutable AttnPass<double> score_pass_;
  mutable std::vector<const double*> score_ptrs_;
};

}  // namespace

std::unique_ptr<Model> make_attention_model(std::shared_ptr<const Dataset> data,
                                            const TrainConfig& config, ModelParams params,
                                            TrainStats stats) {
  return std::make_unique<AttentionModel>(std::move(data), config, std::move(params),
                                          std::move(stats));
}

}  // namespace cfrec::detail
