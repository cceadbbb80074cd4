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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <memory>
#include <random>
#include <vector>

#include "cfrec/data.hpp"
#include "cfrec/model.hpp"
#include "cfrec/types.hpp"
#include "scalar_math.hpp"
#include "support/synthetic.hpp"

using cfrec::Block;
using cfrec::Dataset;
using cfrec::DatasetSkeleton;
using cfrec::ModelKind;
using cfrec::ModelParams;
using cfrec::ParamDelta;
using cfrec::SubsetMode;
using cfrec::TrainConfig;

namespace {

std::shared_ptr<const Dataset> shared(Dataset d) {
  return std::make_shared<Dataset>(std::move(d));
}

TrainConfig config_for(ModelKind kind, int d, double l2) {
  TrainConfig c;
  c.model = kind;
  c.dim = d;
  c.l2_reg = l2;
  return c;
}

// One user with positives {0, 1} and negative {2}, paired for training.
std::shared_ptr<const Dataset> tiny_pairwise() {
  DatasetSkeleton sk;
  sk.num_users = 1;
  sk.num_items = 3;
  sk.user_ids = {10};
  sk.item_ids = {20, 21, 22};
  sk.positives = {{0, 1}};
  sk.negatives = {{2}};
  return shared(cfrec::pair_negatives(sk, 5));
}

std::unique_ptr<cfrec::Model> random_model(ModelKind kind, std::shared_ptr<const Dataset> data,
                                           int d, double l2, double scale, uint64_t seed) {
  int rows = kind == ModelKind::pointwise ? data->num_users : data->num_items;
  ModelParams p = testsup::random_params(kind, rows, data->num_items, d, scale, seed);
  return cfrec::make_model(std::move(data), config_for(kind, d, l2), std::move(p),
                           cfrec::TrainStats{});
}

}  // namespace

TEST_CASE("pointwise score is the gated dot product plus bias") {
  DatasetSkeleton sk;
  sk.num_users = 1;
  sk.num_items = 2;
  sk.user_ids = {1};
  sk.item_ids = {2, 3};
  sk.positives = {{0}};
  sk.negatives = {{1}};
  auto data = shared(cfrec::build_pointwise(sk));

  ModelParams p;
  p.P.resize(1, 2);
  p.P << 1.0, 2.0;
  p.Q.resize(2, 2);
  p.Q << 3.0, -1.0, 0.5, 0.25;
  p.h.resize(2);
  p.h << 1.0, 1.0;
  p.b = 0.0;
  auto m = cfrec::make_model(data, config_for(ModelKind::pointwise, 2, 0.0), p,
                             cfrec::TrainStats{});
  // 1*1*3 + 1*2*(-1) = 1
  CHECK(m->score(0, 0) == doctest::Approx(1.0).epsilon(1e-15));
  // 1*1*0.5 + 1*2*0.25 = 1
  CHECK(m->score(0, 1) == doctest::Approx(1.0).epsilon(1e-15));

  p.b = 0.5;
  auto mb = cfrec::make_model(data, config_for(ModelKind::pointwise, 2, 0.0), p,
                              cfrec::TrainStats{});
  CHECK(mb->score(0, 0) == doctest::Approx(1.5).epsilon(1e-15));

  // Point 0 is (user 0, item 0, label 1): loss = softplus(1) - 1 plus the
  // regularization share 0.5 * l2 * (|p|^2 + |q|^2 + |h|^2 + b^2).
  auto ml = cfrec::make_model(data, config_for(ModelKind::pointwise, 2, 0.2), p,
                              cfrec::TrainStats{});
  double reg = 0.5 * 0.2 * ((1 + 4) + (9 + 1) + (1 + 1) + 0.25);
  double base = std::log1p(std::exp(1.5)) - 1.5;
  CHECK(ml->loss(0) == doctest::Approx(base + reg).epsilon(1e-14));
}

TEST_CASE("zero parameters give the coin-flip loss for both labels") {
  auto data = shared(testsup::random_pointwise(2, 4, 3, 11));
  ModelParams p;
  p.P = cfrec::RowMatrix::Zero(2, 3);
  p.Q = cfrec::RowMatrix::Zero(4, 3);
  p.h = Eigen::VectorXd::Zero(3);
  auto m = cfrec::make_model(data, config_for(ModelKind::pointwise, 3, 0.7), p,
                             cfrec::TrainStats{});
  for (size_t z = 0; z < data->points.size(); ++z) {
    CHECK(m->loss(static_cast<int>(z)) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
  }
}

TEST_CASE("analytic gradients match central differences on random instances") {
  std::mt19937_64 rng(2024);
  for (ModelKind kind : {ModelKind::pointwise, ModelKind::attention}) {
    for (int trial = 0; trial < 60; ++trial) {
      int users = 2 + static_cast<int>(rng() % 7);
      int items = 4 + static_cast<int>(rng() % 13);
      int per_user = 2 + static_cast<int>(rng() % std::min(5, items - 1));
      int d = 1 + static_cast<int>(rng() % 6);
      double l2 = (trial % 3 == 0) ? 0.0 : 0.07 * (trial % 5);
      auto data = shared(kind == ModelKind::pointwise
                             ? testsup::random_pointwise(users, items, per_user, rng())
                             : testsup::random_pairwise(users, items, per_user, rng()));
      auto m = random_model(kind, data, d, l2, 0.4, rng());
      int point = static_cast<int>(rng() % data->points.size());
      cfrec::SparseGrad g = m->grad_loss(point);
      CAPTURE(trial);
      CAPTURE(point);
      for (const auto& [block, vec] : g.entries) {
        for (int off = 0; off < vec.size(); ++off) {
          double fd = testsup::fd_loss_derivative(*m, point, {block, off}, 1e-5);
          CHECK(std::abs(vec(off) - fd) < 1e-4);
        }
      }
    }
  }
}

TEST_CASE("analytic second derivatives match differenced gradients") {
  std::mt19937_64 rng(711);
  for (ModelKind kind : {ModelKind::pointwise, ModelKind::attention}) {
    for (int trial = 0; trial < 25; ++trial) {
      int users = 2 + static_cast<int>(rng() % 5);
      int items = 4 + static_cast<int>(rng() % 9);
      int per_user = 2 + static_cast<int>(rng() % 4);
      int d = 1 + static_cast<int>(rng() % 5);
      double l2 = 0.05 * (trial % 4);
      auto data = shared(kind == ModelKind::pointwise
                             ? testsup::random_pointwise(users, items, per_user, rng())
                             : testsup::random_pairwise(users, items, per_user, rng()));
      auto m = random_model(kind, data, d, l2, 0.4, rng());
      int point = static_cast<int>(rng() % data->points.size());
      std::vector<Block> touched = m->touched_blocks(point);
      CAPTURE(trial);
      for (int pair = 0; pair < 6; ++pair) {
        const Block& br = touched[rng() % touched.size()];
        const Block& bc = touched[rng() % touched.size()];
        Eigen::MatrixXd h = m->point_hessian(point, br, bc);
        REQUIRE(h.rows() == m->block_size(br));
        REQUIRE(h.cols() == m->block_size(bc));
        int r = static_cast<int>(rng() % h.rows());
        int c = static_cast<int>(rng() % h.cols());
        double fd = testsup::fd_hessian_entry(*m, point, {br, r}, {bc, c}, 1e-5);
        CHECK(std::abs(h(r, c) - fd) < 1e-3);
        // The transposed pair must be the transposed matrix.
        Eigen::MatrixXd ht = m->point_hessian(point, bc, br);
        CHECK((h - ht.transpose()).cwiseAbs().maxCoeff() < 1e-12);
      }
    }
  }
}

TEST_CASE("point hessian is zero for untouched blocks") {
  auto data = shared(testsup::random_pointwise(4, 8, 3, 3));
  auto m = random_model(ModelKind::pointwise, data, 3, 0.1, 0.4, 9);
  int point = 0;
  int user = data->points[point].user;
  int other_user = (user + 1) % data->num_users;
  Eigen::MatrixXd h = m->point_hessian(point, Block::user(other_user), Block::head_h());
  CHECK(h.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("attention weights form a distribution over the profile") {
  auto data = shared(testsup::random_pairwise(5, 12, 5, 21));
  auto m = random_model(ModelKind::attention, data, 4, 0.05, 0.5, 33);
  for (int u = 0; u < data->num_users; ++u) {
    std::vector<double> alpha = m->attention_weights(u, 0);
    REQUIRE(alpha.size() == data->profiles[u].size());
    double sum = 0.0;
    for (double w : alpha) {
      CHECK(w > 0.0);
      sum += w;
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    // The pooled score is the weight-averaged history/item dot product.
    double expected = 0.0;
    for (size_t j = 0; j < alpha.size(); ++j) {
      expected += alpha[j] * m->params().P.row(data->profiles[u][j]).dot(m->params().Q.row(0));
    }
    CHECK(m->score(u, 0) == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("zero gate matrix means uniform attention") {
  auto data = tiny_pairwise();
  ModelParams p = testsup::random_params(ModelKind::attention, 3, 3, 2, 0.6, 4);
  p.W.setZero();
  auto m = cfrec::make_model(data, config_for(ModelKind::attention, 2, 0.0), p,
                             cfrec::TrainStats{});
  std::vector<double> alpha = m->attention_weights(0, 2);
  REQUIRE(alpha.size() == 2);
  CHECK(alpha[0] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(alpha[1] == doctest::Approx(0.5).epsilon(1e-15));
  double expected = 0.5 * (p.P.row(0).dot(p.Q.row(2)) + p.P.row(1).dot(p.Q.row(2)));
  CHECK(m->score(0, 2) == doctest::Approx(expected).epsilon(1e-13));
}

TEST_CASE("fixed-parameter rescoring drops items from the pooling set") {
  auto data = tiny_pairwise();
  ModelParams p = testsup::random_params(ModelKind::attention, 3, 3, 3, 0.6, 8);
  auto m = cfrec::make_model(data, config_for(ModelKind::attention, 3, 0.0), p,
                             cfrec::TrainStats{});
  CHECK(m->score_without(0, 2, {}) == doctest::Approx(m->score(0, 2)).epsilon(1e-15));
  // A singleton pool degenerates to a plain dot product.
  double solo = m->score_without(0, 2, {0});
  CHECK(solo == doctest::Approx(p.P.row(1).dot(p.Q.row(2))).epsilon(1e-13));
  CHECK_THROWS_AS(m->score_without(0, 2, {0, 1}), cfrec::ContractError);
  CHECK_THROWS_AS(m->score_without(0, 2, {2}), cfrec::LookupError);
}

TEST_CASE("pooling interfaces reject the pointwise model") {
  auto data = shared(testsup::random_pointwise(3, 6, 3, 2));
  auto m = random_model(ModelKind::pointwise, data, 2, 0.0, 0.3, 5);
  CHECK_THROWS_AS(m->attention_weights(0, 0), cfrec::ContractError);
  CHECK_THROWS_AS(m->score_without(0, 0, {}), cfrec::ContractError);
  ParamDelta none;
  CHECK_THROWS_AS(m->score_adjusted(0, 0, none, 1), cfrec::ContractError);
}

TEST_CASE("score_adjusted with an empty delta is the plain score") {
  ParamDelta none;
  auto pw_data = shared(testsup::random_pointwise(4, 9, 4, 31));
  auto pw = random_model(ModelKind::pointwise, pw_data, 3, 0.1, 0.4, 6);
  CHECK(pw->score_adjusted(1, 2, none, -1) == doctest::Approx(pw->score(1, 2)).epsilon(1e-15));

  auto at_data = shared(testsup::random_pairwise(4, 9, 4, 32));
  auto at = random_model(ModelKind::attention, at_data, 3, 0.1, 0.4, 7);
  CHECK(at->score_adjusted(1, 2, none, -1) == doctest::Approx(at->score(1, 2)).epsilon(1e-15));
  // Exclusion without a delta must agree with fixed-parameter rescoring.
  // Needs a profile that stays non-empty after the drop.
  int u = -1;
  for (int cand = 0; cand < at_data->num_users; ++cand) {
    if (at_data->profiles[cand].size() >= 2) {
      u = cand;
      break;
    }
  }
  REQUIRE(u >= 0);
  int dropped = at_data->profiles[u][0];
  CHECK(at->score_adjusted(u, 2, none, dropped) ==
        doctest::Approx(at->score_without(u, 2, {dropped})).epsilon(1e-13));
}

TEST_CASE("score_adjusted equals the score of explicitly shifted parameters") {
  std::mt19937_64 rng(87);
  std::normal_distribution<double> gauss(0.0, 0.3);

  auto pw_data = shared(testsup::random_pointwise(5, 10, 4, 41));
  auto pw = random_model(ModelKind::pointwise, pw_data, 4, 0.0, 0.4, 11);
  Eigen::VectorXd du(4), db(1);
  for (int k = 0; k < 4; ++k) du(k) = gauss(rng);
  db(0) = gauss(rng);
  ParamDelta delta;
  delta.add(Block::user(2), du);
  delta.add(Block::head_b(), db);
  ModelParams shifted = pw->params();
  shifted.P.row(2) += du.transpose();
  shifted.b += db(0);
  auto rebuilt = cfrec::make_model(pw_data, pw->config(), shifted, cfrec::TrainStats{});
  CHECK(pw->score_adjusted(2, 3, delta, -1) ==
        doctest::Approx(rebuilt->score(2, 3)).epsilon(1e-13));

  auto at_data = shared(testsup::random_pairwise(5, 10, 4, 42));
  auto at = random_model(ModelKind::attention, at_data, 3, 0.0, 0.4, 12);
  int hist_item = at_data->profiles[2][0];
  Eigen::VectorXd dh(3), da(3);
  for (int k = 0; k < 3; ++k) dh(k) = gauss(rng);
  for (int k = 0; k < 3; ++k) da(k) = gauss(rng);
  ParamDelta adelta;
  adelta.add(Block::hist(hist_item), dh);
  adelta.add(Block::head_a(), da);
  ModelParams ashift = at->params();
  ashift.P.row(hist_item) += dh.transpose();
  ashift.a += da;
  auto arebuilt = cfrec::make_model(at_data, at->config(), ashift, cfrec::TrainStats{});
  CHECK(at->score_adjusted(2, 3, adelta, -1) ==
        doctest::Approx(arebuilt->score(2, 3)).epsilon(1e-12));
}

TEST_CASE("scalar kit matches hand values and dual derivatives") {
  using cfrec::detail::Dual;
  CHECK(cfrec::detail::gelu(0.0) == 0.0);
  CHECK(cfrec::detail::gelu(1.0) == doctest::Approx(0.8413447460685429).epsilon(1e-15));
  CHECK(cfrec::detail::gelu(-1.0) == doctest::Approx(-0.15865525393145705).epsilon(1e-14));
  CHECK(cfrec::detail::gelu_prime(0.0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(cfrec::detail::softplus(1000.0) == doctest::Approx(1000.0));
  CHECK(cfrec::detail::softplus(-1000.0) == 0.0);
  CHECK(cfrec::detail::sigmoid(0.0) == 0.5);
  CHECK(cfrec::detail::sigmoid(40.0) <= 1.0);
  CHECK(cfrec::detail::sigmoid(-40.0) > 0.0);
  for (double x : {-2.0, -0.3, 0.0, 0.9, 3.1}) {
    Dual seeded(x, 1.0);
    CHECK(cfrec::detail::gelu(seeded).d ==
          doctest::Approx(cfrec::detail::gelu_prime(x)).epsilon(1e-14));
    double fd = (cfrec::detail::softplus(x + 1e-6) - cfrec::detail::softplus(x - 1e-6)) / 2e-6;
    CHECK(cfrec::detail::softplus(seeded).d == doctest::Approx(fd).epsilon(1e-8));
  }
}

TEST_CASE("training separates a single positive-negative pair") {
  DatasetSkeleton sk;
  sk.num_users = 1;
  sk.num_items = 2;
  sk.user_ids = {1};
  sk.item_ids = {2, 3};
  sk.positives = {{0}};
  sk.negatives = {{1}};
  auto data = shared(cfrec::build_pointwise(sk));
  TrainConfig c = config_for(ModelKind::pointwise, 1, 0.0);
  c.epochs = 2000;
  auto m = cfrec::train(data, c);
  CHECK(m->score(0, 0) > 0.5);
  CHECK(m->score(0, 1) < -0.5);
  CHECK(m->stats().final_loss < 0.2);
  CHECK(m->stats().epoch_loss.size() == 2000);
  // Full-batch descent on a smooth objective decreases monotonically here.
  for (size_t e = 1; e < m->stats().epoch_loss.size(); ++e) {
    CHECK(m->stats().epoch_loss[e] <= m->stats().epoch_loss[e - 1] + 1e-12);
  }
}

TEST_CASE("stronger regularization shrinks the learned parameters") {
  auto data = shared(testsup::random_pointwise(6, 12, 5, 77));
  TrainConfig weak = config_for(ModelKind::pointwise, 3, 0.001);
  weak.epochs = 300;
  TrainConfig strong = weak;
  strong.l2_reg = 1.0;
  auto mw = cfrec::train(data, weak);
  auto ms = cfrec::train(data, strong);
  CHECK(ms->params().P.norm() < mw->params().P.norm());
  CHECK(ms->params().Q.norm() < mw->params().Q.norm());
  CHECK(ms->params().P.norm() < 0.5);
}

TEST_CASE("training is deterministic in the seed") {
  auto data = shared(testsup::random_pairwise(4, 10, 4, 55));
  TrainConfig c = config_for(ModelKind::attention, 3, 0.01);
  c.epochs = 40;
  auto a = cfrec::train(data, c);
  auto b = cfrec::train(data, c);
  CHECK(a->params().P == b->params().P);
  CHECK(a->params().Q == b->params().Q);
  CHECK(a->params().W == b->params().W);
  CHECK(a->params().a == b->params().a);
  CHECK(a->stats().final_loss == b->stats().final_loss);
  c.seed = 8;
  auto other = cfrec::train(data, c);
  CHECK(a->params().P != other->params().P);
}

TEST_CASE("training rejects bad configurations and diverging steps") {
  auto data = shared(testsup::random_pointwise(3, 6, 3, 61));
  TrainConfig c = config_for(ModelKind::pointwise, 2, 0.01);
  c.epochs = 0;
  CHECK_THROWS_AS(cfrec::train(data, c), cfrec::ContractError);
  c.epochs = 50;
  c.learning_rate = 0.0;
  CHECK_THROWS_AS(cfrec::train(data, c), cfrec::ContractError);
  c.learning_rate = 1e6;
  CHECK_THROWS_AS(cfrec::train(data, c), cfrec::NumericError);
  TrainConfig mismatched = config_for(ModelKind::attention, 2, 0.01);
  CHECK_THROWS_AS(cfrec::train(data, mismatched), cfrec::ContractError);
}

TEST_CASE("checkpoints round trip exactly and refuse foreign datasets") {
  auto data = shared(testsup::random_pairwise(4, 9, 4, 91));
  TrainConfig c = config_for(ModelKind::attention, 3, 0.01);
  c.epochs = 30;
  auto m = cfrec::train(data, c);
  const char* path = "model_roundtrip_test.json";
  cfrec::save_model(*m, path);
  auto loaded = cfrec::load_model(path, data);
  CHECK(loaded->params().P == m->params().P);
  CHECK(loaded->params().Q == m->params().Q);
  CHECK(loaded->params().W == m->params().W);
  CHECK(loaded->params().a == m->params().a);
  CHECK(loaded->config().dim == 3);
  CHECK(loaded->stats().final_loss == m->stats().final_loss);
  CHECK(loaded->score(0, 0) == m->score(0, 0));

  auto foreign = shared(testsup::random_pairwise(4, 9, 4, 92));
  CHECK_THROWS_AS(cfrec::load_model(path, foreign), cfrec::ParseError);
  CHECK_THROWS_AS(cfrec::load_model("does_not_exist.json", data), cfrec::ParseError);
  std::remove(path);
}

TEST_CASE("topk excludes interacted items and breaks ties downward") {
  DatasetSkeleton sk;
  sk.num_users = 1;
  sk.num_items = 5;
  sk.user_ids = {1};
  sk.item_ids = {10, 11, 12, 13, 14};
  sk.positives = {{0}};
  sk.negatives = {{3}};
  auto data = shared(cfrec::build_pointwise(sk));
  ModelParams p;
  p.P = cfrec::RowMatrix::Zero(1, 2);
  p.Q = cfrec::RowMatrix::Zero(5, 2);
  p.h = Eigen::VectorXd::Zero(2);
  auto m = cfrec::make_model(data, config_for(ModelKind::pointwise, 2, 0.0), p,
                             cfrec::TrainStats{});
  // All scores tie at zero; interacted items 0 and 3 never appear.
  auto top = m->topk(0, 2);
  REQUIRE(top.size() == 2);
  CHECK(top[0].item == 1);
  CHECK(top[1].item == 2);
  auto all = m->topk(0, 10);
  REQUIRE(all.size() == 3);
  CHECK(all[2].item == 4);
  auto unrestricted = m->topk(0, 2, {});
  CHECK(unrestricted[0].item == 0);
  CHECK_THROWS_AS(m->topk(0, 0), cfrec::ContractError);
}

TEST_CASE("block sizes follow the parameter shapes") {
  auto pw_data = shared(testsup::random_pointwise(3, 6, 3, 7));
  auto pw = random_model(ModelKind::pointwise, pw_data, 4, 0.0, 0.3, 2);
  CHECK(pw->block_size(Block::user(0)) == 4);
  CHECK(pw->block_size(Block::item(1)) == 4);
  CHECK(pw->block_size(Block::head_h()) == 4);
  CHECK(pw->block_size(Block::head_b()) == 1);

  auto at_data = shared(testsup::random_pairwise(3, 6, 3, 7));
  auto at = random_model(ModelKind::attention, at_data, 3, 0.0, 0.3, 2);
  CHECK(at->block_size(Block::hist(0)) == 3);
  CHECK(at->block_size(Block::item(0)) == 3);
  CHECK(at->block_size(Block::head_w()) == 9);
  CHECK(at->block_size(Block::head_a()) == 3);
}

TEST_CASE("out-of-range accessors raise lookup errors") {
  auto data = shared(testsup::random_pointwise(3, 6, 3, 19));
  auto m = random_model(ModelKind::pointwise, data, 2, 0.0, 0.3, 3);
  CHECK_THROWS_AS(m->score(-1, 0), cfrec::LookupError);
  CHECK_THROWS_AS(m->score(3, 0), cfrec::LookupError);
  CHECK_THROWS_AS(m->score(0, 6), cfrec::LookupError);
  CHECK_THROWS_AS(m->loss(-1), cfrec::LookupError);
  CHECK_THROWS_AS(m->loss(static_cast<int>(data->points.size())), cfrec::LookupError);
}

TEST_CASE("model construction validates dataset kind and shapes") {
  auto pw_data = shared(testsup::random_pointwise(3, 6, 3, 23));
  ModelParams p = testsup::random_params(ModelKind::attention, 6, 6, 2, 0.3, 1);
  CHECK_THROWS_AS(cfrec::make_model(pw_data, config_for(ModelKind::attention, 2, 0.0), p,
                                    cfrec::TrainStats{}),
                  cfrec::ContractError);
  ModelParams bad = testsup::random_params(ModelKind::pointwise, 2, 6, 2, 0.3, 1);
  CHECK_THROWS_AS(cfrec::make_model(pw_data, config_for(ModelKind::pointwise, 2, 0.0), bad,
                                    cfrec::TrainStats{}),
                  cfrec::ContractError);
}

TEST_CASE("removal blocks depend on the subset mode") {
  auto pw_data = shared(testsup::random_pointwise(3, 6, 3, 29));
  auto pw = random_model(ModelKind::pointwise, pw_data, 2, 0.0, 0.3, 4);
  const auto& z = pw_data->points[0];
  auto touched = pw->removal_blocks(0, SubsetMode::touched_embeddings);
  REQUIRE(touched.size() == 2);
  CHECK(touched[0] == Block::user(z.user));
  CHECK(touched[1] == Block::item(z.item));
  auto user_only = pw->removal_blocks(0, SubsetMode::user_side_only);
  REQUIRE(user_only.size() == 1);
  CHECK(user_only[0] == Block::user(z.user));

  auto at_data = shared(testsup::random_pairwise(3, 6, 3, 29));
  auto at = random_model(ModelKind::attention, at_data, 2, 0.0, 0.3, 4);
  const auto& t = at_data->points[0];
  auto at_touched = at->removal_blocks(0, SubsetMode::touched_embeddings);
  REQUIRE(at_touched.size() == 3);
  CHECK(at_touched[0] == Block::hist(t.item));
  CHECK(at_touched[1] == Block::item(t.item));
  CHECK(at_touched[2] == Block::item(t.other));
  auto at_user = at->removal_blocks(0, SubsetMode::user_side_only);
  REQUIRE(at_user.size() == 1);
  CHECK(at_user[0] == Block::hist(t.item));
}
