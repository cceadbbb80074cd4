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

#include <cmath>

#include <fmt/core.h>

#include "cfrec/model.hpp"
#include "cfrec/rng.hpp"
#include "cfrec/types.hpp"
#include "models_detail.hpp"

namespace cfrec {

namespace {

void validate_config(const TrainConfig& config, const Dataset& data) {
  if (config.dim < 1) throw ContractError("dim must be positive");
  if (config.learning_rate <= 0.0) throw ContractError("learning_rate must be positive");
  if (config.epochs < 1) throw ContractError("epochs must be positive");
  if (config.l2_reg < 0.0) throw ContractError("l2_reg must be non-negative");
  if (config.init_scale <= 0.0) throw ContractError("init_scale must be positive");
  bool kinds_match = (config.model == ModelKind::pointwise) ==
                     (data.kind == DatasetKind::pointwise);
  if (!kinds_match) {
    throw ContractError(fmt::format("{} model cannot train on a {} dataset",
                                    to_string(config.model), to_string(data.kind)));
  }
}

// Fills every table from one seeded stream in a fixed order, so the
// initialization is identical across runs and platforms.
ModelParams init_params(const TrainConfig& config, const Dataset& data) {
  GaussianSource rng(substream_seed(config.seed, "init"));
  int d = config.dim;
  double s = config.init_scale;
  ModelParams p;
  auto fill = [&](RowMatrix& m, int rows, int cols) {
    m.resize(rows, cols);
    for (int r = 0; r < rows; ++r) {
      for (int c = 0; c < cols; ++c) m(r, c) = rng.next(s);
    }
  };
  if (config.model == ModelKind::pointwise) {
    fill(p.P, data.num_users, d);
    fill(p.Q, data.num_items, d);
    p.h.resize(d);
    for (int k = 0; k < d; ++k) p.h(k) = rng.next(s);
    p.b = 0.0;
  } else {
    fill(p.P, data.num_items, d);
    fill(p.Q, data.num_items, d);
    fill(p.W, d, d);
    p.a.resize(d);
    for (int k = 0; k < d; ++k) p.a(k) = rng.next(s);
  }
  return p;
}

ModelParams zero_like(const ModelParams& p) {
  ModelParams g;
  g.P = RowMatrix::Zero(p.P.rows(), p.P.cols());
  g.Q = RowMatrix::Zero(p.Q.rows(), p.Q.cols());
  if (p.h.size() > 0) g.h = Eigen::VectorXd::Zero(p.h.size());
  g.b = 0.0;
  if (p.W.size() > 0) g.W = RowMatrix::Zero(p.W.rows(), p.W.cols());
  if (p.a.size() > 0) g.a = Eigen::VectorXd::Zero(p.a.size());
  return g;
}

double global_norm(const ModelParams& g) {
  double ss = g.P.squaredNorm() + g.Q.squaredNorm() + g.b * g.b;
  if (g.h.size() > 0) ss += g.h.squaredNorm();
  if (g.W.size() > 0) ss += g.W.squaredNorm();
  if (g.a.size() > 0) ss += g.a.squaredNorm();
  return std::sqrt(ss);
}

}  // namespace

std::unique_ptr<Model> train(std::shared_ptr<const Dataset> data, const TrainConfig& config) {
  if (!data) throw ContractError("train: null dataset");
  validate_config(config, *data);

  std::unique_ptr<Model> model =
      make_model(data, config, init_params(config, *data), TrainStats{});
  int n = static_cast<int>(data->points.size());
  double inv_n = 1.0 / static_cast<double>(n);

  ModelParams grad = zero_like(model->params_);
  model->stats_.epoch_loss.reserve(config.epochs);
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    grad.P.setZero();
    grad.Q.setZero();
    if (grad.h.size() > 0) grad.h.setZero();
    grad.b = 0.0;
    if (grad.W.size() > 0) grad.W.setZero();
    if (grad.a.size() > 0) grad.a.setZero();

    double total_loss = 0.0;
    for (int z = 0; z < n; ++z) total_loss += model->accumulate_grad(z, grad);
    double mean_loss = total_loss * inv_n;
    if (!std::isfinite(mean_loss)) {
      throw NumericError(fmt::format("training diverged at epoch {}", epoch));
    }
    model->stats_.epoch_loss.push_back(mean_loss);

    double step = config.learning_rate * inv_n;
    ModelParams& p = model->params_;
    p.P -= step * grad.P;
    p.Q -= step * grad.Q;
    if (p.h.size() > 0) p.h -= step * grad.h;
    p.b -= step * grad.b;
    if (p.W.size() > 0) p.W -= step * grad.W;
    if (p.a.size() > 0) p.a -= step * grad.a;
  }

  // One extra pass for the reported stationarity diagnostics.
  grad.P.setZero();
  grad.Q.setZero();
  if (grad.h.size() > 0) grad.h.setZero();
  grad.b = 0.0;
  if (grad.W.size() > 0) grad.W.setZero();
  if (grad.a.size() > 0) grad.a.setZero();
  double total_loss = 0.0;
  for (int z = 0; z < n; ++z) total_loss += model->accumulate_grad(z, grad);
  if (!std::isfinite(total_loss)) {
    throw NumericError(fmt::format("training diverged at epoch {}", config.epochs));
  }
  grad.P *= inv_n;
  grad.Q *= inv_n;
  if (grad.h.size() > 0) grad.h *= inv_n;
  grad.b *= inv_n;
  if (grad.W.size() > 0) grad.W *= inv_n;
  if (grad.a.size() > 0) grad.a *= inv_n;
  model->stats_.final_loss = total_loss * inv_n;
  model->stats_.final_grad_norm = global_norm(grad);
  return model;
}

}  // namespace cfrec
