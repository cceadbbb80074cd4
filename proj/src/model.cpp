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

#include "cfrec/model.hpp"

#include <algorithm>
#include <fstream>

#include <fmt/core.h>
#include <json.hpp>

#include "cfrec/types.hpp"
#include "models_detail.hpp"

namespace cfrec {

std::string to_string(ModelKind kind) {
  return kind == ModelKind::pointwise ? "pointwise" : "attention";
}

ModelKind model_kind_from_string(const std::string& s) {
  if (s == "pointwise") return ModelKind::pointwise;
  if (s == "attention") return ModelKind::attention;
  throw ParseError(fmt::format("unknown model kind '{}'", s));
}

const Eigen::VectorXd* SparseGrad::find(const Block& block) const {
  for (const auto& [b, v] : entries) {
    if (b == block) return &v;
  }
  return nullptr;
}

void SparseGrad::add(const Block& block, const Eigen::VectorXd& value) {
  for (auto& [b, v] : entries) {
    if (b == block) {
      v += value;
      return;
    }
  }
  entries.emplace_back(block, value);
}

double SparseGrad::squared_norm() const {
  double total = 0.0;
  for (const auto& [b, v] : entries) total += v.squaredNorm();
  return total;
}

Model::Model(TrainConfig config, std::shared_ptr<const Dataset> data, ModelParams params,
             TrainStats stats)
    : config_(std::move(config)),
      data_(std::move(data)),
      params_(std::move(params)),
      stats_(std::move(stats)) {}

int Model::block_size(const Block& block) const {
  switch (block.kind) {
    case Block::Kind::head_b:
      return 1;
    case Block::Kind::head_w:
      return config_.dim * config_.dim;
    default:
      return config_.dim;
  }
}

void Model::check_user(int user) const {
  if (user < 0 || user >= data_->num_users) {
    throw LookupError(fmt::format("user {} out of range", user));
  }
}

void Model::check_item(int item) const {
  if (item < 0 || item >= data_->num_items) {
    throw LookupError(fmt::format("item {} out of range", item));
  }
}

void Model::check_point(int point_index) const {
  if (point_index < 0 || point_index >= static_cast<int>(data_->points.size())) {
    throw LookupError(fmt::format("training point {} out of range", point_index));
  }
}

std::vector<double> Model::attention_weights(int, int) const {
  throw ContractError("attention weights are only defined for the attention model");
}

double Model::score_without(int, int, const std::vector<int>&) const {
  throw ContractError("fixed-parameter rescoring is only defined for the attention model");
}

Eigen::MatrixXd Model::hessian_block(const std::vector<Block>& S) const {
  if (S.empty()) throw ContractError("hessian_block: empty block list");
  std::vector<int> offset(S.size() + 1, 0);
  for (size_t i = 0; i < S.size(); ++i) {
    for (size_t j = i + 1; j < S.size(); ++j) {
      if (S[i] == S[j]) throw ContractError("hessian_block: duplicate block");
    }
    offset[i + 1] = offset[i] + block_size(S[i]);
  }
  int dim = offset[S.size()];
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(dim, dim);
  int n = static_cast<int>(data_->points.size());
  for (int z = 0; z < n; ++z) {
    std::vector<Block> touched = touched_blocks(z);
    auto touches = [&](const Block& b) {
      return std::find(touched.begin(), touched.end(), b) != touched.end();
    };
    for (size_t i = 0; i < S.size(); ++i) {
      if (!touches(S[i])) continue;
      for (size_t j = i; j < S.size(); ++j) {
        if (!touches(S[j])) continue;
        Eigen::MatrixXd part = point_hessian(z, S[i], S[j]);
        H.block(offset[i], offset[j], part.rows(), part.cols()) += part;
        if (j != i) {
          H.block(offset[j], offset[i], part.cols(), part.rows()) += part.transpose();
        }
      }
    }
  }
  H /= static_cast<double>(n);
  return 0.5 * (H + H.transpose());
}

std::vector<ItemScore> Model::topk(int user, int k) const {
  return topk(user, k, data_->interacted(user));
}

std::vector<ItemScore> Model::topk(int user, int k, const std::vector<int>& excluded_sorted) const {
  check_user(user);
  if (k < 1) throw ContractError("topk: k must be at least 1");
  std::vector<ItemScore> scored;
  scored.reserve(data_->num_items);
  for (int item = 0; item < data_->num_items; ++item) {
    if (std::binary_search(excluded_sorted.begin(), excluded_sorted.end(), item)) continue;
    scored.push_back({item, score(user, item)});
  }
  std::sort(scored.begin(), scored.end(), [](const ItemScore& a, const ItemScore& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.item < b.item;
  });
  if (static_cast<int>(scored.size()) > k) scored.resize(k);
  return scored;
}

std::unique_ptr<Model> make_model(std::shared_ptr<const Dataset> data, const TrainConfig& config,
                                  ModelParams params, TrainStats stats) {
  if (!data) throw ContractError("make_model: null dataset");
  if (config.model == ModelKind::pointwise) {
    if (data->kind != DatasetKind::pointwise) {
      throw ContractError("pointwise model requires a pointwise dataset");
    }
    return detail::make_pointwise_model(std::move(data), config, std::move(params),
                                        std::move(stats));
  }
  if (data->kind != DatasetKind::pairwise) {
    throw ContractError("attention model requires a pairwise dataset");
  }
  return detail::make_attention_model(std::move(data), config, std::move(params),
                                      std::move(stats));
}

uint64_t dataset_fingerprint(const Dataset& dataset) {
  uint64_t h = 1469598103934665603ull;
  auto mix = [&h](int64_t x) {
    for (int shift = 0; shift < 64; shift += 8) {
      h ^= static_cast<unsigned char>(x >> shift);
      h *= 1099511628211ull;
    }
  };
  mix(static_cast<int64_t>(dataset.kind));
  mix(dataset.num_users);
  mix(dataset.num_items);
  for (const TrainingPoint& z : dataset.points) {
    mix(z.user);
    mix(z.item);
    mix(z.other);
    mix(z.label);
  }
  return h;
}

namespace {

nlohmann::json matrix_to_json(const RowMatrix& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

RowMatrix matrix_from_json(const nlohmann::json& j, int rows, int cols, const char* name) {
  if (!j.is_array() || static_cast<int>(j.size()) != rows) {
    throw ParseError(fmt::format("checkpoint field '{}' has wrong shape", name));
  }
  RowMatrix m(rows, cols);
  for (int r = 0; r < rows; ++r) {
    const auto& row = j[r];
    if (!row.is_array() || static_cast<int>(row.size()) != cols) {
      throw ParseError(fmt::format("checkpoint field '{}' has wrong shape", name));
    }
    for (int c = 0; c < cols; ++c) m(r, c) = row[c].get<double>();
  }
  return m;
}

Eigen::VectorXd vector_from_json(const nlohmann::json& j, int size, const char* name) {
  if (!j.is_array() || static_cast<int>(j.size()) != size) {
    throw ParseError(fmt::format("checkpoint field '{}' has wrong shape", name));
  }
  Eigen::VectorXd v(size);
  for (int i = 0; i < size; ++i) v(i) = j[i].get<double>();
  return v;
}

}  // namespace

void save_model(const Model& model, const std::string& path) {
  const TrainConfig& cfg = model.config();
  nlohmann::json j;
  j["schema"] = "cfrec-model-v1";
  j["kind"] = to_string(cfg.model);
  j["config"] = {{"dim", cfg.dim},
                 {"learning_rate", cfg.learning_rate},
                 {"epochs", cfg.epochs},
                 {"l2_reg", cfg.l2_reg},
                 {"init_scale", cfg.init_scale},
                 {"seed", cfg.seed}};
  j["dataset"] = {{"kind", to_string(model.data().kind)},
                  {"num_users", model.data().num_users},
                  {"num_items", model.data().num_items},
                  {"num_points", model.data().points.size()},
                  {"fingerprint", dataset_fingerprint(model.data())}};
  const ModelParams& p = model.params();
  nlohmann::json params;
  params["P"] = matrix_to_json(p.P);
  params["Q"] = matrix_to_json(p.Q);
  if (cfg.model == ModelKind::pointwise) {
    params["h"] = std::vector<double>(p.h.data(), p.h.data() + p.h.size());
    params["b"] = p.b;
  } else {
    params["W"] = matrix_to_json(p.W);
    params["a"] = std::vector<double>(p.a.data(), p.a.data() + p.a.size());
  }
  j["params"] = std::move(params);
  j["stats"] = {{"epoch_loss", model.stats().epoch_loss},
                {"final_loss", model.stats().final_loss},
                {"final_grad_norm", model.stats().final_grad_norm}};

  std::ofstream out(path);
  if (!out) throw ParseError(fmt::format("cannot write checkpoint to '{}'", path));
  out << j.dump(2) << '\n';
}

std::unique_ptr<Model> load_model(const std::string& path, std::shared_ptr<const Dataset> data) {
  if (!data) throw ContractError("load_model: null dataset");
  std::ifstream in(path);
  if (!in) throw ParseError(fmt::format("cannot open checkpoint '{}'", path));
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(fmt::format("checkpoint '{}': {}", path, e.what()));
  }
  try {
    if (j.value("schema", "") != "cfrec-model-v1") {
      throw ParseError(fmt::format("checkpoint '{}': unsupported schema", path));
    }
    TrainConfig cfg;
    cfg.model = model_kind_from_string(j.at("kind").get<std::string>());
    const auto& jc = j.at("config");
    cfg.dim = jc.at("dim").get<int>();
    cfg.learning_rate = jc.at("learning_rate").get<double>();
    cfg.epochs = jc.at("epochs").get<int>();
    cfg.l2_reg = jc.at("l2_reg").get<double>();
    cfg.init_scale = jc.at("init_scale").get<double>();
    cfg.seed = jc.at("seed").get<uint64_t>();

    if (j.at("dataset").at("fingerprint").get<uint64_t>() != dataset_fingerprint(*data)) {
      throw ParseError(fmt::format("checkpoint '{}' was trained on a different dataset", path));
    }

    const auto& jp = j.at("params");
    ModelParams p;
    if (cfg.model == ModelKind::pointwise) {
      p.P = matrix_from_json(jp.at("P"), data->num_users, cfg.dim, "P");
      p.Q = matrix_from_json(jp.at("Q"), data->num_items, cfg.dim, "Q");
      p.h = vector_from_json(jp.at("h"), cfg.dim, "h");
      p.b = jp.at("b").get<double>();
    } else {
      p.P = matrix_from_json(jp.at("P"), data->num_items, cfg.dim, "P");
      p.Q = matrix_from_json(jp.at("Q"), data->num_items, cfg.dim, "Q");
      p.W = matrix_from_json(jp.at("W"), cfg.dim, cfg.dim, "W");
      p.a = vector_from_json(jp.at("a"), cfg.dim, "a");
    }

    TrainStats stats;
    const auto& js = j.at("stats");
    stats.epoch_loss = js.at("epoch_loss").get<std::vector<double>>();
    stats.final_loss = js.at("final_loss").get<double>();
    stats.final_grad_norm = js.at("final_grad_norm").get<double>();

    return make_model(std::move(data), cfg, std::move(p), std::move(stats));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(fmt::format("checkpoint '{}': {}", path, e.what()));
  }
}

}  // namespace cfrec
