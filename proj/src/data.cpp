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

#include "cfrec/data.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <fmt/core.h>
#include <json.hpp>

#include "cfrec/rng.hpp"
#include "cfrec/types.hpp"

namespace cfrec {

std::string to_string(DatasetKind kind) {
  return kind == DatasetKind::pointwise ? "pointwise" : "pairwise";
}

DatasetKind dataset_kind_from_string(const std::string& s) {
  if (s == "pointwise") return DatasetKind::pointwise;
  if (s == "pairwise") return DatasetKind::pairwise;
  throw ParseError(fmt::format("unknown dataset kind '{}'", s));
}

int Dataset::user_dense(int original) const {
  auto it = user_index.find(original);
  if (it == user_index.end()) throw LookupError(fmt::format("unknown user id {}", original));
  return it->second;
}

int Dataset::item_dense(int original) const {
  auto it = item_index.find(original);
  if (it == item_index.end()) throw LookupError(fmt::format("unknown item id {}", original));
  return it->second;
}

std::vector<int> Dataset::interacted(int user) const {
  if (user < 0 || user >= num_users) throw LookupError(fmt::format("user {} out of range", user));
  std::vector<int> out;
  out.reserve(profiles[user].size() + negatives[user].size());
  std::merge(profiles[user].begin(), profiles[user].end(),
             negatives[user].begin(), negatives[user].end(), std::back_inserter(out));
  return out;
}

std::pair<int, int> Dataset::point_range(int user) const {
  if (user < 0 || user >= num_users) throw LookupError(fmt::format("user {} out of range", user));
  return {point_begin[user], point_begin[user + 1]};
}

int Dataset::positive_point(int user, int item) const {
  auto [lo, hi] = point_range(user);
  for (int i = lo; i < hi; ++i) {
    const TrainingPoint& z = points[i];
    if (z.item == item && (kind == DatasetKind::pairwise || z.label == 1)) return i;
  }
  throw LookupError(fmt::format("user {} has no positive training point for item {}", user, item));
}

void Dataset::finalize() {
  if (num_users <= 0 || num_items <= 0) throw ParseError("dataset has no users or no items");
  if (static_cast<int>(user_ids.size()) != num_users ||
      static_cast<int>(item_ids.size()) != num_items) {
    throw ParseError("dataset id tables do not match declared sizes");
  }
  if (static_cast<int>(profiles.size()) != num_users ||
      static_cast<int>(negatives.size()) != num_users) {
    throw ParseError("dataset per-user tables do not match declared sizes");
  }
  user_index.clear();
  item_index.clear();
  for (int u = 0; u < num_users; ++u) {
    if (!user_index.emplace(user_ids[u], u).second) throw ParseError("duplicate user id");
  }
  for (int i = 0; i < num_items; ++i) {
    if (!item_index.emplace(item_ids[i], i).second) throw ParseError("duplicate item id");
  }

  auto check_sorted_items = [&](const std::vector<int>& v, const char* what) {
    for (size_t j = 0; j < v.size(); ++j) {
      if (v[j] < 0 || v[j] >= num_items) throw ParseError(fmt::format("{}: item out of range", what));
      if (j > 0 && v[j] <= v[j - 1]) throw ParseError(fmt::format("{}: not strictly ascending", what));
    }
  };
  for (int u = 0; u < num_users; ++u) {
    check_sorted_items(profiles[u], "profile");
    check_sorted_items(negatives[u], "negatives");
    std::vector<int> both;
    std::set_intersection(profiles[u].begin(), profiles[u].end(),
                          negatives[u].begin(), negatives[u].end(), std::back_inserter(both));
    if (!both.empty()) throw ParseError("item is both positive and negative for one user");
  }

  if (points.empty()) throw ParseError("dataset has no training points");
  point_begin.assign(num_users + 1, 0);
  int prev_user = -1;
  for (size_t idx = 0; idx < points.size(); ++idx) {
    const TrainingPoint& z = points[idx];
    if (z.user < 0 || z.user >= num_users) throw ParseError("training point user out of range");
    if (z.item < 0 || z.item >= num_items) throw ParseError("training point item out of range");
    if (z.user < prev_user) throw ParseError("training points not grouped by user");
    if (z.user != prev_user) {
      for (int u = prev_user + 1; u <= z.user; ++u) point_begin[u] = static_cast<int>(idx);
      prev_user = z.user;
    }
    if (kind == DatasetKind::pointwise) {
      if (z.other != -1 || (z.label != 0 && z.label != 1)) {
        throw ParseError("malformed pointwise training point");
      }
      const auto& bucket = z.label == 1 ? profiles[z.user] : negatives[z.user];
      if (!std::binary_search(bucket.begin(), bucket.end(), z.item)) {
        throw ParseError("pointwise training point not backed by an interaction");
      }
    } else {
      if (z.other < 0 || z.other >= num_items || z.label != 1 || z.other == z.item) {
        throw ParseError("malformed pairwise training point");
      }
      if (!std::binary_search(profiles[z.user].begin(), profiles[z.user].end(), z.item) ||
          !std::binary_search(negatives[z.user].begin(), negatives[z.user].end(), z.other)) {
        throw ParseError("pairwise training point not backed by interactions");
      }
    }
  }
  for (int u = prev_user + 1; u <= num_users; ++u) point_begin[u] = static_cast<int>(points.size());
}

std::vector<Rating> load_ratings(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(fmt::format("cannot open ratings file '{}'", path));
  std::vector<Rating> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    size_t start = line.find_first_not_of(" \t\r");
    if (start == std::string::npos || line[start] == '#') continue;
    std::istringstream ls(line);
    Rating r;
    if (!(ls >> r.user >> r.item >> r.value)) {
      throw ParseError(fmt::format("{}:{}: expected 'user item rating'", path, line_no));
    }
    if (r.user < 0 || r.item < 0) {
      throw ParseError(fmt::format("{}:{}: negative identifier", path, line_no));
    }
    long long timestamp;
    ls >> timestamp;  // optional, ignored
    out.push_back(r);
  }
  if (out.empty()) throw ParseError(fmt::format("ratings file '{}' is empty", path));
  return out;
}

std::vector<Interaction> binarize(const std::vector<Rating>& ratings, int threshold) {
  // Last write wins for duplicated (user, item) pairs.
  std::map<std::pair<int, int>, int> labels;
  for (const Rating& r : ratings) {
    labels[{r.user, r.item}] = r.value >= threshold ? 1 : 0;
  }
  std::vector<Interaction> out;
  out.reserve(labels.size());
  for (const auto& [key, label] : labels) {
    out.push_back({key.first, key.second, label});
  }
  return out;
}

DatasetSkeleton prune_users(const std::vector<Interaction>& interactions,
                            int min_pos, int min_neg) {
  if (min_pos < 1 || min_neg < 1) throw ContractError("prune_users: thresholds must be positive");
  std::map<int, std::pair<std::vector<int>, std::vector<int>>> by_user;  // orig user -> (pos, neg)
  for (const Interaction& x : interactions) {
    auto& bucket = by_user[x.user];
    (x.label == 1 ? bucket.first : bucket.second).push_back(x.item);
  }

  DatasetSkeleton out;
  out.min_pos = min_pos;
  out.min_neg = min_neg;
  std::set<int> kept_items;
  for (auto& [user, bucket] : by_user) {
    if (static_cast<int>(bucket.first.size()) < min_pos ||
        static_cast<int>(bucket.second.size()) < min_neg) {
      continue;
    }
    out.user_ids.push_back(user);
    kept_items.insert(bucket.first.begin(), bucket.first.end());
    kept_items.insert(bucket.second.begin(), bucket.second.end());
  }
  if (out.user_ids.empty()) throw ParseError("pruning removed every user");

  out.num_users = static_cast<int>(out.user_ids.size());
  out.item_ids.assign(kept_items.begin(), kept_items.end());
  out.num_items = static_cast<int>(out.item_ids.size());
  std::unordered_map<int, int> item_dense;
  for (int i = 0; i < out.num_items; ++i) item_dense.emplace(out.item_ids[i], i);

  out.positives.resize(out.num_users);
  out.negatives.resize(out.num_users);
  for (int u = 0; u < out.num_users; ++u) {
    auto& bucket = by_user[out.user_ids[u]];
    for (int item : bucket.first) out.positives[u].push_back(item_dense.at(item));
    for (int item : bucket.second) out.negatives[u].push_back(item_dense.at(item));
    std::sort(out.positives[u].begin(), out.positives[u].end());
    std::sort(out.negatives[u].begin(), out.negatives[u].end());
  }
  return out;
}

namespace {

Dataset dataset_from_skeleton(const DatasetSkeleton& skeleton, DatasetKind kind) {
  Dataset d;
  d.kind = kind;
  d.num_users = skeleton.num_users;
  d.num_items = skeleton.num_items;
  d.user_ids = skeleton.user_ids;
  d.item_ids = skeleton.item_ids;
  d.profiles = skeleton.positives;
  d.negatives = skeleton.negatives;
  d.threshold = skeleton.threshold;
  d.min_pos = skeleton.min_pos;
  d.min_neg = skeleton.min_neg;
  return d;
}

}  // namespace

Dataset build_pointwise(const DatasetSkeleton& skeleton) {
  Dataset d = dataset_from_skeleton(skeleton, DatasetKind::pointwise);
  for (int u = 0; u < d.num_users; ++u) {
    std::vector<TrainingPoint> user_points;
    for (int item : d.profiles[u]) user_points.push_back({u, item, -1, 1});
    for (int item : d.negatives[u]) user_points.push_back({u, item, -1, 0});
    std::sort(user_points.begin(), user_points.end(),
              [](const TrainingPoint& a, const TrainingPoint& b) { return a.item < b.item; });
    d.points.insert(d.points.end(), user_points.begin(), user_points.end());
  }
  d.finalize();
  return d;
}

Dataset pair_negatives(const DatasetSkeleton& skeleton, uint64_t seed) {
  Dataset d = dataset_from_skeleton(skeleton, DatasetKind::pairwise);
  d.pair_seed = seed;

  // Users interacting with each item, for co-rating counts.
  std::vector<std::vector<int>> item_users(d.num_items);
  for (int u = 0; u < d.num_users; ++u) {
    for (int item : d.profiles[u]) item_users[item].push_back(u);
    for (int item : d.negatives[u]) item_users[item].push_back(u);
  }
  for (auto& users : item_users) std::sort(users.begin(), users.end());

  GaussianSource rng(substream_seed(seed, "pairing"));
  std::vector<char> mark(d.num_users, 0);
  for (int u = 0; u < d.num_users; ++u) {
    if (d.negatives[u].empty()) {
      throw ContractError(fmt::format("user {} has no negatives to pair", u));
    }
    for (int pos : d.profiles[u]) {
      for (int v : item_users[pos]) mark[v] = 1;
      mark[u] = 0;  // co-rating counts exclude the user herself
      int best = -1;
      int best_count = 0;
      for (int neg : d.negatives[u]) {
        int count = 0;
        for (int v : item_users[neg]) count += mark[v];
        if (count > best_count) {
          best_count = count;
          best = neg;
        }
      }
      if (best < 0) {
        // No negative shares a rater with this positive; fall back to a
        // seeded uniform draw so the pairing stays total.
        best = d.negatives[u][rng.next_below(d.negatives[u].size())];
      }
      for (int v : item_users[pos]) mark[v] = 0;
      d.points.push_back({u, pos, best, 1});
    }
  }
  d.finalize();
  return d;
}

void save_dataset(const Dataset& dataset, const std::string& path) {
  nlohmann::json j;
  j["schema"] = "cfrec-dataset-v1";
  j["kind"] = to_string(dataset.kind);
  j["threshold"] = dataset.threshold;
  j["min_pos"] = dataset.min_pos;
  j["min_neg"] = dataset.min_neg;
  j["pair_seed"] = dataset.pair_seed;
  j["users"] = dataset.user_ids;
  j["items"] = dataset.item_ids;
  j["profiles"] = dataset.profiles;
  j["negatives"] = dataset.negatives;
  nlohmann::json points = nlohmann::json::array();
  for (const TrainingPoint& z : dataset.points) {
    points.push_back({z.user, z.item, z.other, z.label});
  }
  j["points"] = std::move(points);

  std::ofstream out(path);
  if (!out) throw ParseError(fmt::format("cannot write dataset to '{}'", path));
  out << j.dump(2) << '\n';
}

Dataset load_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(fmt::format("cannot open dataset '{}'", path));
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(fmt::format("dataset '{}': {}", path, e.what()));
  }
  try {
    if (j.value("schema", "") != "cfrec-dataset-v1") {
      throw ParseError(fmt::format("dataset '{}': unsupported schema", path));
    }
    Dataset d;
    d.kind = dataset_kind_from_string(j.at("kind").get<std::string>());
    d.threshold = j.at("threshold").get<int>();
    d.min_pos = j.at("min_pos").get<int>();
    d.min_neg = j.at("min_neg").get<int>();
    d.pair_seed = j.at("pair_seed").get<uint64_t>();
    d.user_ids = j.at("users").get<std::vector<int>>();
    d.item_ids = j.at("items").get<std::vector<int>>();
    d.num_users = static_cast<int>(d.user_ids.size());
    d.num_items = static_cast<int>(d.item_ids.size());
    d.profiles = j.at("profiles").get<std::vector<std::vector<int>>>();
    d.negatives = j.at("negatives").get<std::vector<std::vector<int>>>();
    for (const auto& row : j.at("points")) {
      if (!row.is_array() || row.size() != 4) throw ParseError("malformed point row");
      d.points.push_back({row[0].get<int>(), row[1].get<int>(), row[2].get<int>(),
                          row[3].get<int>()});
    }
    d.finalize();
    return d;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(fmt::format("dataset '{}': {}", path, e.what()));
  }
}

}  // namespace cfrec
