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
#include <unordered_map>
#include <vector>

namespace cfrec {

// One line of the raw ratings file, original identifiers.
struct Rating {
  int user = 0;
  int item = 0;
  double value = 0.0;
};

// Thresholded rating, still on original identifiers.
struct Interaction {
  int user = 0;
  int item = 0;
  int label = 0;  // 1 positive, 0 negative
};

// One training example on dense identifiers. Pointwise datasets set
// other = -1 and label in {0, 1}; pairwise datasets store a positive item
// together with its paired negative and label = 1.
struct TrainingPoint {
  int user = 0;
  int item = 0;
  int other = -1;
  int label = 0;

  bool is_pair() const { return other >= 0; }
};

// Pruned interactions with dense, contiguous user and item identifiers.
// Intermediate stage between thresholding and training-set construction.
struct DatasetSkeleton {
  int num_users = 0;
  int num_items = 0;
  std::vector<int> user_ids;  // dense index -> original id
  std::vector<int> item_ids;
  std::vector<std::vector<int>> positives;  // per user, dense item ids, ascending
  std::vector<std::vector<int>> negatives;
  int threshold = 0;
  int min_pos = 0;
  int min_neg = 0;
};

enum class DatasetKind { pointwise, pairwise };

std::string to_string(DatasetKind kind);
DatasetKind dataset_kind_from_string(const std::string& s);

// Finalized training set. Points are sorted by (user, item, other); the
// per-user slice boundaries are kept in point_begin for O(1) range lookup.
struct Dataset {
  DatasetKind kind = DatasetKind::pointwise;
  int num_users = 0;
  int num_items = 0;
  std::vector<int> user_ids;
  std::vector<int> item_ids;
  std::unordered_map<int, int> user_index;  // original id -> dense
  std::unordered_map<int, int> item_index;
  std::vector<std::vector<int>> profiles;   // positive items per user, ascending
  std::vector<std::vector<int>> negatives;  // negative items per user, ascending
  std::vector<TrainingPoint> points;
  std::vector<int> point_begin;  // size num_users + 1
  int threshold = 0;
  int min_pos = 0;
  int min_neg = 0;
  uint64_t pair_seed = 0;  // pairwise only

  int user_dense(int original) const;
  int item_dense(int original) const;
  // All items the user interacted with, positives and negatives, ascending.
  std::vector<int> interacted(int user) const;
  // Half-open range of point indices belonging to the user.
  std::pair<int, int> point_range(int user) const;
  // Index of the user's point whose positive (or pointwise target with
  // label 1) equals the item. Throws LookupError when absent.
  int positive_point(int user, int item) const;

  // Rebuilds lookup maps and slice boundaries, then checks structural
  // invariants. Throws ParseError on violation.
  void finalize();
};

// Parses a whitespace separated ratings file: user, item, value and an
// optional trailing timestamp per line. '#' starts a comment line.
std::vector<Rating> load_ratings(const std::string& path);

// Maps ratings at or above the threshold to positives, the rest to
// negatives. Duplicate (user, item) pairs keep the last rating.
std::vector<Interaction> binarize(const std::vector<Rating>& ratings, int threshold);

// Drops users with fewer than min_pos positives or min_neg negatives, then
// reindexes surviving users and items densely in ascending original-id
// order. Items interacted with only by dropped users disappear. The
// threshold field is left at zero; callers record it for provenance.
DatasetSkeleton prune_users(const std::vector<Interaction>& interactions,
                            int min_pos, int min_neg);

// Builds a pointwise dataset: one labeled point per interaction.
Dataset build_pointwise(const DatasetSkeleton& skeleton);

// Builds a pairwise dataset: one triple per positive interaction. The
// paired negative is the user's negative item co-rated with the positive by
// the most other users; ties prefer the smaller item id, and a user with no
// co-rating signal at all falls back to a seeded uniform draw.
Dataset pair_negatives(const DatasetSkeleton& skeleton, uint64_t seed);

// JSON artifact round trip, schema cfrec-dataset-v1.
void save_dataset(const Dataset& dataset, const std::string& path);
Dataset load_dataset(const std::string& path);

}  // namespace cfrec
