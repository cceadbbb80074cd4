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

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "cfrec/data.hpp"
#include "cfrec/model.hpp"
#include "cfrec/types.hpp"
#include "support/synthetic.hpp"

using cfrec::Dataset;
using cfrec::DatasetSkeleton;
using cfrec::Interaction;
using cfrec::Rating;

namespace {

std::string write_temp(const std::string& name, const std::string& content) {
  auto path = std::filesystem::temp_directory_path() / name;
  std::ofstream out(path);
  out << content;
  return path.string();
}

}  // namespace

TEST_CASE("ratings parser handles comments, blanks and timestamps") {
  std::string path = write_temp("cfrec_ratings_ok.tsv",
                                "# header comment\n"
                                "10\t200\t4\n"
                                "\n"
                                "11 201 2.5 978300760\n"
                                "   12\t202\t5\t978300761\n");
  auto ratings = cfrec::load_ratings(path);
  REQUIRE(ratings.size() == 3);
  CHECK(ratings[0].user == 10);
  CHECK(ratings[0].item == 200);
  CHECK(ratings[0].value == doctest::Approx(4.0));
  CHECK(ratings[1].value == doctest::Approx(2.5));
  CHECK(ratings[2].user == 12);
  std::remove(path.c_str());
}

TEST_CASE("ratings parser rejects malformed input") {
  CHECK_THROWS_AS(cfrec::load_ratings("/nonexistent/ratings.tsv"), cfrec::ParseError);

  std::string missing = write_temp("cfrec_ratings_short.tsv", "10 200\n");
  CHECK_THROWS_AS(cfrec::load_ratings(missing), cfrec::ParseError);
  std::remove(missing.c_str());

  std::string garbage = write_temp("cfrec_ratings_bad.tsv", "10 foo 4\n");
  CHECK_THROWS_AS(cfrec::load_ratings(garbage), cfrec::ParseError);
  std::remove(garbage.c_str());

  std::string line_info = write_temp("cfrec_ratings_line.tsv", "1 2 3\nbroken\n");
  try {
    cfrec::load_ratings(line_info);
    FAIL("expected a parse error");
  } catch (const cfrec::ParseError& e) {
    CHECK(std::string(e.what()).find("2") != std::string::npos);
  }
  std::remove(line_info.c_str());
}

TEST_CASE("binarize thresholds and keeps the last duplicate") {
  std::vector<Rating> ratings = {
      {1, 10, 5}, {1, 11, 2}, {2, 10, 3}, {1, 10, 1},  // duplicate (1,10), last wins
  };
  auto inter = cfrec::binarize(ratings, 3);
  REQUIRE(inter.size() == 3);
  // Sorted by (user, item).
  CHECK(inter[0].user == 1);
  CHECK(inter[0].item == 10);
  CHECK(inter[0].label == 0);  // value 1 after the duplicate overwrite
  CHECK(inter[1].item == 11);
  CHECK(inter[1].label == 0);
  CHECK(inter[2].user == 2);
  CHECK(inter[2].label == 1);  // 3 is at the threshold
}

TEST_CASE("prune drops thin users and reindexes densely") {
  std::vector<Interaction> inter;
  // User 5: 2 positives, 2 negatives. User 6: 1 positive only. User 7: fine.
  inter.push_back({5, 100, 1});
  inter.push_back({5, 101, 1});
  inter.push_back({5, 102, 0});
  inter.push_back({5, 103, 0});
  inter.push_back({6, 104, 1});
  inter.push_back({7, 100, 1});
  inter.push_back({7, 105, 1});
  inter.push_back({7, 102, 0});
  inter.push_back({7, 106, 0});
  auto sk = cfrec::prune_users(inter, 2, 2);
  CHECK(sk.num_users == 2);
  CHECK(sk.user_ids == std::vector<int>{5, 7});
  // Item 104 disappears with user 6.
  CHECK(sk.num_items == 6);
  CHECK(sk.item_ids == std::vector<int>{100, 101, 102, 103, 105, 106});
  CHECK(sk.positives[0] == std::vector<int>{0, 1});
  CHECK(sk.negatives[0] == std::vector<int>{2, 3});
  CHECK(sk.positives[1] == std::vector<int>{0, 4});
  CHECK(sk.negatives[1] == std::vector<int>{2, 5});
  CHECK(sk.min_pos == 2);
  CHECK(sk.min_neg == 2);
}

TEST_CASE("pointwise build lays out points sorted with user slices") {
  Dataset d = testsup::random_pointwise(6, 12, 6, 17);
  CHECK(d.kind == cfrec::DatasetKind::pointwise);
  REQUIRE(d.point_begin.size() == static_cast<size_t>(d.num_users) + 1);
  for (size_t i = 1; i < d.points.size(); ++i) {
    const auto& a = d.points[i - 1];
    const auto& b = d.points[i];
    CHECK((a.user < b.user || (a.user == b.user && a.item < b.item)));
  }
  for (int u = 0; u < d.num_users; ++u) {
    auto [begin, end] = d.point_range(u);
    int positives = 0;
    for (int z = begin; z < end; ++z) {
      CHECK(d.points[z].user == u);
      positives += d.points[z].label;
    }
    CHECK(positives == static_cast<int>(d.profiles[u].size()));
    for (int item : d.profiles[u]) {
      int z = d.positive_point(u, item);
      CHECK(d.points[z].item == item);
      CHECK(d.points[z].label == 1);
    }
  }
  CHECK_THROWS_AS(d.positive_point(0, d.negatives[0][0]), cfrec::LookupError);
  CHECK_THROWS_AS(d.user_dense(424242), cfrec::LookupError);
  CHECK_THROWS_AS(d.item_dense(424242), cfrec::LookupError);
}

TEST_CASE("interacted merges both polarities in ascending order") {
  Dataset d = testsup::random_pointwise(4, 10, 5, 3);
  for (int u = 0; u < d.num_users; ++u) {
    auto merged = d.interacted(u);
    CHECK(merged.size() == d.profiles[u].size() + d.negatives[u].size());
    CHECK(std::is_sorted(merged.begin(), merged.end()));
    for (int item : d.profiles[u]) {
      CHECK(std::binary_search(merged.begin(), merged.end(), item));
    }
    for (int item : d.negatives[u]) {
      CHECK(std::binary_search(merged.begin(), merged.end(), item));
    }
  }
}

TEST_CASE("pairing picks the most co-rated negative, other users only") {
  DatasetSkeleton sk;
  sk.num_users = 3;
  sk.num_items = 4;
  sk.user_ids = {50, 51, 52};
  sk.item_ids = {900, 901, 902, 903};
  // User 0 rates everything, so its own overlap must not count.
  sk.positives = {{0}, {0, 1}, {1, 2}};
  sk.negatives = {{1, 2}, {3}, {3}};
  Dataset d = cfrec::pair_negatives(sk, 11);
  // For user 0's positive 0: item 1 is co-rated with 0 by user 1; item 2 by
  // nobody else. Expect negative 1.
  REQUIRE(d.points.size() == 5);
  CHECK(d.points[0].user == 0);
  CHECK(d.points[0].item == 0);
  CHECK(d.points[0].other == 1);
  CHECK(d.points[0].is_pair());
}

TEST_CASE("pairing breaks co-rating ties toward the smaller item id") {
  DatasetSkeleton sk;
  sk.num_users = 3;
  sk.num_items = 5;
  sk.user_ids = {1, 2, 3};
  sk.item_ids = {10, 11, 12, 13, 14};
  // Positive 0 of user 0; negatives 2 and 3 are each co-rated once.
  sk.positives = {{0}, {0, 2}, {0, 3}};
  sk.negatives = {{2, 3}, {4}, {4}};
  Dataset d = cfrec::pair_negatives(sk, 11);
  CHECK(d.points[0].other == 2);
}

TEST_CASE("pairing falls back to a seeded draw without co-rating signal") {
  DatasetSkeleton sk;
  sk.num_users = 2;
  sk.num_items = 5;
  sk.user_ids = {1, 2};
  sk.item_ids = {10, 11, 12, 13, 14};
  sk.positives = {{0}, {3}};
  sk.negatives = {{1, 2}, {4}};
  Dataset first = cfrec::pair_negatives(sk, 123);
  Dataset second = cfrec::pair_negatives(sk, 123);
  CHECK(first.points[0].other == second.points[0].other);
  bool valid = first.points[0].other == 1 || first.points[0].other == 2;
  CHECK(valid);
  CHECK(first.pair_seed == 123);
}

TEST_CASE("dataset json round trip preserves everything") {
  Dataset d = testsup::random_pairwise(5, 11, 6, 29);
  auto path = (std::filesystem::temp_directory_path() / "cfrec_roundtrip.json").string();
  cfrec::save_dataset(d, path);
  Dataset back = cfrec::load_dataset(path);
  CHECK(back.kind == d.kind);
  CHECK(back.num_users == d.num_users);
  CHECK(back.num_items == d.num_items);
  CHECK(back.user_ids == d.user_ids);
  CHECK(back.item_ids == d.item_ids);
  CHECK(back.profiles == d.profiles);
  CHECK(back.negatives == d.negatives);
  CHECK(back.point_begin == d.point_begin);
  CHECK(back.pair_seed == d.pair_seed);
  REQUIRE(back.points.size() == d.points.size());
  for (size_t i = 0; i < d.points.size(); ++i) {
    CHECK(back.points[i].user == d.points[i].user);
    CHECK(back.points[i].item == d.points[i].item);
    CHECK(back.points[i].other == d.points[i].other);
    CHECK(back.points[i].label == d.points[i].label);
  }
  CHECK(cfrec::dataset_fingerprint(back) == cfrec::dataset_fingerprint(d));
  std::remove(path.c_str());

  CHECK_THROWS_AS(cfrec::load_dataset("/nonexistent/dataset.json"), cfrec::ParseError);
}

TEST_CASE("finalize rejects inconsistent structures") {
  Dataset d = testsup::random_pointwise(3, 8, 4, 5);
  Dataset broken = d;
  broken.points[0].user = 2;  // breaks the sorted-by-user layout
  CHECK_THROWS_AS(broken.finalize(), cfrec::ParseError);

  Dataset dup = d;
  dup.user_ids[1] = dup.user_ids[0];
  CHECK_THROWS_AS(dup.finalize(), cfrec::ParseError);
}

TEST_CASE("fingerprints differ across distinct datasets") {
  Dataset a = testsup::random_pointwise(4, 9, 5, 1);
  Dataset b = testsup::random_pointwise(4, 9, 5, 2);
  CHECK(cfrec::dataset_fingerprint(a) != cfrec::dataset_fingerprint(b));
}
