/*
 * Copyright 2026 The alttrip Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *   http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <gtest/gtest.h>

#include <fstream>
#include <set>

#include "alttrip/error.hpp"
#include "alttrip/metrics.hpp"
#include "alttrip/rng.hpp"
#include "toy.hpp"

namespace alttrip {
namespace {

using Seq = std::vector<PoiId>;

Errc code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return Errc::kInvalidArgument;
}

TEST(F1, Examples) {
  EXPECT_EQ(f1_score(Seq{0, 1, 2}, Seq{0, 2, 1}, true), 1.0);
  EXPECT_DOUBLE_EQ(f1_score(Seq{0, 1, 2, 9}, Seq{0, 1, 3, 9}, true), 0.75);
  EXPECT_EQ(f1_score(Seq{0, 1, 2, 9}, Seq{0, 3, 4, 9}, false), 0.0);
  EXPECT_DOUBLE_EQ(f1_score(Seq{0, 1, 2, 9}, Seq{0, 1, 4, 9}, false), 0.5);
}

TEST(PairsF1, Examples) {
  EXPECT_EQ(pairs_f1_score(Seq{0, 1, 2, 3, 4}, Seq{0, 1, 2, 3, 4}), 1.0);
  EXPECT_DOUBLE_EQ(pairs_f1_score(Seq{0, 1, 2, 9}, Seq{0, 2, 1, 9}), 5.0 / 6.0);
  EXPECT_EQ(pairs_f1_score(Seq{0, 1}, Seq{1, 0}), 0.0);
}

TEST(Popularity, Examples) {
  EXPECT_EQ(popularity_score({Seq{0, 1, 2}}, {Seq{0, 1, 2}}, PopularityMetric::kF1), 1.0);
  // Pair scores 1, 0.75, 0.5, 0.75.
  const Seq a{0, 1, 2, 9}, b{0, 3, 4, 9}, c{0, 1, 3, 9};
  EXPECT_DOUBLE_EQ(popularity_score({a, b}, {a, c}, PopularityMetric::kF1), 0.75);
  EXPECT_EQ(code_of([&] { popularity_score({a}, {}, PopularityMetric::kF1); }),
            Errc::kEmptyGroundTruth);
  // 2 x 3 pairs, averaged.
  const Seq d{0, 5, 9};
  double sum = 0.0;
  for (const auto& r : {a, b})
    for (const auto& g : {a, c, d}) sum += pairs_f1_score(g, r);
  EXPECT_NEAR(popularity_score({a, b}, {a, c, d}, PopularityMetric::kPairsF1), sum / 6.0, 1e-15);
}

TEST(Diversity, Examples) {
  EXPECT_EQ(diversity_score({Seq{0, 1, 9}, Seq{0, 2, 9}, Seq{0, 3, 4, 9}}), 1.0);
  EXPECT_EQ(diversity_score({Seq{0, 1, 2, 9}, Seq{0, 1, 2, 9}}), 0.0);
  EXPECT_EQ(code_of([&] { diversity_score({Seq{0, 1, 9}}); }), Errc::kSingletonSet);
}

TEST(Diversity, CopyNeverIncreasesAndPermutationInvariant) {
  Rng rng(4);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<Seq> set;
    const int k = rng.between(2, 5);
    for (int i = 0; i < k; ++i) {
      auto body = testing::random_sequence(12, rng.between(1, 5), rng.next());
      Seq it{20};
      for (PoiId p : body) it.push_back(p);
      it.push_back(21);
      set.push_back(it);
    }
    const double div = diversity_score(set);
    auto shuffled = set;
    rng.shuffle(shuffled);
    EXPECT_NEAR(diversity_score(shuffled), div, 1e-12);
    auto more = set;
    more.push_back(set[rng.index(set.size())]);
    EXPECT_LE(diversity_score(more), div + 1e-12);
  }
}

TEST(Metrics, SymmetryAndRange) {
  Rng rng(9);
  for (int trial = 0; trial < 100; ++trial) {
    auto a = testing::random_sequence(10, rng.between(2, 8), rng.next());
    auto b = testing::random_sequence(10, rng.between(2, 8), rng.next());
    for (bool ends : {true, false}) {
      EXPECT_EQ(f1_score(a, b, ends), f1_score(b, a, ends));
    }
    const double p = pairs_f1_score(a, b);
    EXPECT_EQ(p, pairs_f1_score(b, a));
    EXPECT_GE(p, 0.0);
    EXPECT_LE(p, 1.0);
    EXPECT_EQ(p == 1.0, a == b);
  }
}

TEST(Combined, Examples) {
  EXPECT_NEAR(combined_score(0.580, 0.766, 0.5), 0.673, 0.0005);
  EXPECT_EQ(combined_score(0.4, 0.4, 0.5), 0.4);
  EXPECT_DOUBLE_EQ(combined_score(1.0, 0.0, 0.9), 0.9);
  EXPECT_TRUE(alpha_in_evaluated_range(0.1));
  EXPECT_TRUE(alpha_in_evaluated_range(0.9));
  EXPECT_FALSE(alpha_in_evaluated_range(0.95));
  EXPECT_DOUBLE_EQ(combined_score(0.2, 0.6, 1.0), 0.2);
}

TEST(Combined, BetweenComponents) {
  Rng rng(2);
  for (int i = 0; i < 100; ++i) {
    const double p = rng.uniform01(), d = rng.uniform01(), a = rng.uniform(0.1, 0.9);
    const double c = combined_score(p, d, a);
    EXPECT_GE(c, std::min(p, d) - 1e-15);
    EXPECT_LE(c, std::max(p, d) + 1e-15);
  }
}

TEST(AlphaGrid, Parsing) {
  auto g = parse_alpha_grid("0.1:0.9:0.2");
  ASSERT_EQ(g.size(), 5u);
  const double expect[] = {0.1, 0.3, 0.5, 0.7, 0.9};
  for (int i = 0; i < 5; ++i) EXPECT_NEAR(g[i], expect[i], 1e-12);
  EXPECT_EQ(parse_alpha_grid("0.25,0.75"), (std::vector<double>{0.25, 0.75}));
  EXPECT_EQ(code_of([] { parse_alpha_grid("0.1:0.9:0"); }), Errc::kInvalidArgument);
  EXPECT_EQ(code_of([] { parse_alpha_grid("x"); }), Errc::kInvalidArgument);
}

TEST(Evaluate, MemorisedCorpusScoresPerfectly) {
  const auto& mem = testing::memorized();
  std::vector<Route> routes(20, mem.route);
  auto folds = split_folds(routes, 5, 1);
  EvaluationConfig cfg;
  cfg.k = 1;
  cfg.length = 5;
  cfg.folds = {0};
  auto report = evaluate_folds([&](int, const std::vector<Route>&) { return mem.model; }, routes,
                               folds, cfg);
  ASSERT_EQ(report.records.size(), 1u);
  EXPECT_EQ(report.records[0].error, "");
  EXPECT_EQ(report.f1, 1.0);
  EXPECT_EQ(report.pairs_f1, 1.0);
  EXPECT_FALSE(report.diversity.has_value());
  EXPECT_FALSE(report.records[0].diversity.has_value());
  ASSERT_EQ(report.folds.size(), 1u);
  EXPECT_EQ(report.folds[0].train_routes, 16);
}

TEST(Evaluate, RowsPerUniquePairAndOutputs) {
  const auto& model = testing::small_trained_model();
  std::vector<Route> routes;
  for (int i = 0; i < 30; ++i) routes.push_back(testing::random_sequence(16, 3 + i % 3, 100 + i % 17));
  auto folds = split_folds(routes, 5, 3);
  EvaluationConfig cfg;
  cfg.k = 2;
  cfg.length = 4;
  cfg.alphas = {0.1, 0.5};
  std::size_t expected_rows = 0;
  for (int f = 0; f < 5; ++f) {
    std::set<std::pair<PoiId, PoiId>> pairs;
    for (auto idx : folds.routes_in_fold(f)) pairs.insert({routes[idx].front(), routes[idx].back()});
    expected_rows += pairs.size();
  }
  int calls = 0;
  auto report = evaluate_folds(
      [&](int, const std::vector<Route>& train) {
        ++calls;
        EXPECT_EQ(train.size(), 24u);
        return model;
      },
      routes, folds, cfg);
  EXPECT_EQ(calls, 5);
  EXPECT_EQ(report.records.size(), expected_rows);
  for (const auto& r : report.records) {
    if (!r.error.empty()) continue;
    EXPECT_GE(r.f1, 0.0);
    EXPECT_LE(r.f1, 1.0);
    ASSERT_TRUE(r.diversity.has_value());
    ASSERT_EQ(r.combined_f1.size(), 2u);
    EXPECT_NEAR(r.combined_f1[1], combined_score(r.f1, *r.diversity, 0.5), 1e-12);
    EXPECT_GE(r.ground_truth_routes, 1);
  }
  auto dir = testing::temp_dir("report");
  write_report_csv(report, dir / "r.csv");
  write_report_json(report, dir / "r.json");
  std::ifstream csv(dir / "r.csv");
  std::string line;
  std::size_t lines = 0;
  while (std::getline(csv, line)) ++lines;
  EXPECT_EQ(lines, expected_rows + 1);
  auto j = nlohmann::json::parse(std::ifstream(dir / "r.json"));
  EXPECT_EQ(j.at("config").at("k"), 2);
  EXPECT_EQ(j.at("folds").size(), 5u);
  EXPECT_TRUE(j.at("mean").contains("f1"));
}

}  // namespace
}  // namespace alttrip
