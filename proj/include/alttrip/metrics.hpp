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

// Popularity and diversity of recommendation sets, and the k-fold
// evaluation harness.

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "alttrip/dataset.hpp"
#include "alttrip/itinerary.hpp"
#include "alttrip/itrnet.hpp"
#include "alttrip/planner.hpp"
#include "json.hpp"

namespace alttrip {

// F1 over POI sets; with include_endpoints == false the first and last POI
// of both sequences are ignored. 0 when the sets do not intersect.
double f1_score(std::span<const PoiId> route, std::span<const PoiId> itinerary,
                bool include_endpoints);

// F1 over ordered pairs (u before v, not necessarily adjacent). Both
// sequences need at least two POIs.
double pairs_f1_score(std::span<const PoiId> route, std::span<const PoiId> itinerary);

enum class PopularityMetric { kF1, kPairsF1 };

// Mean of the metric over every (recommended, ground-truth) pair; endpoints
// count. Throws EmptyGroundTruth.
double popularity_score(const std::vector<std::vector<PoiId>>& recommended,
                        const std::vector<Route>& ground_truth, PopularityMetric metric);

// Mean of 1 - F1 (endpoints excluded) over all ordered pairs of distinct
// members. Throws SingletonSet for fewer than two itineraries.
double diversity_score(const std::vector<std::vector<PoiId>>& recommended);

// alpha * popularity + (1 - alpha) * diversity. Computed for any alpha; see
// alpha_in_evaluated_range for the customary range.
double combined_score(double popularity, double diversity, double alpha);
bool alpha_in_evaluated_range(double alpha);

// "0.1:0.9:0.2" style ranges or comma-separated lists.
std::vector<double> parse_alpha_grid(const std::string& text);

struct QueryRecord {
  int fold = 0;
  PoiId s = 0;
  PoiId d = 0;
  int ground_truth_routes = 0;
  double f1 = 0.0;
  double pairs_f1 = 0.0;
  std::optional<double> diversity;  // absent for k = 1
  std::vector<double> combined_f1;        // per alpha, absent with diversity
  std::vector<double> combined_pairs_f1;  // per alpha
  double seconds = 0.0;
  std::vector<std::vector<PoiId>> itineraries;
  std::string error;  // non-empty when generation failed
};

struct FoldSummary {
  int fold = 0;
  int train_routes = 0;
  int queries = 0;
  int failed = 0;
  double f1 = 0.0;
  double pairs_f1 = 0.0;
  std::optional<double> diversity;
  std::vector<double> combined_f1;
  std::vector<double> combined_pairs_f1;
  double mean_seconds = 0.0;
};

struct EvaluationConfig {
  int k = 3;
  std::optional<int> length;
  Method method = Method::kLstm;
  std::vector<double> alphas{0.1, 0.3, 0.5, 0.7, 0.9};
  std::uint64_t seed = 1;
  PlannerOptions planner;
  // Folds to run; empty runs all of them.
  std::vector<int> folds;

  std::uint64_t fingerprint() const;
};

struct EvaluationReport {
  EvaluationConfig config;
  std::vector<QueryRecord> records;
  std::vector<FoldSummary> folds;
  // Means of the fold means.
  double f1 = 0.0;
  double pairs_f1 = 0.0;
  std::optional<double> diversity;
  std::vector<double> combined_f1;
  std::vector<double> combined_pairs_f1;
  double mean_seconds = 0.0;
};

// Trains a model on the given routes for the given fold.
using ModelFactory = std::function<ItrNetModel(int fold, const std::vector<Route>& train)>;

// For every fold: train on the other folds, query each distinct (s, d) of the
// fold's routes, and score the k itineraries against every route in the whole
// dataset with those endpoints. Queries run in parallel; a failing query is
// recorded with its error and left out of the means.
EvaluationReport evaluate_folds(const ModelFactory& factory, const std::vector<Route>& routes,
                                const FoldAssignment& folds, const EvaluationConfig& config);

void write_report_csv(const EvaluationReport& report, const std::filesystem::path& file);
nlohmann::json report_summary_json(const EvaluationReport& report);
void write_report_json(const EvaluationReport& report, const std::filesystem::path& file);

}  // namespace alttrip
