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

// User constraints on itineraries: a travel budget, must-see POIs, and
// opening hours with a total time limit.
//
// constraints.json:
//   {
//     "budget":   {"limit": 40.0, "cost_matrix_ref": "cost.csv"},
//     "must_see": [4, 9],
//     "time":     {"start": 9.0, "limit": 10.0,
//                  "windows_ref": "hours.csv", "travel_matrix_ref": "travel.csv"}
//   }
// Every *_ref may be replaced by the inline form "cost_matrix" /
// "travel_matrix" (N x N array) or "windows" (array of
// {"poi_id", "open", "close", "stay"}). Matrix CSVs have the header
// `poi_id,<id>,<id>,...` followed by one row per POI; window CSVs have the
// header `poi_id,open,close,stay`. Entries that are not listed are missing
// and raise MissingTableEntry when an itinerary needs them.

#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "alttrip/dataset.hpp"
#include "alttrip/kernels.hpp"
#include "json.hpp"

namespace alttrip {

struct BudgetConstraint {
  Matrix cost;  // N x N, NaN where unknown
  double limit = 0.0;
};

struct TimeConstraint {
  double start = 0.0;
  std::optional<double> limit;
  // Per POI; NaN where unknown.
  std::vector<double> open, close, stay;
  Matrix travel;  // N x N, NaN where unknown
};

struct ConstraintSet {
  std::optional<BudgetConstraint> budget;
  std::vector<PoiId> must_see;
  std::optional<TimeConstraint> time;

  bool empty() const { return !budget && must_see.empty() && !time; }
  // Throws InvalidArgument / InvalidId for limits <= 0, negative costs or
  // durations, or ids outside [0, n_pois).
  void validate(int n_pois) const;
};

enum class ViolationKind { kBudget, kMustSee, kOpeningHours, kTimeLimit };

std::string violation_kind_name(ViolationKind kind);

struct Violation {
  ViolationKind kind = ViolationKind::kBudget;
  PoiId poi = -1;
  double value = 0.0;  // cost, arrival time, or elapsed time
  double limit = 0.0;
};

struct ConstraintReport {
  bool satisfied = true;
  std::vector<Violation> violations;
  double cost = 0.0;     // when a budget is set
  double elapsed = 0.0;  // when a time constraint is set
};

// Budget: sum of leg costs <= limit. Must-see: every listed POI present.
// Time: starting at `start` at the first POI, each POI is entered no earlier
// than its opening time (the visitor waits), must be reached no later than
// its closing time, and is left after its stay; travel between consecutive
// POIs takes the matrix entry. The elapsed time until leaving the last POI
// must not exceed `limit`.
ConstraintReport check_constraints(std::span<const PoiId> itinerary,
                                   const ConstraintSet& constraints);

// `base_dir` resolves *_ref paths; without it references are rejected.
ConstraintSet constraints_from_json(const nlohmann::json& doc, int n_pois,
                                    const std::filesystem::path* base_dir);
ConstraintSet load_constraints(const std::filesystem::path& file, int n_pois);

nlohmann::json report_to_json(const ConstraintReport& report);

}  // namespace alttrip
