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

// POI catalogs, check-in logs, and historical route reconstruction.

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace alttrip {

using PoiId = int;

struct Poi {
  PoiId id = 0;
  double lat = 0.0;
  double lon = 0.0;
  std::string category;
};

class PoiCatalog {
 public:
  PoiCatalog() = default;
  // Validates ids (contiguous 0..N-1 after sorting), coordinate ranges and
  // categories. Throws DuplicateId / EmptyCatalog / ParseError.
  explicit PoiCatalog(std::vector<Poi> pois);

  int size() const { return static_cast<int>(pois_.size()); }
  const Poi& operator[](PoiId id) const { return pois_[static_cast<std::size_t>(id)]; }
  const std::vector<Poi>& pois() const { return pois_; }
  bool contains(PoiId id) const { return id >= 0 && id < size(); }

  std::uint64_t fingerprint() const;

 private:
  std::vector<Poi> pois_;
};

// A historical route or a generated itinerary body: ordered POI ids.
using Route = std::vector<PoiId>;

struct Visit {
  std::string user;
  PoiId poi = 0;
  std::int64_t ts = 0;  // Unix seconds
};

struct FoldAssignment {
  std::vector<int> fold_of_route;
  std::uint64_t seed = 0;
  int n_folds = 5;

  std::vector<int> fold_sizes() const;
  std::vector<std::size_t> routes_in_fold(int fold) const;
  std::vector<std::size_t> routes_outside_fold(int fold) const;
};

using Endpoints = std::pair<PoiId, PoiId>;

// Historical routes keyed by (first POI, last POI). Multiplicity preserved.
struct GroundTruthIndex {
  std::map<Endpoints, std::vector<Route>> by_endpoints;

  std::size_t key_count() const { return by_endpoints.size(); }
  const std::vector<Route>* find(PoiId s, PoiId d) const;
};

PoiCatalog load_catalog(const std::filesystem::path& poi_file);
void save_catalog(const PoiCatalog& catalog, const std::filesystem::path& poi_file);

std::vector<Visit> load_visits(const std::filesystem::path& visits_file);

// Splits each user's time-ordered visits wherever consecutive check-ins are
// more than `gap_hours` apart, drops repeated POIs (first occurrence wins),
// and keeps trajectories with at least three distinct POIs. Output order:
// users in lexicographic order, trajectories in time order.
std::vector<Route> build_routes(std::vector<Visit> visits, const PoiCatalog& catalog,
                                double gap_hours = 8.0);

// Shuffle with `seed`, then deal routes round-robin into `n_folds` folds.
FoldAssignment split_folds(const std::vector<Route>& routes, int n_folds, std::uint64_t seed);

GroundTruthIndex ground_truth_index(const std::vector<Route>& routes);

// routes.csv: `route_id,pois` with POIs separated by ';'.
void save_routes(const std::vector<Route>& routes, const std::filesystem::path& file);
std::vector<Route> load_routes(const std::filesystem::path& file, const PoiCatalog& catalog);

// folds.json: {"seed": int, "n_folds": int, "assignment": [fold_id, ...]}
void save_folds(const FoldAssignment& folds, const std::filesystem::path& file);
FoldAssignment load_folds(const std::filesystem::path& file);

std::uint64_t routes_fingerprint(const std::vector<Route>& routes);

// Splits one CSV record; supports double-quoted fields with "" escapes.
std::vector<std::string> split_csv_line(const std::string& line);

}  // namespace alttrip
