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

// Small catalogs and models shared by the unit and acceptance tests.

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "alttrip/dataset.hpp"
#include "alttrip/itrnet.hpp"
#include "alttrip/poigraph.hpp"

namespace alttrip::testing {

// n POIs scattered around a city centre, categories cycling through four
// labels.
PoiCatalog toy_catalog(int n, std::uint64_t seed = 7);

// Random N x dim table stamped with the catalog's hash.
EmbeddingTable random_embeddings(const PoiCatalog& catalog, int dim, std::uint64_t seed);

// Untrained model over random embeddings.
ItrNetModel random_model(int n, std::uint64_t seed, int dim = 8, int hidden = 6, int mlp = 5);

// The one-route corpus: 200 copies of (2, 6, 4, 8, 1) over a 10-POI
// catalog. Trained once per process with the default configuration.
struct Memorized {
  PoiCatalog catalog;
  ItrNetModel model;
  Route route;
  double train_seconds = 0.0;
};
const Memorized& memorized();

// 16 POIs, 120 random routes of length 3..7, a few epochs. Trained once per
// process; good enough for structural checks, not for quality.
const ItrNetModel& small_trained_model();

// Random duplicate-free sequence of `length` ids from [0, n).
std::vector<PoiId> random_sequence(int n, int length, std::uint64_t seed);

// Fresh empty directory under the system temp dir.
std::filesystem::path temp_dir(const std::string& tag);

}  // namespace alttrip::testing
