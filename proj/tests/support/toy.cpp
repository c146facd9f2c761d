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

#include "toy.hpp"

#include <chrono>
#include <numeric>

#include <unistd.h>

#include "alttrip/rng.hpp"

namespace alttrip::testing {

PoiCatalog toy_catalog(int n, std::uint64_t seed) {
  static const char* kCategories[] = {"museum", "park", "church", "market"};
  Rng rng(seed);
  std::vector<Poi> pois;
  for (int i = 0; i < n; ++i) {
    pois.push_back({i, 55.94 + rng.uniform(-0.02, 0.02), -3.19 + rng.uniform(-0.03, 0.03),
                    kCategories[i % 4]});
  }
  return PoiCatalog(std::move(pois));
}

EmbeddingTable random_embeddings(const PoiCatalog& catalog, int dim, std::uint64_t seed) {
  Rng rng(seed);
  EmbeddingTable t;
  t.z = Matrix(static_cast<std::size_t>(catalog.size()), static_cast<std::size_t>(dim));
  for (double& v : t.z.values()) v = rng.uniform(-1.0, 1.0);
  t.seed = seed;
  t.catalog_hash = catalog.fingerprint();
  return t;
}

ItrNetModel random_model(int n, std::uint64_t seed, int dim, int hidden, int mlp) {
  return ItrNetModel(random_embeddings(toy_catalog(n, seed), dim, seed), hidden, mlp, seed);
}

const Memorized& memorized() {
  static const Memorized m = [] {
    Memorized out;
    std::vector<Poi> pois;
    const char* cats[] = {"museum", "park", "church"};
    for (int i = 0; i < 10; ++i) {
      pois.push_back({i, 55.94 + 0.003 * i, -3.19 + 0.002 * ((i * 7) % 10), cats[i % 3]});
    }
    out.catalog = PoiCatalog(std::move(pois));
    out.route = {2, 6, 4, 8, 1};
    const auto t0 = std::chrono::steady_clock::now();
    auto emb = embed_catalog(out.catalog, GaeConfig::category_defaults(),
                             GaeConfig::distance_defaults());
    std::vector<Route> routes(200, out.route);
    out.model = train_itrnet(routes, emb, TrainConfig{});
    out.train_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return out;
  }();
  return m;
}

const ItrNetModel& small_trained_model() {
  static const ItrNetModel model = [] {
    const int n = 16;
    auto catalog = toy_catalog(n, 11);
    Rng rng(11);
    std::vector<Route> routes;
    for (int i = 0; i < 120; ++i) {
      routes.push_back(random_sequence(n, rng.between(3, 7), rng.next()));
    }
    TrainConfig cfg;
    cfg.hidden_size = 16;
    cfg.mlp_dim = 12;
    cfg.epochs = 5;
    cfg.learning_rate = 0.01;
    return train_itrnet(routes, random_embeddings(catalog, 8, 11), cfg);
  }();
  return model;
}

std::vector<PoiId> random_sequence(int n, int length, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<PoiId> ids(static_cast<std::size_t>(n));
  std::iota(ids.begin(), ids.end(), 0);
  rng.shuffle(ids);
  ids.resize(static_cast<std::size_t>(length));
  return ids;
}

std::filesystem::path temp_dir(const std::string& tag) {
  static int counter = 0;
  auto dir = std::filesystem::temp_directory_path() /
             ("alttrip_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace alttrip::testing
