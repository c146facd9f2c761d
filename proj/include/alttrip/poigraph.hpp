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

// POI graphs and graph-autoencoder embeddings.
//
// Two graphs share the catalog as node set: a category graph (1 between
// POIs of the same category) and a distance graph whose weights decay
// exponentially with distance from 1 at the closest pair to 0 at the
// farthest. Each graph is embedded by a two-layer GCN encoder trained to
// reconstruct its adjacency through relu(Z Z^T); the two embeddings are
// concatenated into the table used by the sequence model.

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "alttrip/dataset.hpp"
#include "alttrip/kernels.hpp"

namespace alttrip {

enum class GraphKind { kCategory, kDistance, kFused };

std::string graph_kind_name(GraphKind kind);

struct AdjacencyMatrix {
  Matrix values;
  GraphKind kind = GraphKind::kCategory;

  int size() const { return static_cast<int>(values.rows()); }
};

enum class GaeLoss { kMse, kCrossEntropy };

struct GaeConfig {
  int embed_dim = 12;
  int hidden_dim = 32;
  double learning_rate = 0.05;
  int epochs = 300;
  // Stop once the loss improved by less than `min_improvement` for
  // `patience` consecutive epochs. patience <= 0 disables early stopping.
  int patience = 20;
  double min_improvement = 1e-5;
  GaeLoss loss = GaeLoss::kCrossEntropy;
  std::uint64_t seed = 1;

  std::uint64_t fingerprint() const;

  // Defaults for the category graph (12 dims, lr 0.05, cross-entropy) and
  // distance graph (24 dims, lr 0.01, MSE).
  static GaeConfig category_defaults();
  static GaeConfig distance_defaults();
};

struct EmbeddingTable {
  Matrix z;  // one row per POI
  GraphKind kind = GraphKind::kFused;
  std::uint64_t seed = 0;
  std::uint64_t config_hash = 0;
  std::uint64_t catalog_hash = 0;

  int size() const { return static_cast<int>(z.rows()); }
  int dim() const { return static_cast<int>(z.cols()); }
  std::uint64_t fingerprint() const;
};

// Loss per epoch; entry 0 is the loss of the initial parameters.
struct GaeTrace {
  std::vector<double> loss;
};

AdjacencyMatrix build_category_adjacency(const PoiCatalog& catalog);

// Great-circle-free approximation: equirectangular projection in kilometres
// around the catalog's mean latitude, then Euclidean distance.
Matrix poi_distances_km(const PoiCatalog& catalog);

AdjacencyMatrix build_distance_adjacency(const PoiCatalog& catalog);
// Same weighting from an explicit symmetric distance matrix.
AdjacencyMatrix distance_adjacency_from(const Matrix& distances);

EmbeddingTable train_gae(const AdjacencyMatrix& adjacency, const GaeConfig& config,
                         GaeTrace* trace = nullptr);

EmbeddingTable fuse_embeddings(const EmbeddingTable& zc, const EmbeddingTable& zd);

// Both graphs, both autoencoders, fused and stamped with the catalog hash.
EmbeddingTable embed_catalog(const PoiCatalog& catalog, const GaeConfig& category,
                             const GaeConfig& distance, GaeTrace* category_trace = nullptr,
                             GaeTrace* distance_trace = nullptr);

// Binary checkpoint with header {N, d, kind, seed, config hash, catalog hash}
// and a trailing checksum. Reload is bit-identical.
void save_embeddings(const EmbeddingTable& table, const std::filesystem::path& file);
EmbeddingTable load_embeddings(const std::filesystem::path& file);

}  // namespace alttrip
