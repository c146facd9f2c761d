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

#include "alttrip/poigraph.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "alttrip/adam.hpp"
#include "alttrip/binary_io.hpp"
#include "alttrip/error.hpp"
#include "alttrip/hash.hpp"
#include "alttrip/rng.hpp"

namespace alttrip {
namespace {

constexpr double kEarthRadiusKm = 6371.0088;
constexpr double kPi = 3.14159265358979323846;
// Probability clamp for the cross-entropy reconstruction loss.
constexpr double kProbEps = 1e-4;

constexpr char kEmbeddingMagic[] = "ATEMBED";
constexpr std::uint32_t kEmbeddingVersion = 1;

void glorot(Matrix& w, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(w.rows() + w.cols()));
  for (double& v : w.values()) v = rng.uniform(-limit, limit);
}

// D^{-1/2} A D^{-1/2}. Diagonals are already 1 for both graph kinds, so
// every degree is at least 1.
Matrix normalized_propagation(const Matrix& a) {
  const std::size_t n = a.rows();
  std::vector<double> inv_sqrt(n);
  for (std::size_t i = 0; i < n; ++i) {
    double deg = 0.0;
    for (double v : a.row(i)) deg += v;
    inv_sqrt[i] = deg > 0.0 ? 1.0 / std::sqrt(deg) : 0.0;
  }
  Matrix s(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) s(i, j) = inv_sqrt[i] * a(i, j) * inv_sqrt[j];
  }
  return s;
}

struct GaeParams {
  Matrix w0;  // N x hidden (identity node features fold into the first layer)
  Matrix w1;  // hidden x embed
};

struct GaeForward {
  Matrix h0, h1, p, z, m;
};

void gae_forward(const Matrix& s, const GaeParams& params, GaeForward& f) {
  kernels::omp::matmul(s, params.w0, f.h0);
  f.h1 = f.h0;
  for (double& v : f.h1.values()) v = std::max(v, 0.0);
  kernels::omp::matmul(s, f.h1, f.p);
  kernels::omp::matmul(f.p, params.w1, f.z);
  kernels::omp::matmul_nt(f.z, f.z, f.m);
}

// Loss of relu(M) against the target adjacency; fills dM when grad_m is non-null.
double reconstruction_loss(const Matrix& m, const Matrix& target, GaeLoss kind, Matrix* grad_m) {
  const double scale = 1.0 / static_cast<double>(m.size());
  double loss = 0.0;
  auto mv = m.values();
  auto tv = target.values();
  std::span<double> gv;
  if (grad_m) {
    if (grad_m->rows() != m.rows() || grad_m->cols() != m.cols()) *grad_m = Matrix(m.rows(), m.cols());
    gv = grad_m->values();
  }
  for (std::size_t i = 0; i < mv.size(); ++i) {
    const double recon = std::max(mv[i], 0.0);
    double dr = 0.0;
    if (kind == GaeLoss::kMse) {
      const double diff = recon - tv[i];
      loss += diff * diff;
      dr = 2.0 * diff;
    } else {
      const double p = std::clamp(recon, kProbEps, 1.0 - kProbEps);
      const double y = tv[i];
      loss -= y * std::log(p) + (1.0 - y) * std::log(1.0 - p);
      dr = (p - y) / (p * (1.0 - p));
    }
    if (grad_m) gv[i] = mv[i] > 0.0 ? dr * scale : 0.0;
  }
  return loss * scale;
}

void gae_backward(const Matrix& s, const GaeParams& params, const GaeForward& f,
                  const Matrix& grad_m, GaeParams& grads) {
  // M = Z Z^T  =>  dZ = (dM + dM^T) Z
  Matrix sym(grad_m.rows(), grad_m.cols());
  for (std::size_t i = 0; i < sym.rows(); ++i) {
    for (std::size_t j = 0; j < sym.cols(); ++j) sym(i, j) = grad_m(i, j) + grad_m(j, i);
  }
  Matrix dz, dp, dh1;
  kernels::omp::matmul(sym, f.z, dz);
  kernels::omp::matmul_tn(f.p, dz, grads.w1);
  kernels::omp::matmul_nt(dz, params.w1, dp);
  kernels::omp::matmul_tn(s, dp, dh1);  // S is symmetric; S^T dP
  for (std::size_t i = 0; i < dh1.size(); ++i) {
    if (f.h0.values()[i] <= 0.0) dh1.values()[i] = 0.0;
  }
  kernels::omp::matmul_tn(s, dh1, grads.w0);
}

bool loss_matches_kind(GaeLoss loss, GraphKind kind) {
  return (kind == GraphKind::kCategory && loss == GaeLoss::kCrossEntropy) ||
         (kind == GraphKind::kDistance && loss == GaeLoss::kMse);
}

GraphKind parse_kind(std::uint32_t raw) {
  if (raw > static_cast<std::uint32_t>(GraphKind::kFused)) {
    fail(Errc::kCorruptFile, "unknown embedding kind");
  }
  return static_cast<GraphKind>(raw);
}

}  // namespace

std::string graph_kind_name(GraphKind kind) {
  switch (kind) {
    case GraphKind::kCategory: return "category";
    case GraphKind::kDistance: return "distance";
    case GraphKind::kFused: return "fused";
  }
  return "unknown";
}

std::uint64_t GaeConfig::fingerprint() const {
  Fnv1a h;
  h.update(static_cast<std::int64_t>(embed_dim));
  h.update(static_cast<std::int64_t>(hidden_dim));
  h.update(learning_rate);
  h.update(static_cast<std::int64_t>(epochs));
  h.update(static_cast<std::int64_t>(patience));
  h.update(min_improvement);
  h.update(static_cast<std::int64_t>(loss));
  h.update(static_cast<std::int64_t>(seed));
  return h.digest();
}

GaeConfig GaeConfig::category_defaults() {
  GaeConfig c;
  c.embed_dim = 12;
  c.learning_rate = 0.05;
  c.loss = GaeLoss::kCrossEntropy;
  return c;
}

GaeConfig GaeConfig::distance_defaults() {
  GaeConfig c;
  c.embed_dim = 24;
  c.learning_rate = 0.01;
  c.loss = GaeLoss::kMse;
  return c;
}

std::uint64_t EmbeddingTable::fingerprint() const {
  Fnv1a h;
  h.update(static_cast<std::int64_t>(z.rows()));
  h.update(static_cast<std::int64_t>(z.cols()));
  h.update(z.values());
  return h.digest();
}

AdjacencyMatrix build_category_adjacency(const PoiCatalog& catalog) {
  const auto n = static_cast<std::size_t>(catalog.size());
  if (n == 0) fail(Errc::kEmptyCatalog, "catalog has no POIs");
  AdjacencyMatrix adj{Matrix(n, n), GraphKind::kCategory};
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      adj.values(i, j) = catalog.pois()[i].category == catalog.pois()[j].category ? 1.0 : 0.0;
    }
  }
  return adj;
}

Matrix poi_distances_km(const PoiCatalog& catalog) {
  const auto n = static_cast<std::size_t>(catalog.size());
  double mean_lat = 0.0;
  for (const auto& p : catalog.pois()) mean_lat += p.lat;
  mean_lat /= static_cast<double>(n);
  const double to_rad = kPi / 180.0;
  const double cos_lat = std::cos(mean_lat * to_rad);
  Matrix pts(n, 2);
  for (std::size_t i = 0; i < n; ++i) {
    pts(i, 0) = kEarthRadiusKm * catalog.pois()[i].lon * to_rad * cos_lat;
    pts(i, 1) = kEarthRadiusKm * catalog.pois()[i].lat * to_rad;
  }
  return kernels::omp::pairwise_distances(pts);
}

AdjacencyMatrix build_distance_adjacency(const PoiCatalog& catalog) {
  return distance_adjacency_from(poi_distances_km(catalog));
}

AdjacencyMatrix distance_adjacency_from(const Matrix& distances) {
  const std::size_t n = distances.rows();
  if (distances.cols() != n) fail(Errc::kShapeMismatch, "distance matrix must be square");
  if (n < 2) fail(Errc::kDegenerateGeometry, "distance graph needs at least two POIs");
  double d_min = std::numeric_limits<double>::infinity();
  double d_max = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      d_min = std::min(d_min, distances(i, j));
      d_max = std::max(d_max, distances(i, j));
    }
  }
  const double spread = d_max - d_min;
  if (!(spread > 0.0)) fail(Errc::kDegenerateGeometry, "all pairwise distances are equal");

  // Weight (e^{d_max - d} - 1) / (e^{d_max - d_min} - 1): 1 at d_min, 0 at
  // d_max. Evaluated as e^{-(d - d_min)} (1 - e^{-(d_max - d)}) / (1 - e^{-spread})
  // so no exponent is positive.
  const double denom = -std::expm1(-spread);
  AdjacencyMatrix adj{Matrix(n, n), GraphKind::kDistance};
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) {
        adj.values(i, j) = 1.0;
        continue;
      }
      const double d = distances(i, j);
      const double w = std::exp(-(d - d_min)) * -std::expm1(-(d_max - d)) / denom;
      adj.values(i, j) = std::clamp(w, 0.0, 1.0);
    }
  }
  return adj;
}

EmbeddingTable train_gae(const AdjacencyMatrix& adjacency, const GaeConfig& config,
                         GaeTrace* trace) {
  const std::size_t n = adjacency.values.rows();
  if (n == 0 || adjacency.values.cols() != n) {
    fail(Errc::kShapeMismatch, "adjacency must be a non-empty square matrix");
  }
  if (config.embed_dim < 1 || config.hidden_dim < 1 || config.epochs < 0 ||
      !(config.learning_rate >= 0.0)) {
    fail(Errc::kInvalidArgument, "invalid autoencoder configuration");
  }
  if (!loss_matches_kind(config.loss, adjacency.kind)) {
    fail(Errc::kConfigMismatch, "category graphs use cross-entropy, distance graphs use MSE");
  }

  const Matrix s = normalized_propagation(adjacency.values);
  Rng rng(config.seed);
  GaeParams params{Matrix(n, static_cast<std::size_t>(config.hidden_dim)),
                   Matrix(static_cast<std::size_t>(config.hidden_dim),
                          static_cast<std::size_t>(config.embed_dim))};
  glorot(params.w0, rng);
  glorot(params.w1, rng);

  GaeForward f;
  GaeParams grads;
  Matrix grad_m;
  Adam adam(config.learning_rate);

  gae_forward(s, params, f);
  double loss = reconstruction_loss(f.m, adjacency.values, config.loss, &grad_m);
  if (!std::isfinite(loss)) fail(Errc::kNonFiniteLoss, "autoencoder loss is not finite");
  if (trace) trace->loss = {loss};

  GaeParams best = params;
  Matrix best_z = f.z;
  double best_loss = loss;
  int stale = 0;

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    gae_backward(s, params, f, grad_m, grads);
    adam.step({params.w0.values(), params.w1.values()},
              {std::span<const double>(grads.w0.values()), std::span<const double>(grads.w1.values())});

    gae_forward(s, params, f);
    loss = reconstruction_loss(f.m, adjacency.values, config.loss, &grad_m);
    if (!std::isfinite(loss)) {
      fail(Errc::kNonFiniteLoss, "autoencoder diverged at epoch " + std::to_string(epoch + 1));
    }
    if (trace) trace->loss.push_back(loss);

    if (loss < best_loss - config.min_improvement) {
      stale = 0;
    } else {
      ++stale;
    }
    if (loss < best_loss) {
      best_loss = loss;
      best = params;
      best_z = f.z;
    }
    if (config.patience > 0 && stale >= config.patience) break;
  }

  EmbeddingTable table;
  table.z = std::move(best_z);
  table.kind = adjacency.kind;
  table.seed = config.seed;
  table.config_hash = config.fingerprint();
  return table;
}

EmbeddingTable fuse_embeddings(const EmbeddingTable& zc, const EmbeddingTable& zd) {
  if (zc.z.rows() != zd.z.rows()) {
    fail(Errc::kShapeMismatch, "embedding tables cover " + std::to_string(zc.z.rows()) + " and " +
                                   std::to_string(zd.z.rows()) + " POIs");
  }
  const std::size_t n = zc.z.rows();
  const std::size_t dc = zc.z.cols();
  EmbeddingTable out;
  out.z = Matrix(n, dc + zd.z.cols());
  for (std::size_t i = 0; i < n; ++i) {
    auto row = out.z.row(i);
    std::copy(zc.z.row(i).begin(), zc.z.row(i).end(), row.begin());
    std::copy(zd.z.row(i).begin(), zd.z.row(i).end(), row.begin() + static_cast<std::ptrdiff_t>(dc));
  }
  out.kind = GraphKind::kFused;
  out.seed = zc.seed;
  Fnv1a h;
  h.update(static_cast<std::int64_t>(zc.config_hash));
  h.update(static_cast<std::int64_t>(zd.config_hash));
  out.config_hash = h.digest();
  out.catalog_hash = zc.catalog_hash != 0 ? zc.catalog_hash : zd.catalog_hash;
  return out;
}

EmbeddingTable embed_catalog(const PoiCatalog& catalog, const GaeConfig& category,
                             const GaeConfig& distance, GaeTrace* category_trace,
                             GaeTrace* distance_trace) {
  auto zc = train_gae(build_category_adjacency(catalog), category, category_trace);
  auto zd = train_gae(build_distance_adjacency(catalog), distance, distance_trace);
  zc.catalog_hash = zd.catalog_hash = catalog.fingerprint();
  return fuse_embeddings(zc, zd);
}

void save_embeddings(const EmbeddingTable& table, const std::filesystem::path& file) {
  BinaryWriter w(kEmbeddingMagic, kEmbeddingVersion);
  w.u64(table.z.rows());
  w.u64(table.z.cols());
  w.u32(static_cast<std::uint32_t>(table.kind));
  w.u64(table.seed);
  w.u64(table.config_hash);
  w.u64(table.catalog_hash);
  w.matrix(table.z);
  w.write_file(file);
}

EmbeddingTable load_embeddings(const std::filesystem::path& file) {
  auto r = BinaryReader::from_file(file, kEmbeddingMagic, kEmbeddingVersion);
  EmbeddingTable t;
  const auto n = r.u64();
  const auto d = r.u64();
  t.kind = parse_kind(r.u32());
  t.seed = r.u64();
  t.config_hash = r.u64();
  t.catalog_hash = r.u64();
  t.z = r.matrix();
  if (t.z.rows() != n || t.z.cols() != d) fail(Errc::kCorruptFile, "embedding header/shape mismatch");
  return t;
}

}  // namespace alttrip
