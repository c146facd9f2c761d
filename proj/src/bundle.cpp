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

#include "alttrip/bundle.hpp"

#include "alttrip/binary_io.hpp"
#include "alttrip/error.hpp"

namespace alttrip {
namespace {

constexpr char kBundleMagic[] = "ATBUNDLE";
constexpr std::uint32_t kBundleVersion = 1;

}  // namespace

void EngineBundle::check_consistency() const {
  if (catalog.size() == 0) fail(Errc::kEmptyCatalog, "bundle has no catalog");
  if (model.poi_count() != catalog.size()) {
    fail(Errc::kHashMismatch, "model covers " + std::to_string(model.poi_count()) +
                                  " POIs but the catalog has " + std::to_string(catalog.size()));
  }
  if (model.embeddings().catalog_hash != catalog.fingerprint()) {
    fail(Errc::kHashMismatch, "embeddings were trained on a different catalog");
  }
}

void save_bundle(const EngineBundle& bundle, const std::filesystem::path& file) {
  bundle.check_consistency();
  BinaryWriter w(kBundleMagic, kBundleVersion);
  w.str(bundle.dataset_name);
  w.u64(static_cast<std::uint64_t>(bundle.catalog.size()));
  for (const auto& p : bundle.catalog.pois()) {
    w.i64(p.id);
    w.f64(p.lat);
    w.f64(p.lon);
    w.str(p.category);
  }
  w.u64(bundle.catalog.fingerprint());
  write_model(w, bundle.model);
  w.write_file(file);
}

EngineBundle load_bundle(const std::filesystem::path& file) {
  auto r = BinaryReader::from_file(file, kBundleMagic, kBundleVersion);
  EngineBundle b;
  b.dataset_name = r.str();
  const auto n = r.u64();
  if (n == 0 || n > (1u << 24)) fail(Errc::kCorruptFile, "implausible catalog size");
  std::vector<Poi> pois;
  pois.reserve(n);
  for (std::uint64_t i = 0; i < n; ++i) {
    Poi p;
    p.id = static_cast<PoiId>(r.i64());
    p.lat = r.f64();
    p.lon = r.f64();
    p.category = r.str();
    pois.push_back(std::move(p));
  }
  b.catalog = PoiCatalog(std::move(pois));
  if (r.u64() != b.catalog.fingerprint()) {
    fail(Errc::kHashMismatch, "catalog does not match its recorded hash");
  }
  b.model = read_model(r);
  if (!r.at_end()) fail(Errc::kCorruptFile, "trailing bytes after the model");
  b.check_consistency();
  return b;
}

}  // namespace alttrip
