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

// Everything a query needs in one checkpoint: the catalog, the embedding
// table and the trained model.

#pragma once

#include <filesystem>
#include <string>

#include "alttrip/dataset.hpp"
#include "alttrip/itrnet.hpp"

namespace alttrip {

struct EngineBundle {
  std::string dataset_name;
  PoiCatalog catalog;
  ItrNetModel model;  // carries the embedding table

  // HashMismatch unless the embeddings were trained on this catalog and the
  // model has one row per POI.
  void check_consistency() const;
};

void save_bundle(const EngineBundle& bundle, const std::filesystem::path& file);
// CorruptFile, VersionMismatch or HashMismatch on a damaged or inconsistent
// file.
EngineBundle load_bundle(const std::filesystem::path& file);

}  // namespace alttrip
