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

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "alttrip/dataset.hpp"

namespace alttrip {

enum class Method { kLstm, kSampler };

std::string method_name(Method method);
// "lstm" or "sampler"; anything else throws InvalidArgument.
Method parse_method(const std::string& name);

struct Query {
  PoiId s = 0;
  PoiId d = 0;
  int k = 1;
  std::optional<int> length;  // fixed itinerary length L
  Method method = Method::kLstm;
  std::uint64_t seed = 0;     // only the sampler consumes randomness
};

// Throws InvalidArgument (s == d, k < 1, L < 3) or InvalidId.
void validate_query(const Query& query, int n_pois);

struct Itinerary {
  std::vector<PoiId> pois;
  double perplexity = 0.0;
  PoiId prominent = -1;
};

struct RecommendationSet {
  Query query;
  std::vector<Itinerary> itineraries;
  // Occurrence count of every POI over the returned itineraries.
  std::vector<int> occurrences;
};

}  // namespace alttrip
