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

// Query-time generation of k alternative itineraries.
//
// Each round picks a prominent POI (the most relevant among the POIs used
// least often so far) and builds an itinerary through it, either greedily
// with the two LSTMs or with the sampler.

#pragma once

#include <optional>
#include <span>
#include <vector>

#include "alttrip/constraints.hpp"
#include "alttrip/itinerary.hpp"
#include "alttrip/itrnet.hpp"
#include "alttrip/sampler.hpp"

namespace alttrip {

// Relevancy of every POI for the middle slot of (s, x, d): the mean of the
// forward and backward probabilities. s and d score 0.
std::vector<double> relevancy_scores(const ItrNetModel& model, PoiId s, PoiId d);

class OccurrenceCounter {
 public:
  explicit OccurrenceCounter(int n) : counts_(static_cast<std::size_t>(n), 0) {}

  void add(std::span<const PoiId> itinerary);
  int operator[](PoiId id) const { return counts_.at(static_cast<std::size_t>(id)); }
  const std::vector<int>& counts() const { return counts_; }

 private:
  std::vector<int> counts_;
};

// Highest score among the POIs other than s and d with the minimum count;
// ties go to the lowest id. Throws NoEligiblePoi.
PoiId pick_prominent(std::span<const double> scores, const OccurrenceCounter& occ, PoiId s,
                     PoiId d);

// How the endpoint slot of a free-length half is chosen from the endpoint
// probabilities p_1, p_2, ... recorded while walking away from the anchor.
enum class EndpointRule {
  // argmax_t p_t Π_{u<t} (1 - p_u): the slot where the walk most likely
  // reaches the endpoint first.
  kFirstPassage,
  // argmax_t p_t, the conditional probability at each slot on its own.
  kConditional,
};

enum class HalfDirection {
  kFirstHalf,   // s .. anchor, built backwards with the backward LSTM
  kSecondHalf,  // anchor .. d, built forwards with the forward LSTM
};

struct HalfOptions {
  int l_max = 0;  // the anchor sits at slot l_max
  // Upper bound on the fragment length (anchor and endpoint included);
  // 0 leaves only the slot range of l_max.
  int max_length = 0;
  // Exact fragment length; 0 lets the endpoint probability pick it.
  int exact_length = 0;
  // POIs already fixed on the far side of the anchor, in itinerary order
  // (the second half for kFirstHalf, the first half for kSecondHalf).
  std::vector<PoiId> context;
  EndpointRule endpoint_rule = EndpointRule::kFirstPassage;
};

struct HalfFragment {
  std::vector<PoiId> pois;  // in itinerary order, anchor and endpoint included
  int endpoint_slot = 0;    // t_s or t_d
};

// Greedy half itinerary around `anchor`. Every emitted POI is distinct from
// the anchor, s, d, the context, the other emitted POIs and `mask`.
HalfFragment generate_half(const ItrNetModel& model, PoiId anchor, PoiId s, PoiId d,
                           HalfDirection direction, const HalfOptions& options,
                           const PoiMask& mask);

struct LstmCandidates {
  std::optional<Itinerary> backward_first;
  std::optional<Itinerary> forward_first;
};

// Both construction orders; a candidate is absent when its generation ran out
// of POIs. l_max <= 0 selects the model's longest training route.
LstmCandidates lstm_candidates(const ItrNetModel& model, PoiId prominent, PoiId s, PoiId d,
                               std::optional<int> length, int l_max = 0,
                               EndpointRule rule = EndpointRule::kFirstPassage);

// The lower-perplexity candidate (backward-first on ties).
Itinerary generate_itinerary_lstm(const ItrNetModel& model, PoiId prominent, PoiId s, PoiId d,
                                  std::optional<int> length, int l_max = 0,
                                  EndpointRule rule = EndpointRule::kFirstPassage);

struct PlannerOptions {
  int l_max = 0;
  EndpointRule endpoint_rule = EndpointRule::kFirstPassage;
  int sampler_iterations = 0;
  int seed_restarts = 100;
};

// Throws ConstraintUnsupported for the LSTM method with a non-empty
// constraint set.
RecommendationSet recommend_topk(const ItrNetModel& model, const Query& query,
                                 const ConstraintSet* constraints = nullptr,
                                 const PlannerOptions& options = {});

}  // namespace alttrip
