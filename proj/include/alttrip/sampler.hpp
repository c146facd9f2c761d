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

// Itinerary search by local edits.
//
// Starting from a seed that satisfies the constraints, each iteration picks
// an interior position and one of four edits (insert after it, delete it,
// resample it, or swap it with another interior POI and resample). New POIs
// are drawn from a blend of the forward and backward step distributions
// weighted by position. A candidate is adopted when it satisfies every
// constraint and either lowers the perplexity or the chain has rejected two
// candidates in a row. The lowest-perplexity adopted itinerary is returned.

#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "alttrip/constraints.hpp"
#include "alttrip/itinerary.hpp"
#include "alttrip/itrnet.hpp"
#include "alttrip/rng.hpp"

namespace alttrip {

enum class Move { kInsert, kDelete, kReplace, kSwapReplace };

std::string move_name(Move move);

struct SamplerConfig {
  // 0 selects 5 (L - 2) with L the fixed length, or the model's longest
  // training route when the length is free.
  int iterations = 0;
  std::uint64_t seed = 1;
  std::optional<int> fixed_length;
  // Relative weights of insert, delete, replace, swap-replace among the
  // moves allowed at the chosen position. Fixed-length runs ignore them.
  std::array<double, 4> move_weights{1.0, 1.0, 1.0, 1.0};
  int seed_restarts = 100;
};

int sampler_iterations(const SamplerConfig& config, const ItrNetModel& model);

struct MoveOutcome {
  std::vector<PoiId> candidate;  // equals the current itinerary for a no-op
  Move move = Move::kReplace;
  int position = 0;              // 0-based index of the edited POI
  bool noop = false;
  bool feasible = false;         // candidate satisfies the constraints
  bool accepted = false;
  double perplexity = 0.0;
  int stall_before = 0;          // consecutive rejections before this move
  double current_perplexity = 0.0;  // of the chain state before this move
  double best_perplexity = 0.0;     // best adopted so far, after this move
};

struct SamplerTrace {
  std::vector<PoiId> seed;
  double seed_perplexity = 0.0;
  std::vector<MoveOutcome> moves;
};

// Blended distribution for index `t` of `itinerary`: beta * P_f(prefix) +
// (1 - beta) * P_b(suffix), beta = t / (T - 1). With `insertion` the slot is
// a new one between t - 1 and t, so the suffix starts at the current index t
// and T counts the inserted POI.
ProbVector slot_distribution(const ItrNetModel& model, std::span<const PoiId> itinerary, int t,
                             bool insertion, const PoiMask& mask);

// Initial itinerary. Free length without constraints: (s, prominent, d).
// Fixed length: the prominent POI at a random interior slot, the remaining
// slots filled left to right by the blended argmax. Must-see POIs are placed
// first; up to `restarts` randomized attempts are made before
// InfeasibleConstraints.
Itinerary seed_itinerary(const ItrNetModel& model, PoiId prominent, PoiId s, PoiId d,
                         const ConstraintSet* constraints, std::optional<int> fixed_length,
                         Rng& rng, int restarts = 100);

// One edit at 0-based index t (1 <= t <= size - 2). Protected POIs may not be
// deleted or resampled (IllegalMove); swap-replace resamples the POI moved
// into t only when it is not protected.
std::vector<PoiId> apply_move(const ItrNetModel& model, std::span<const PoiId> current, Move move,
                              int t, Rng& rng, const PoiMask& protected_pois);

Itinerary sample_itinerary(const ItrNetModel& model, PoiId prominent, PoiId s, PoiId d,
                           const ConstraintSet* constraints, const SamplerConfig& config,
                           SamplerTrace* trace = nullptr);

}  // namespace alttrip
