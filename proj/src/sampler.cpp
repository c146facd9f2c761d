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

#include "alttrip/sampler.hpp"

#include <algorithm>
#include <limits>

#include "alttrip/error.hpp"

namespace alttrip {
namespace {

std::vector<PoiId> reversed(std::span<const PoiId> seq) { return {seq.rbegin(), seq.rend()}; }

PoiMask present_mask(int n, std::span<const PoiId> itinerary, int except = -1) {
  PoiMask mask(n);
  for (std::size_t i = 0; i < itinerary.size(); ++i) {
    if (static_cast<int>(i) != except) mask.mask(itinerary[i]);
  }
  return mask;
}

// Draw an index with probability proportional to `probs`.
PoiId draw(const std::vector<double>& probs, Rng& rng) {
  double total = 0.0;
  for (double p : probs) total += p;
  if (!(total > 0.0)) fail(Errc::kExhaustedCandidates, "no POI has positive probability");
  const double u = rng.uniform01() * total;
  double acc = 0.0;
  PoiId last = -1;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (probs[i] <= 0.0) continue;
    acc += probs[i];
    last = static_cast<PoiId>(i);
    if (u < acc) return last;
  }
  return last;
}

// Fills the holes (-1) of `slots` left to right from the blended
// distribution; argmax when `greedy`, a draw otherwise. The backward context
// is the run of filled slots directly after the hole; when the next slot is
// itself a hole only the forward model is used.
void fill_slots(const ItrNetModel& model, std::vector<PoiId>& slots, bool greedy, Rng& rng) {
  const int n = model.poi_count();
  const auto length = static_cast<int>(slots.size());
  const PoiId s = slots.front();
  const PoiId d = slots.back();
  for (int j = 1; j < length - 1; ++j) {
    if (slots[static_cast<std::size_t>(j)] >= 0) continue;
    PoiMask mask(n);
    for (PoiId p : slots) {
      if (p >= 0) mask.mask(p);
    }
    if (mask.unmasked_count() == 0) fail(Errc::kExhaustedCandidates, "catalog too small");
    std::span<const PoiId> prefix(slots.data(), static_cast<std::size_t>(j));
    const auto pf = forward_step_probs(model, prefix, s, d, mask);
    std::vector<PoiId> suffix;
    for (int i = j + 1; i < length && slots[static_cast<std::size_t>(i)] >= 0; ++i) {
      suffix.push_back(slots[static_cast<std::size_t>(i)]);
    }
    ProbVector pc = pf;
    if (!suffix.empty()) {
      const auto pb = backward_step_probs(model, reversed(suffix), s, d, mask);
      pc = combined_step_probs(pf, pb, j, length);
    }
    slots[static_cast<std::size_t>(j)] = greedy ? pc.argmax() : draw(pc.probs, rng);
  }
}

Itinerary finish(const ItrNetModel& model, std::vector<PoiId> pois, PoiId prominent) {
  Itinerary out;
  out.perplexity = route_perplexity(model, pois, pois.front(), pois.back());
  out.pois = std::move(pois);
  out.prominent = prominent;
  return out;
}

}  // namespace

std::string move_name(Move move) {
  switch (move) {
    case Move::kInsert: return "insert";
    case Move::kDelete: return "delete";
    case Move::kReplace: return "replace";
    case Move::kSwapReplace: return "swap_replace";
  }
  return "unknown";
}

int sampler_iterations(const SamplerConfig& config, const ItrNetModel& model) {
  if (config.iterations > 0) return config.iterations;
  if (config.iterations < 0) fail(Errc::kInvalidArgument, "iterations must be >= 1");
  const int length = config.fixed_length ? *config.fixed_length
                                         : std::max(model.max_route_length, 5);
  return 5 * std::max(1, length - 2);
}

ProbVector slot_distribution(const ItrNetModel& model, std::span<const PoiId> itinerary, int t,
                             bool insertion, const PoiMask& mask) {
  const auto size = static_cast<int>(itinerary.size());
  const int hi = insertion ? size - 1 : size - 2;
  if (size < 2 || t < 1 || t > hi) {
    fail(Errc::kBadPosition, "slot " + std::to_string(t) + " outside the interior");
  }
  const auto ut = static_cast<std::size_t>(t);
  const auto prefix = itinerary.first(ut);
  const auto suffix = insertion ? itinerary.subspan(ut) : itinerary.subspan(ut + 1);
  const PoiId s = itinerary.front();
  const PoiId d = itinerary.back();
  const auto pf = forward_step_probs(model, prefix, s, d, mask);
  const auto pb = backward_step_probs(model, reversed(suffix), s, d, mask);
  return combined_step_probs(pf, pb, t, insertion ? size + 1 : size);
}

Itinerary seed_itinerary(const ItrNetModel& model, PoiId prominent, PoiId s, PoiId d,
                         const ConstraintSet* constraints, std::optional<int> fixed_length,
                         Rng& rng, int restarts) {
  model.check_id(prominent);
  model.check_id(s);
  model.check_id(d);
  if (s == d) fail(Errc::kInvalidArgument, "source and destination coincide");
  if (prominent == s || prominent == d) {
    fail(Errc::kInvalidArgument, "prominent POI must differ from source and destination");
  }
  if (fixed_length && *fixed_length < 3) fail(Errc::kInvalidArgument, "length must be >= 3");
  if (fixed_length && *fixed_length > model.poi_count()) {
    fail(Errc::kExhaustedCandidates, "length exceeds the number of POIs");
  }

  const bool constrained = constraints && !constraints->empty();
  std::vector<PoiId> must;
  if (constraints) {
    for (PoiId m : constraints->must_see) {
      model.check_id(m);
      if (m != s && m != d && m != prominent && std::find(must.begin(), must.end(), m) == must.end()) {
        must.push_back(m);
      }
    }
  }
  if (fixed_length && static_cast<int>(must.size()) + 1 > *fixed_length - 2) {
    fail(Errc::kInfeasibleConstraints, "must-see POIs do not fit in the itinerary length");
  }

  const int attempts = constrained ? std::max(1, restarts) : 1;
  for (int attempt = 0; attempt < attempts; ++attempt) {
    if (attempt > 0) rng.shuffle(must);
    std::vector<PoiId> pois;
    if (fixed_length) {
      const int length = *fixed_length;
      pois.assign(static_cast<std::size_t>(length), -1);
      pois.front() = s;
      pois.back() = d;
      pois[static_cast<std::size_t>(rng.between(1, length - 2))] = prominent;
      for (PoiId m : must) {
        std::vector<int> free;
        for (int j = 1; j < length - 1; ++j) {
          if (pois[static_cast<std::size_t>(j)] < 0) free.push_back(j);
        }
        pois[static_cast<std::size_t>(free[rng.index(free.size())])] = m;
      }
      fill_slots(model, pois, attempt == 0, rng);
    } else {
      pois = {s, prominent, d};
      for (PoiId m : must) {
        const auto at = attempt == 0 ? pois.size() - 1 : 1 + rng.index(pois.size() - 1);
        pois.insert(pois.begin() + static_cast<std::ptrdiff_t>(at), m);
      }
    }
    if (!constrained || check_constraints(pois, *constraints).satisfied) {
      return finish(model, std::move(pois), prominent);
    }
  }
  fail(Errc::kInfeasibleConstraints,
       "no initial itinerary satisfies the constraints after " + std::to_string(attempts) +
           " attempts");
}

std::vector<PoiId> apply_move(const ItrNetModel& model, std::span<const PoiId> current, Move move,
                              int t, Rng& rng, const PoiMask& protected_pois) {
  const auto size = static_cast<int>(current.size());
  if (size < 3 || t < 1 || t > size - 2) {
    fail(Errc::kBadPosition, "position " + std::to_string(t) + " is not interior");
  }
  const int n = model.poi_count();
  const auto ut = static_cast<std::size_t>(t);
  std::vector<PoiId> out(current.begin(), current.end());

  auto replace_at = [&](std::vector<PoiId>& seq, int pos) {
    const PoiMask mask = present_mask(n, seq, pos);
    const auto pc = slot_distribution(model, seq, pos, false, mask);
    seq[static_cast<std::size_t>(pos)] = draw(pc.probs, rng);
  };

  switch (move) {
    case Move::kInsert: {
      const PoiMask mask = present_mask(n, current);
      if (mask.unmasked_count() == 0) fail(Errc::kExhaustedCandidates, "every POI is in use");
      const auto pc = slot_distribution(model, current, t + 1, true, mask);
      out.insert(out.begin() + t + 1, draw(pc.probs, rng));
      break;
    }
    case Move::kDelete:
      if (protected_pois.masked(current[ut])) fail(Errc::kIllegalMove, "cannot delete a protected POI");
      if (size <= 3) fail(Errc::kIllegalMove, "cannot delete the only interior POI");
      out.erase(out.begin() + t);
      break;
    case Move::kReplace:
      if (protected_pois.masked(current[ut])) {
        fail(Errc::kIllegalMove, "cannot replace a protected POI");
      }
      replace_at(out, t);
      break;
    case Move::kSwapReplace: {
      if (size < 4) fail(Errc::kIllegalMove, "swap needs two interior POIs");
      int other = rng.between(1, size - 3);
      if (other >= t) ++other;
      std::swap(out[ut], out[static_cast<std::size_t>(other)]);
      if (!protected_pois.masked(out[ut])) replace_at(out, t);
      break;
    }
  }
  return out;
}

Itinerary sample_itinerary(const ItrNetModel& model, PoiId prominent, PoiId s, PoiId d,
                           const ConstraintSet* constraints, const SamplerConfig& config,
                           SamplerTrace* trace) {
  double weight_sum = 0.0;
  for (double w : config.move_weights) {
    if (w < 0.0) fail(Errc::kInvalidArgument, "move weights must be >= 0");
    weight_sum += w;
  }
  if (!(weight_sum > 0.0)) fail(Errc::kInvalidArgument, "move weights must not all be 0");
  const int iterations = sampler_iterations(config, model);
  const bool constrained = constraints && !constraints->empty();

  Rng rng(config.seed);
  Itinerary seed = seed_itinerary(model, prominent, s, d, constraints, config.fixed_length, rng,
                                  config.seed_restarts);
  PoiMask protected_pois(model.poi_count());
  protected_pois.mask(prominent);
  if (constraints) protected_pois.mask_all(constraints->must_see);

  std::vector<PoiId> current = seed.pois;
  double current_ppl = seed.perplexity;
  Itinerary best = seed;
  int stall = 0;
  if (trace) {
    *trace = SamplerTrace{};
    trace->seed = seed.pois;
    trace->seed_perplexity = seed.perplexity;
  }

  for (int j = 0; j < iterations; ++j) {
    const auto size = static_cast<int>(current.size());
    const int t = rng.between(1, size - 2);
    const bool is_protected = protected_pois.masked(current[static_cast<std::size_t>(t)]);

    std::optional<Move> move;
    if (config.fixed_length) {
      if (is_protected) {
        if (rng.coin(0.5) && size >= 4) move = Move::kSwapReplace;
      } else {
        move = rng.coin(0.5) ? Move::kReplace : Move::kSwapReplace;
      }
    } else {
      std::array<double, 4> w = config.move_weights;
      if (static_cast<int>(current.size()) >= model.poi_count()) w[0] = 0.0;
      if (is_protected || size <= 3) w[1] = 0.0;
      if (is_protected) w[2] = 0.0;
      if (size < 4) w[3] = 0.0;
      const double total = w[0] + w[1] + w[2] + w[3];
      if (total > 0.0) {
        const double u = rng.uniform01() * total;
        double acc = 0.0;
        for (int m = 0; m < 4; ++m) {
          if (w[static_cast<std::size_t>(m)] <= 0.0) continue;
          acc += w[static_cast<std::size_t>(m)];
          move = static_cast<Move>(m);
          if (u < acc) break;
        }
      }
    }

    MoveOutcome outcome;
    outcome.position = t;
    outcome.stall_before = stall;
    outcome.current_perplexity = current_ppl;
    if (!move) {
      // Nothing may be done at this position; counts as a rejection.
      outcome.noop = true;
      outcome.candidate = current;
      outcome.perplexity = current_ppl;
      ++stall;
    } else {
      outcome.move = *move;
      outcome.candidate = apply_move(model, current, *move, t, rng, protected_pois);
      outcome.feasible = !constrained || check_constraints(outcome.candidate, *constraints).satisfied;
      outcome.perplexity = route_perplexity(model, outcome.candidate, s, d);
      outcome.accepted = outcome.feasible && (outcome.perplexity < current_ppl || stall >= 2);
      if (outcome.accepted) {
        current = outcome.candidate;
        current_ppl = outcome.perplexity;
        stall = 0;
        if (current_ppl < best.perplexity) {
          best.pois = current;
          best.perplexity = current_ppl;
        }
      } else {
        ++stall;
      }
    }
    outcome.best_perplexity = best.perplexity;
    if (trace) trace->moves.push_back(std::move(outcome));
  }
  return best;
}

}  // namespace alttrip
