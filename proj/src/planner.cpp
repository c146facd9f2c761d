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

#include "alttrip/planner.hpp"

#include <algorithm>
#include <limits>

#include "alttrip/error.hpp"
#include "alttrip/hash.hpp"

namespace alttrip {
namespace {

// Highest-probability POI other than `skip` with positive probability, or -1.
PoiId argmax_except(const std::vector<double>& probs, PoiId skip) {
  PoiId best = -1;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    const auto id = static_cast<PoiId>(i);
    if (id == skip || !(probs[i] > 0.0)) continue;
    if (best < 0 || probs[i] > probs[static_cast<std::size_t>(best)]) best = id;
  }
  return best;
}

std::uint64_t round_seed(std::uint64_t seed, int round) {
  Fnv1a h;
  h.update(static_cast<std::int64_t>(seed));
  h.update(static_cast<std::int64_t>(round));
  return h.digest();
}

}  // namespace

std::string method_name(Method method) {
  return method == Method::kLstm ? "lstm" : "sampler";
}

Method parse_method(const std::string& name) {
  if (name == "lstm") return Method::kLstm;
  if (name == "sampler") return Method::kSampler;
  fail(Errc::kInvalidArgument, "method must be 'lstm' or 'sampler', got '" + name + "'");
}

void validate_query(const Query& query, int n_pois) {
  for (PoiId p : {query.s, query.d}) {
    if (p < 0 || p >= n_pois) fail(Errc::kInvalidId, "POI id " + std::to_string(p));
  }
  if (query.s == query.d) fail(Errc::kInvalidArgument, "source and destination coincide");
  if (query.k < 1) fail(Errc::kInvalidArgument, "k must be >= 1");
  if (query.length && *query.length < 3) fail(Errc::kInvalidArgument, "L must be >= 3");
}

void OccurrenceCounter::add(std::span<const PoiId> itinerary) {
  for (PoiId p : itinerary) ++counts_.at(static_cast<std::size_t>(p));
}

std::vector<double> relevancy_scores(const ItrNetModel& model, PoiId s, PoiId d) {
  model.check_id(s);
  model.check_id(d);
  if (s == d) fail(Errc::kInvalidArgument, "source and destination coincide");
  PoiMask mask(model.poi_count());
  mask.mask(s);
  mask.mask(d);
  const PoiId prefix[] = {s};
  const PoiId suffix[] = {d};
  const auto pf = forward_step_probs(model, prefix, s, d, mask);
  const auto pb = backward_step_probs(model, suffix, s, d, mask);
  std::vector<double> scores(pf.probs.size());
  for (std::size_t i = 0; i < scores.size(); ++i) scores[i] = 0.5 * (pf.probs[i] + pb.probs[i]);
  return scores;
}

PoiId pick_prominent(std::span<const double> scores, const OccurrenceCounter& occ, PoiId s,
                     PoiId d) {
  if (scores.size() != occ.counts().size()) {
    fail(Errc::kShapeMismatch, "scores and counts differ in length");
  }
  int min_count = std::numeric_limits<int>::max();
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const auto id = static_cast<PoiId>(i);
    if (id != s && id != d) min_count = std::min(min_count, occ[id]);
  }
  PoiId best = -1;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const auto id = static_cast<PoiId>(i);
    if (id == s || id == d || occ[id] != min_count) continue;
    if (best < 0 || scores[i] > scores[static_cast<std::size_t>(best)]) best = id;
  }
  if (best < 0) fail(Errc::kNoEligiblePoi, "no POI other than source and destination");
  return best;
}

HalfFragment generate_half(const ItrNetModel& model, PoiId anchor, PoiId s, PoiId d,
                           HalfDirection direction, const HalfOptions& options,
                           const PoiMask& mask) {
  const bool backward = direction == HalfDirection::kFirstHalf;
  const Direction dir = backward ? Direction::kBackward : Direction::kForward;
  const PoiId endpoint = backward ? s : d;
  const PoiId far_end = backward ? d : s;
  if (mask.size() != model.poi_count()) fail(Errc::kShapeMismatch, "mask size");
  if (mask.masked(anchor)) fail(Errc::kInvalidArgument, "anchor is masked");
  if (anchor == s || anchor == d) fail(Errc::kInvalidArgument, "anchor must differ from s and d");
  if (options.exact_length == 0 && options.l_max < 2) {
    fail(Errc::kInvalidArgument, "L_max must be >= 2");
  }
  if (options.exact_length != 0 && options.exact_length < 2) {
    fail(Errc::kInvalidArgument, "a half itinerary has at least two POIs");
  }

  // Reading order for the LSTM: the far endpoint, the fixed context walked
  // towards the anchor, then the anchor.
  std::vector<PoiId> read;
  if (backward) {
    if (options.context.empty() || options.context.back() != d) read.push_back(d);
    read.insert(read.end(), options.context.rbegin(), options.context.rend());
  } else {
    if (options.context.empty() || options.context.front() != s) read.push_back(s);
    read.insert(read.end(), options.context.begin(), options.context.end());
  }
  read.push_back(anchor);

  PoiMask used = mask;
  for (PoiId p : read) used.mask(p);
  used.mask(far_end);
  used.unmask(endpoint);

  LstmState state = model.initial_state();
  for (PoiId p : read) state = model.advance(dir, state, p, s, d);

  std::vector<PoiId> emitted;  // walking away from the anchor
  int endpoint_slot = 0;
  auto step = [&]() {
    auto probs = model.distribution(dir, state, used);
    const PoiId choice = argmax_except(probs, endpoint);
    return std::pair{probs[static_cast<std::size_t>(endpoint)], choice};
  };
  auto take = [&](PoiId choice) {
    emitted.push_back(choice);
    used.mask(choice);
    state = model.advance(dir, state, choice, s, d);
  };

  if (options.exact_length > 0) {
    const int interior = options.exact_length - 2;
    for (int i = 0; i < interior; ++i) {
      const PoiId choice = step().second;
      if (choice < 0) fail(Errc::kExhaustedCandidates, "ran out of POIs for a half itinerary");
      take(choice);
    }
    endpoint_slot = backward ? options.l_max - options.exact_length + 1
                             : options.l_max + options.exact_length - 1;
  } else {
    // Slots walked away from the anchor: l_max-1 .. 1 backwards, l_max+1 ..
    // 2 l_max forwards, trimmed to max_length.
    int slots = options.l_max - 1;
    if (!backward) slots = options.l_max;
    if (options.max_length > 0) slots = std::min(slots, options.max_length - 1);
    if (slots < 1) fail(Errc::kInvalidArgument, "no slot left for the endpoint");
    double best = -1.0;
    double not_yet = 1.0;  // probability the walk has not reached the endpoint
    int best_offset = 1;
    for (int offset = 1; offset <= slots; ++offset) {
      const auto [p_end, choice] = step();
      const double score =
          options.endpoint_rule == EndpointRule::kFirstPassage ? p_end * not_yet : p_end;
      not_yet *= 1.0 - p_end;
      if (score > best) {
        best = score;
        best_offset = offset;
      }
      if (offset == slots || choice < 0) break;
      take(choice);
    }
    emitted.resize(static_cast<std::size_t>(best_offset - 1));
    endpoint_slot = backward ? options.l_max - best_offset : options.l_max + best_offset;
  }

  HalfFragment out;
  out.endpoint_slot = endpoint_slot;
  if (backward) {
    out.pois.push_back(s);
    out.pois.insert(out.pois.end(), emitted.rbegin(), emitted.rend());
    out.pois.push_back(anchor);
  } else {
    out.pois.push_back(anchor);
    out.pois.insert(out.pois.end(), emitted.begin(), emitted.end());
    out.pois.push_back(d);
  }
  return out;
}

LstmCandidates lstm_candidates(const ItrNetModel& model, PoiId prominent, PoiId s, PoiId d,
                               std::optional<int> length, int l_max, EndpointRule rule) {
  model.check_id(prominent);
  model.check_id(s);
  model.check_id(d);
  if (s == d) fail(Errc::kInvalidArgument, "source and destination coincide");
  if (prominent == s || prominent == d) {
    fail(Errc::kInvalidArgument, "prominent POI must differ from source and destination");
  }
  if (length) {
    if (*length < 3) fail(Errc::kInvalidArgument, "L must be >= 3");
    if (*length > model.poi_count()) {
      fail(Errc::kExhaustedCandidates, "L exceeds the number of POIs");
    }
    l_max = *length - 1;
  } else if (l_max <= 0) {
    l_max = std::max(model.max_route_length, 3);
  }
  const int cap = length ? *length - 1 : 0;
  const PoiMask none(model.poi_count());

  auto join = [&](const std::vector<PoiId>& first, const std::vector<PoiId>& second) {
    Itinerary it;
    it.pois = first;
    it.pois.insert(it.pois.end(), second.begin() + 1, second.end());
    it.prominent = prominent;
    it.perplexity = route_perplexity(model, it.pois, s, d);
    return it;
  };

  LstmCandidates out;
  try {
    HalfOptions first_opts{l_max, cap, 0, {}, rule};
    const auto first = generate_half(model, prominent, s, d, HalfDirection::kFirstHalf,
                                     first_opts, none);
    HalfOptions second_opts{l_max, 0, 0, {first.pois.begin(), first.pois.end() - 1}, rule};
    if (length) second_opts.exact_length = *length - static_cast<int>(first.pois.size()) + 1;
    const auto second = generate_half(model, prominent, s, d, HalfDirection::kSecondHalf,
                                      second_opts, none);
    out.backward_first = join(first.pois, second.pois);
  } catch (const Error& e) {
    if (e.code() != Errc::kExhaustedCandidates) throw;
  }
  try {
    HalfOptions second_opts{l_max, cap, 0, {}, rule};
    const auto second = generate_half(model, prominent, s, d, HalfDirection::kSecondHalf,
                                      second_opts, none);
    HalfOptions first_opts{l_max, 0, 0, {second.pois.begin() + 1, second.pois.end()}, rule};
    if (length) first_opts.exact_length = *length - static_cast<int>(second.pois.size()) + 1;
    const auto first = generate_half(model, prominent, s, d, HalfDirection::kFirstHalf,
                                     first_opts, none);
    out.forward_first = join(first.pois, second.pois);
  } catch (const Error& e) {
    if (e.code() != Errc::kExhaustedCandidates) throw;
  }
  return out;
}

Itinerary generate_itinerary_lstm(const ItrNetModel& model, PoiId prominent, PoiId s, PoiId d,
                                  std::optional<int> length, int l_max, EndpointRule rule) {
  auto c = lstm_candidates(model, prominent, s, d, length, l_max, rule);
  if (!c.backward_first && !c.forward_first) {
    fail(Errc::kExhaustedCandidates, "neither construction order produced an itinerary");
  }
  if (!c.forward_first) return std::move(*c.backward_first);
  if (!c.backward_first) return std::move(*c.forward_first);
  if (c.forward_first->perplexity < c.backward_first->perplexity) {
    return std::move(*c.forward_first);
  }
  return std::move(*c.backward_first);
}

RecommendationSet recommend_topk(const ItrNetModel& model, const Query& query,
                                 const ConstraintSet* constraints, const PlannerOptions& options) {
  validate_query(query, model.poi_count());
  const bool constrained = constraints && !constraints->empty();
  if (constrained) constraints->validate(model.poi_count());
  if (query.method == Method::kLstm && constrained) {
    fail(Errc::kConstraintUnsupported, "the lstm method does not support constraints");
  }

  const auto scores = relevancy_scores(model, query.s, query.d);
  OccurrenceCounter occ(model.poi_count());
  RecommendationSet out;
  out.query = query;
  for (int round = 0; round < query.k; ++round) {
    const PoiId prominent = pick_prominent(scores, occ, query.s, query.d);
    Itinerary it;
    if (query.method == Method::kLstm) {
      it = generate_itinerary_lstm(model, prominent, query.s, query.d, query.length,
                                   options.l_max, options.endpoint_rule);
    } else {
      SamplerConfig cfg;
      cfg.iterations = options.sampler_iterations;
      cfg.seed = round_seed(query.seed, round);
      cfg.fixed_length = query.length;
      cfg.seed_restarts = options.seed_restarts;
      it = sample_itinerary(model, prominent, query.s, query.d, constraints, cfg);
    }
    occ.add(it.pois);
    out.itineraries.push_back(std::move(it));
  }
  out.occurrences = occ.counts();
  return out;
}

}  // namespace alttrip
