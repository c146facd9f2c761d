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

#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <set>

#include "alttrip/constraints.hpp"
#include "alttrip/error.hpp"
#include "alttrip/sampler.hpp"
#include "toy.hpp"

namespace alttrip {
namespace {

Errc code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return Errc::kInvalidArgument;
}

bool duplicate_free(const std::vector<PoiId>& v) {
  return std::set<PoiId>(v.begin(), v.end()).size() == v.size();
}

Matrix unit_costs(int n) {
  Matrix c(static_cast<std::size_t>(n), static_cast<std::size_t>(n), 1.0);
  for (int i = 0; i < n; ++i) c(i, i) = 0.0;
  return c;
}

// ---- constraints ----

TEST(Constraints, EmptySetIsSatisfied) {
  auto r = check_constraints(std::vector<PoiId>{0, 1, 2}, ConstraintSet{});
  EXPECT_TRUE(r.satisfied);
  EXPECT_TRUE(r.violations.empty());
}

TEST(Constraints, BudgetHandSum) {
  ConstraintSet c;
  c.budget = BudgetConstraint{unit_costs(6), 3.0};
  auto r = check_constraints(std::vector<PoiId>{0, 1, 2, 3, 4}, c);
  EXPECT_FALSE(r.satisfied);
  EXPECT_EQ(r.cost, 4.0);
  ASSERT_EQ(r.violations.size(), 1u);
  EXPECT_EQ(r.violations[0].kind, ViolationKind::kBudget);
  EXPECT_TRUE(check_constraints(std::vector<PoiId>{0, 1, 2, 3}, c).satisfied);
}

TEST(Constraints, MustSee) {
  ConstraintSet c;
  c.must_see = {3};
  EXPECT_TRUE(check_constraints(std::vector<PoiId>{0, 3, 5}, c).satisfied);
  auto r = check_constraints(std::vector<PoiId>{0, 4, 5}, c);
  EXPECT_FALSE(r.satisfied);
  EXPECT_EQ(r.violations.at(0).kind, ViolationKind::kMustSee);
  EXPECT_EQ(r.violations.at(0).poi, 3);
}

TimeConstraint simple_time(int n) {
  TimeConstraint t;
  t.start = 9.0;
  t.open.assign(static_cast<std::size_t>(n), 0.0);
  t.close.assign(static_cast<std::size_t>(n), 24.0);
  t.stay.assign(static_cast<std::size_t>(n), 1.0);
  t.travel = unit_costs(n);
  for (double& v : t.travel.values()) v *= 0.5;
  return t;
}

TEST(Constraints, TimeWaitsForOpening) {
  ConstraintSet c;
  c.time = simple_time(4);
  c.time->open[1] = 12.0;
  // Leave 0 at 10, reach 1 at 10.5, wait to 12, leave 13, reach 2 at 13.5, leave 14.5.
  auto r = check_constraints(std::vector<PoiId>{0, 1, 2}, c);
  EXPECT_TRUE(r.satisfied);
  EXPECT_NEAR(r.elapsed, 5.5, 1e-12);
  c.time->limit = 5.0;
  r = check_constraints(std::vector<PoiId>{0, 1, 2}, c);
  EXPECT_FALSE(r.satisfied);
  EXPECT_EQ(r.violations.at(0).kind, ViolationKind::kTimeLimit);
}

TEST(Constraints, TimeClosingViolation) {
  ConstraintSet c;
  c.time = simple_time(4);
  c.time->close[2] = 11.0;
  auto r = check_constraints(std::vector<PoiId>{0, 1, 2}, c);
  EXPECT_FALSE(r.satisfied);
  EXPECT_EQ(r.violations.at(0).kind, ViolationKind::kOpeningHours);
  EXPECT_EQ(r.violations.at(0).poi, 2);
}

TEST(Constraints, MissingEntry) {
  ConstraintSet c;
  auto cost = unit_costs(4);
  cost(1, 2) = NAN;
  c.budget = BudgetConstraint{cost, 10.0};
  EXPECT_EQ(code_of([&] { check_constraints(std::vector<PoiId>{0, 1, 2}, c); }),
            Errc::kMissingTableEntry);
}

TEST(Constraints, Validation) {
  ConstraintSet c;
  c.budget = BudgetConstraint{unit_costs(4), 0.0};
  EXPECT_EQ(code_of([&] { c.validate(4); }), Errc::kInvalidArgument);
  ConstraintSet m;
  m.must_see = {9};
  EXPECT_EQ(code_of([&] { m.validate(4); }), Errc::kInvalidId);
}

TEST(Constraints, JsonInlineAndReferences) {
  nlohmann::json doc = {
      {"budget", {{"limit", 2.5}, {"cost_matrix", {{0, 1, 1}, {1, 0, 1}, {1, 1, 0}}}}},
      {"must_see", {1}},
      {"time",
       {{"start", 8.0},
        {"limit", 6.0},
        {"windows",
         {{{"poi_id", 0}, {"open", 0}, {"close", 24}, {"stay", 1}},
          {{"poi_id", 1}, {"open", 0}, {"close", 24}, {"stay", 1}},
          {{"poi_id", 2}, {"open", 0}, {"close", 24}, {"stay", 1}}}},
        {"travel_matrix", {{0, 1, 1}, {1, 0, 1}, {1, 1, 0}}}}}};
  auto c = constraints_from_json(doc, 3, nullptr);
  ASSERT_TRUE(c.budget && c.time);
  EXPECT_EQ(c.must_see, (std::vector<PoiId>{1}));
  auto r = check_constraints(std::vector<PoiId>{0, 1, 2}, c);
  EXPECT_TRUE(r.satisfied);
  EXPECT_EQ(r.cost, 2.0);
  EXPECT_NEAR(r.elapsed, 5.0, 1e-12);
  auto j = report_to_json(r);
  EXPECT_TRUE(j.at("satisfied").get<bool>());

  auto dir = testing::temp_dir("cons");
  std::ofstream(dir / "cost.csv") << "poi_id,0,1,2\n0,0,1,1\n1,1,0,1\n2,1,1,0\n";
  std::ofstream(dir / "hours.csv") << "poi_id,open,close,stay\n0,0,24,1\n1,0,24,1\n";
  std::ofstream(dir / "c.json")
      << R"({"budget": {"limit": 5, "cost_matrix_ref": "cost.csv"},
             "time": {"start": 9, "windows_ref": "hours.csv", "travel_matrix_ref": "cost.csv"}})";
  auto loaded = load_constraints(dir / "c.json", 3);
  EXPECT_TRUE(check_constraints(std::vector<PoiId>{0, 1}, loaded).satisfied);
  // POI 2 has no opening hours listed.
  EXPECT_EQ(code_of([&] { check_constraints(std::vector<PoiId>{0, 1, 2}, loaded); }),
            Errc::kMissingTableEntry);

  nlohmann::json ref = {{"budget", {{"limit", 5}, {"cost_matrix_ref", "cost.csv"}}}};
  EXPECT_EQ(code_of([&] { constraints_from_json(ref, 3, nullptr); }), Errc::kInvalidArgument);
  nlohmann::json unknown = {{"budgett", 1}};
  EXPECT_EQ(code_of([&] { constraints_from_json(unknown, 3, nullptr); }), Errc::kInvalidArgument);
}

// ---- moves ----

TEST(Moves, DeleteRemovesOnlyThatPoi) {
  auto m = testing::random_model(8, 1);
  Rng rng(1);
  PoiMask prot(8);
  prot.mask(4);
  std::vector<PoiId> cur{0, 3, 4, 5, 7};
  EXPECT_EQ(apply_move(m, cur, Move::kDelete, 1, rng, prot), (std::vector<PoiId>{0, 4, 5, 7}));
}

TEST(Moves, IllegalMoves) {
  auto m = testing::random_model(8, 1);
  Rng rng(1);
  PoiMask prot(8);
  prot.mask(4);
  std::vector<PoiId> cur{0, 3, 4, 5, 7};
  EXPECT_EQ(code_of([&] { apply_move(m, cur, Move::kDelete, 2, rng, prot); }), Errc::kIllegalMove);
  EXPECT_EQ(code_of([&] { apply_move(m, cur, Move::kReplace, 2, rng, prot); }), Errc::kIllegalMove);
  std::vector<PoiId> three{0, 3, 7};
  EXPECT_EQ(code_of([&] { apply_move(m, three, Move::kDelete, 1, rng, prot); }), Errc::kIllegalMove);
  EXPECT_EQ(code_of([&] { apply_move(m, three, Move::kSwapReplace, 1, rng, prot); }),
            Errc::kIllegalMove);
  EXPECT_EQ(code_of([&] { apply_move(m, cur, Move::kReplace, 0, rng, prot); }), Errc::kBadPosition);
  EXPECT_EQ(code_of([&] { apply_move(m, cur, Move::kReplace, 4, rng, prot); }), Errc::kBadPosition);
}

TEST(Moves, SwapWithProtectedPartner) {
  auto m = testing::random_model(8, 2);
  PoiMask prot(8);
  prot.mask(4);
  std::vector<PoiId> cur{0, 3, 4, 7};
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Rng rng(seed);
    // The protected POI lands at t and is kept as is.
    EXPECT_EQ(apply_move(m, cur, Move::kSwapReplace, 1, rng, prot),
              (std::vector<PoiId>{0, 4, 3, 7}));
  }
}

TEST(Moves, SwapThenReplaceUnprotected) {
  auto m = testing::random_model(8, 2);
  PoiMask prot(8);
  prot.mask(3);
  std::vector<PoiId> cur{0, 3, 4, 7};
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Rng rng(seed);
    // t = 2 holds 4; after the swap 3 sits at 2 and is protected, 4 moves to 1.
    auto out = apply_move(m, cur, Move::kSwapReplace, 2, rng, prot);
    EXPECT_EQ(out, (std::vector<PoiId>{0, 4, 3, 7}));
    Rng rng2(seed);
    auto other = apply_move(m, cur, Move::kSwapReplace, 1, rng2, PoiMask(8));
    EXPECT_EQ(other.size(), 4u);
    EXPECT_EQ(other[2], 3);
    EXPECT_TRUE(duplicate_free(other));
  }
}

TEST(Moves, InsertAndReplaceNeverDuplicate) {
  auto m = testing::random_model(9, 3);
  PoiMask none(9);
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    Rng rng(seed);
    auto cur = testing::random_sequence(9, 3 + static_cast<int>(seed % 5), seed);
    const int t = rng.between(1, static_cast<int>(cur.size()) - 2);
    auto ins = apply_move(m, cur, Move::kInsert, t, rng, none);
    EXPECT_EQ(ins.size(), cur.size() + 1);
    EXPECT_TRUE(duplicate_free(ins));
    EXPECT_EQ(ins.front(), cur.front());
    EXPECT_EQ(ins.back(), cur.back());
    auto rep = apply_move(m, cur, Move::kReplace, t, rng, none);
    EXPECT_EQ(rep.size(), cur.size());
    EXPECT_TRUE(duplicate_free(rep));
  }
}

TEST(SlotDistribution, InsertionUsesPostInsertionLength) {
  auto m = testing::random_model(9, 4);
  std::vector<PoiId> it{0, 2, 5, 8};
  PoiMask mask(9);
  for (PoiId p : it) mask.mask(p);
  auto pc = slot_distribution(m, it, 2, true, mask);
  std::vector<PoiId> prefix{0, 2}, suffix{8, 5};
  auto pf = forward_step_probs(m, prefix, 0, 8, mask);
  auto pb = backward_step_probs(m, suffix, 0, 8, mask);
  auto expect = combined_step_probs(pf, pb, 2, 5);
  for (int i = 0; i < 9; ++i) EXPECT_NEAR(pc.probs[i], expect.probs[i], 1e-15);
}

// ---- seed and sampler ----

TEST(Seed, FreeLengthIsThreePois) {
  auto m = testing::random_model(8, 2);
  Rng rng(1);
  auto s = seed_itinerary(m, 4, 0, 7, nullptr, std::nullopt, rng);
  EXPECT_EQ(s.pois, (std::vector<PoiId>{0, 4, 7}));
}

TEST(Seed, MustSeeAndFixedLength) {
  auto m = testing::random_model(10, 2);
  ConstraintSet c;
  c.must_see = {6};
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed);
    auto s = seed_itinerary(m, 4, 0, 9, &c, 5, rng);
    EXPECT_EQ(s.pois.size(), 5u);
    EXPECT_TRUE(duplicate_free(s.pois));
    for (PoiId p : {0, 4, 6, 9}) EXPECT_NE(std::find(s.pois.begin(), s.pois.end(), p), s.pois.end());
  }
}

TEST(Seed, BudgetBelowDirectLegIsInfeasible) {
  auto m = testing::random_model(6, 2);
  auto cat = testing::toy_catalog(6, 2);
  ConstraintSet c;
  BudgetConstraint b{poi_distances_km(cat), 0.0};
  b.limit = 0.5 * b.cost(0, 5);
  c.budget = b;
  Rng rng(1);
  EXPECT_EQ(code_of([&] { seed_itinerary(m, 2, 0, 5, &c, std::nullopt, rng, 20); }),
            Errc::kInfeasibleConstraints);
  SamplerConfig cfg;
  cfg.seed_restarts = 20;
  EXPECT_EQ(code_of([&] { sample_itinerary(m, 2, 0, 5, &c, cfg); }), Errc::kInfeasibleConstraints);
}

TEST(Sampler, IterationBudget) {
  const auto& mem = testing::memorized();
  SamplerConfig cfg;
  cfg.fixed_length = 7;
  EXPECT_EQ(sampler_iterations(cfg, mem.model), 25);
  cfg.fixed_length.reset();
  EXPECT_EQ(sampler_iterations(cfg, mem.model), 15);
  cfg.iterations = 3;
  EXPECT_EQ(sampler_iterations(cfg, mem.model), 3);
}

TEST(Sampler, EveryCandidateInfeasibleReturnsSeed) {
  auto m = testing::random_model(7, 5);
  Matrix cost(7, 7, 100.0);
  cost(0, 3) = cost(3, 6) = 1.0;
  ConstraintSet c;
  c.budget = BudgetConstraint{cost, 2.0};
  SamplerConfig cfg;
  cfg.iterations = 30;
  SamplerTrace trace;
  auto it = sample_itinerary(m, 3, 0, 6, &c, cfg, &trace);
  EXPECT_EQ(it.pois, (std::vector<PoiId>{0, 3, 6}));
  for (const auto& mv : trace.moves) EXPECT_FALSE(mv.accepted);
}

void check_trace(const SamplerTrace& trace, std::optional<int> length, PoiId prominent,
                 const std::vector<PoiId>& must_see) {
  double best = trace.seed_perplexity;
  int stall = 0;
  double current = trace.seed_perplexity;
  for (const auto& mv : trace.moves) {
    EXPECT_EQ(mv.stall_before, stall);
    EXPECT_EQ(mv.current_perplexity, current);
    EXPECT_LE(mv.best_perplexity, best);
    best = mv.best_perplexity;
    EXPECT_TRUE(duplicate_free(mv.candidate));
    if (length) EXPECT_EQ(static_cast<int>(mv.candidate.size()), *length);
    EXPECT_NE(std::find(mv.candidate.begin(), mv.candidate.end(), prominent), mv.candidate.end());
    for (PoiId p : must_see)
      EXPECT_NE(std::find(mv.candidate.begin(), mv.candidate.end(), p), mv.candidate.end());
    if (mv.accepted) {
      EXPECT_TRUE(mv.feasible);
      EXPECT_TRUE(mv.perplexity < current || mv.stall_before >= 2);
      current = mv.perplexity;
      stall = 0;
    } else {
      if (!mv.noop && mv.feasible) {
        EXPECT_GE(mv.perplexity, current);
        EXPECT_LT(mv.stall_before, 2);
      }
      ++stall;
    }
  }
}

TEST(Sampler, TracePropertiesFreeAndFixed) {
  const auto& m = testing::small_trained_model();
  ConstraintSet c;
  c.must_see = {9};
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    SamplerConfig cfg;
    cfg.seed = seed;
    cfg.iterations = 40;
    SamplerTrace trace;
    sample_itinerary(m, 5, 0, 15, &c, cfg, &trace);
    EXPECT_EQ(trace.moves.size(), 40u);
    check_trace(trace, std::nullopt, 5, c.must_see);
    cfg.fixed_length = 6;
    sample_itinerary(m, 5, 0, 15, &c, cfg, &trace);
    check_trace(trace, 6, 5, c.must_see);
  }
}

TEST(Sampler, DeterministicGivenSeed) {
  const auto& m = testing::small_trained_model();
  SamplerConfig cfg;
  cfg.seed = 31;
  cfg.fixed_length = 6;
  auto a = sample_itinerary(m, 4, 1, 2, nullptr, cfg);
  auto b = sample_itinerary(m, 4, 1, 2, nullptr, cfg);
  EXPECT_EQ(a.pois, b.pois);
  EXPECT_EQ(a.perplexity, b.perplexity);
}

TEST(Sampler, BadWeights) {
  const auto& m = testing::small_trained_model();
  SamplerConfig cfg;
  cfg.move_weights = {0, 0, 0, 0};
  EXPECT_EQ(code_of([&] { sample_itinerary(m, 4, 1, 2, nullptr, cfg); }), Errc::kInvalidArgument);
  cfg.move_weights = {1, -1, 1, 1};
  EXPECT_EQ(code_of([&] { sample_itinerary(m, 4, 1, 2, nullptr, cfg); }), Errc::kInvalidArgument);
}

TEST(Sampler, MemorisedRouteUsuallyFound) {
  const auto& mem = testing::memorized();
  int hits = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    SamplerConfig cfg;
    cfg.seed = seed;
    cfg.fixed_length = 5;
    hits += sample_itinerary(mem.model, 6, 2, 1, nullptr, cfg).pois == mem.route;
  }
  EXPECT_GE(hits, 14);
}

}  // namespace
}  // namespace alttrip
