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

#include "alttrip/metrics.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "alttrip/error.hpp"
#include "alttrip/hash.hpp"

namespace alttrip {
namespace {

std::set<PoiId> poi_set(std::span<const PoiId> seq, bool include_endpoints) {
  if (include_endpoints) return {seq.begin(), seq.end()};
  if (seq.size() <= 2) return {};
  return {seq.begin() + 1, seq.end() - 1};
}

double harmonic(double precision, double recall) {
  if (precision + recall <= 0.0) return 0.0;
  return 2.0 * precision * recall / (precision + recall);
}

double mean(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  double total = 0.0;
  for (double x : v) total += x;
  return total / static_cast<double>(v.size());
}

std::string join_itineraries(const std::vector<std::vector<PoiId>>& its) {
  std::string out;
  for (std::size_t i = 0; i < its.size(); ++i) {
    if (i) out += '|';
    for (std::size_t j = 0; j < its[i].size(); ++j) {
      if (j) out += ';';
      out += std::to_string(its[i][j]);
    }
  }
  return out;
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

std::string alpha_label(double a) {
  std::ostringstream os;
  os << a;
  return os.str();
}

}  // namespace

double f1_score(std::span<const PoiId> route, std::span<const PoiId> itinerary,
                bool include_endpoints) {
  const auto r = poi_set(route, include_endpoints);
  const auto i = poi_set(itinerary, include_endpoints);
  std::size_t common = 0;
  for (PoiId p : i) common += r.count(p);
  if (common == 0) return 0.0;
  return harmonic(static_cast<double>(common) / static_cast<double>(i.size()),
                  static_cast<double>(common) / static_cast<double>(r.size()));
}

double pairs_f1_score(std::span<const PoiId> route, std::span<const PoiId> itinerary) {
  if (route.size() < 2 || itinerary.size() < 2) {
    fail(Errc::kInvalidArgument, "pairs-F1 needs sequences of at least two POIs");
  }
  std::map<PoiId, std::size_t> pos;
  for (std::size_t i = 0; i < route.size(); ++i) pos.emplace(route[i], i);
  std::size_t common = 0;
  for (std::size_t a = 0; a < itinerary.size(); ++a) {
    const auto pa = pos.find(itinerary[a]);
    if (pa == pos.end()) continue;
    for (std::size_t b = a + 1; b < itinerary.size(); ++b) {
      const auto pb = pos.find(itinerary[b]);
      if (pb != pos.end() && pa->second < pb->second) ++common;
    }
  }
  if (common == 0) return 0.0;
  auto pairs = [](std::size_t n) { return static_cast<double>(n * (n - 1) / 2); };
  return harmonic(static_cast<double>(common) / pairs(itinerary.size()),
                  static_cast<double>(common) / pairs(route.size()));
}

double popularity_score(const std::vector<std::vector<PoiId>>& recommended,
                        const std::vector<Route>& ground_truth, PopularityMetric metric) {
  if (ground_truth.empty()) fail(Errc::kEmptyGroundTruth, "no ground-truth routes");
  if (recommended.empty()) fail(Errc::kInvalidArgument, "no recommended itineraries");
  double total = 0.0;
  for (const auto& rec : recommended) {
    for (const auto& gt : ground_truth) {
      total += metric == PopularityMetric::kF1 ? f1_score(gt, rec, true) : pairs_f1_score(gt, rec);
    }
  }
  return total / static_cast<double>(recommended.size() * ground_truth.size());
}

double diversity_score(const std::vector<std::vector<PoiId>>& recommended) {
  const std::size_t k = recommended.size();
  if (k < 2) fail(Errc::kSingletonSet, "diversity needs at least two itineraries");
  double total = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      if (i != j) total += 1.0 - f1_score(recommended[i], recommended[j], false);
    }
  }
  return total / static_cast<double>(k * (k - 1));
}

double combined_score(double popularity, double diversity, double alpha) {
  return alpha * popularity + (1.0 - alpha) * diversity;
}

bool alpha_in_evaluated_range(double alpha) {
  return alpha >= 0.1 - 1e-12 && alpha <= 0.9 + 1e-12;
}

std::vector<double> parse_alpha_grid(const std::string& text) {
  auto number = [&](const std::string& s) {
    try {
      std::size_t used = 0;
      const double v = std::stod(s, &used);
      if (used != s.size()) throw std::invalid_argument(s);
      return v;
    } catch (const std::exception&) {
      fail(Errc::kInvalidArgument, "bad alpha value '" + s + "' in '" + text + "'");
    }
  };
  std::vector<double> out;
  if (text.find(':') != std::string::npos) {
    std::vector<std::string> parts;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ':')) parts.push_back(item);
    if (parts.size() != 3) fail(Errc::kInvalidArgument, "alpha range must be start:stop:step");
    const double start = number(parts[0]);
    const double stop = number(parts[1]);
    const double step = number(parts[2]);
    if (!(step > 0.0) || stop < start) fail(Errc::kInvalidArgument, "empty alpha range " + text);
    const auto count = static_cast<int>(std::floor((stop - start) / step + 1e-9));
    for (int i = 0; i <= count; ++i) {
      out.push_back(std::round((start + step * i) * 1e12) / 1e12);
    }
  } else {
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(number(item));
  }
  if (out.empty()) fail(Errc::kInvalidArgument, "no alpha values in '" + text + "'");
  return out;
}

std::uint64_t EvaluationConfig::fingerprint() const {
  Fnv1a h;
  h.update(static_cast<std::int64_t>(k));
  h.update(static_cast<std::int64_t>(length.value_or(0)));
  h.update(static_cast<std::int64_t>(method));
  for (double a : alphas) h.update(a);
  h.update(static_cast<std::int64_t>(seed));
  h.update(static_cast<std::int64_t>(planner.l_max));
  h.update(static_cast<std::int64_t>(planner.sampler_iterations));
  h.update(static_cast<std::int64_t>(planner.seed_restarts));
  h.update(static_cast<std::int64_t>(planner.endpoint_rule));
  for (int f : folds) h.update(static_cast<std::int64_t>(f));
  return h.digest();
}

EvaluationReport evaluate_folds(const ModelFactory& factory, const std::vector<Route>& routes,
                                const FoldAssignment& folds, const EvaluationConfig& config) {
  if (folds.fold_of_route.size() != routes.size()) {
    fail(Errc::kShapeMismatch, "fold assignment does not match the routes");
  }
  if (config.k < 1) fail(Errc::kInvalidArgument, "k must be >= 1");
  if (config.alphas.empty()) fail(Errc::kInvalidArgument, "alpha grid is empty");
  const auto truth = ground_truth_index(routes);

  std::vector<int> fold_ids = config.folds;
  if (fold_ids.empty()) {
    for (int f = 0; f < folds.n_folds; ++f) fold_ids.push_back(f);
  }

  EvaluationReport report;
  report.config = config;
  const std::size_t n_alpha = config.alphas.size();
  for (int fold : fold_ids) {
    if (fold < 0 || fold >= folds.n_folds) fail(Errc::kInvalidArgument, "fold out of range");
    std::vector<Route> train;
    for (auto i : folds.routes_outside_fold(fold)) train.push_back(routes[i]);
    std::set<Endpoints> pairs;
    for (auto i : folds.routes_in_fold(fold)) pairs.emplace(routes[i].front(), routes[i].back());
    const ItrNetModel model = factory(fold, train);

    std::vector<QueryRecord> records(pairs.size());
    const std::vector<Endpoints> queue(pairs.begin(), pairs.end());
    const auto count = static_cast<std::int64_t>(queue.size());
#pragma omp parallel for schedule(dynamic, 1)
    for (std::int64_t qi = 0; qi < count; ++qi) {
      QueryRecord& rec = records[static_cast<std::size_t>(qi)];
      const auto [s, d] = queue[static_cast<std::size_t>(qi)];
      rec.fold = fold;
      rec.s = s;
      rec.d = d;
      const auto* gt = truth.find(s, d);
      rec.ground_truth_routes = gt ? static_cast<int>(gt->size()) : 0;
      try {
        Query q;
        q.s = s;
        q.d = d;
        q.k = config.k;
        q.length = config.length;
        q.method = config.method;
        Fnv1a h;
        h.update(static_cast<std::int64_t>(config.seed));
        h.update(static_cast<std::int64_t>(fold));
        h.update(static_cast<std::int64_t>(s));
        h.update(static_cast<std::int64_t>(d));
        q.seed = h.digest();
        const auto start = std::chrono::steady_clock::now();
        const auto set = recommend_topk(model, q, nullptr, config.planner);
        rec.seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        for (const auto& it : set.itineraries) rec.itineraries.push_back(it.pois);
        rec.f1 = popularity_score(rec.itineraries, *gt, PopularityMetric::kF1);
        rec.pairs_f1 = popularity_score(rec.itineraries, *gt, PopularityMetric::kPairsF1);
        if (config.k >= 2) {
          rec.diversity = diversity_score(rec.itineraries);
          for (double a : config.alphas) {
            rec.combined_f1.push_back(combined_score(rec.f1, *rec.diversity, a));
            rec.combined_pairs_f1.push_back(combined_score(rec.pairs_f1, *rec.diversity, a));
          }
        }
      } catch (const std::exception& e) {
        rec.error = e.what();
      }
    }

    FoldSummary summary;
    summary.fold = fold;
    summary.train_routes = static_cast<int>(train.size());
    summary.queries = static_cast<int>(records.size());
    std::vector<double> f1, pf1, div, secs;
    std::vector<std::vector<double>> cf(n_alpha), cp(n_alpha);
    for (const auto& rec : records) {
      if (!rec.error.empty()) {
        ++summary.failed;
        continue;
      }
      f1.push_back(rec.f1);
      pf1.push_back(rec.pairs_f1);
      secs.push_back(rec.seconds);
      if (rec.diversity) {
        div.push_back(*rec.diversity);
        for (std::size_t a = 0; a < n_alpha; ++a) {
          cf[a].push_back(rec.combined_f1[a]);
          cp[a].push_back(rec.combined_pairs_f1[a]);
        }
      }
    }
    summary.f1 = mean(f1);
    summary.pairs_f1 = mean(pf1);
    summary.mean_seconds = mean(secs);
    if (!div.empty()) {
      summary.diversity = mean(div);
      for (std::size_t a = 0; a < n_alpha; ++a) {
        summary.combined_f1.push_back(mean(cf[a]));
        summary.combined_pairs_f1.push_back(mean(cp[a]));
      }
    }
    report.folds.push_back(std::move(summary));
    report.records.insert(report.records.end(), std::make_move_iterator(records.begin()),
                          std::make_move_iterator(records.end()));
  }

  std::vector<double> f1, pf1, div, secs;
  std::vector<std::vector<double>> cf(n_alpha), cp(n_alpha);
  for (const auto& f : report.folds) {
    if (f.queries == f.failed) continue;
    f1.push_back(f.f1);
    pf1.push_back(f.pairs_f1);
    secs.push_back(f.mean_seconds);
    if (f.diversity) {
      div.push_back(*f.diversity);
      for (std::size_t a = 0; a < n_alpha; ++a) {
        cf[a].push_back(f.combined_f1[a]);
        cp[a].push_back(f.combined_pairs_f1[a]);
      }
    }
  }
  report.f1 = mean(f1);
  report.pairs_f1 = mean(pf1);
  report.mean_seconds = mean(secs);
  if (!div.empty()) {
    report.diversity = mean(div);
    for (std::size_t a = 0; a < n_alpha; ++a) {
      report.combined_f1.push_back(mean(cf[a]));
      report.combined_pairs_f1.push_back(mean(cp[a]));
    }
  }
  return report;
}

void write_report_csv(const EvaluationReport& report, const std::filesystem::path& file) {
  std::ofstream out(file);
  if (!out) fail(Errc::kIoError, "cannot write " + file.string());
  const auto& cfg = report.config;
  out << "fold,s,d,k,L,method,ground_truth_routes,f1,pairs_f1,diversity";
  for (double a : cfg.alphas) out << ",combined_f1@" << alpha_label(a);
  for (double a : cfg.alphas) out << ",combined_pairs_f1@" << alpha_label(a);
  out << ",seconds,itineraries,error\n";
  for (const auto& r : report.records) {
    out << r.fold << ',' << r.s << ',' << r.d << ',' << cfg.k << ','
        << (cfg.length ? std::to_string(*cfg.length) : "") << ',' << method_name(cfg.method)
        << ',' << r.ground_truth_routes << ',';
    if (r.error.empty()) {
      out << fmt(r.f1) << ',' << fmt(r.pairs_f1) << ',' << (r.diversity ? fmt(*r.diversity) : "");
      for (std::size_t a = 0; a < cfg.alphas.size(); ++a) {
        out << ',' << (r.combined_f1.empty() ? "" : fmt(r.combined_f1[a]));
      }
      for (std::size_t a = 0; a < cfg.alphas.size(); ++a) {
        out << ',' << (r.combined_pairs_f1.empty() ? "" : fmt(r.combined_pairs_f1[a]));
      }
      out << ',' << fmt(r.seconds) << ',' << join_itineraries(r.itineraries) << ",\n";
    } else {
      out << ",,";
      for (std::size_t a = 0; a < 2 * cfg.alphas.size(); ++a) out << ',';
      std::string msg = r.error;
      std::replace(msg.begin(), msg.end(), '"', '\'');
      out << ",,,\"" << msg << "\"\n";
    }
  }
}

nlohmann::json report_summary_json(const EvaluationReport& report) {
  using nlohmann::json;
  const auto& cfg = report.config;
  auto optional = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
  auto per_alpha = [&](const std::vector<double>& v) {
    json out = json::object();
    for (std::size_t a = 0; a < v.size(); ++a) out[alpha_label(cfg.alphas[a])] = v[a];
    return out;
  };
  json folds = json::array();
  for (const auto& f : report.folds) {
    folds.push_back({{"fold", f.fold},
                     {"train_routes", f.train_routes},
                     {"queries", f.queries},
                     {"failed", f.failed},
                     {"f1", f.f1},
                     {"pairs_f1", f.pairs_f1},
                     {"diversity", optional(f.diversity)},
                     {"combined_f1", per_alpha(f.combined_f1)},
                     {"combined_pairs_f1", per_alpha(f.combined_pairs_f1)},
                     {"mean_seconds", f.mean_seconds}});
  }
  return json{{"config",
               {{"k", cfg.k},
                {"L", cfg.length ? json(*cfg.length) : json(nullptr)},
                {"method", method_name(cfg.method)},
                {"alphas", cfg.alphas},
                {"seed", cfg.seed},
                {"l_max", cfg.planner.l_max},
                {"sampler_iterations", cfg.planner.sampler_iterations},
                {"endpoint_rule", cfg.planner.endpoint_rule == EndpointRule::kFirstPassage
                                      ? "first_passage"
                                      : "conditional"},
                {"config_hash", hex_digest(cfg.fingerprint())}}},
              {"folds", std::move(folds)},
              {"mean",
               {{"f1", report.f1},
                {"pairs_f1", report.pairs_f1},
                {"diversity", optional(report.diversity)},
                {"combined_f1", per_alpha(report.combined_f1)},
                {"combined_pairs_f1", per_alpha(report.combined_pairs_f1)},
                {"seconds_per_query", report.mean_seconds}}}};
}

void write_report_json(const EvaluationReport& report, const std::filesystem::path& file) {
  std::ofstream out(file);
  if (!out) fail(Errc::kIoError, "cannot write " + file.string());
  out << report_summary_json(report).dump(2) << '\n';
}

}  // namespace alttrip
