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

#include "alttrip/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "alttrip/error.hpp"
#include "alttrip/hash.hpp"
#include "alttrip/rng.hpp"
#include "json.hpp"

namespace alttrip {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

template <typename T>
T parse_number(const std::string& field, const std::string& where) {
  const std::string t = trim(field);
  T value{};
  const auto* first = t.data();
  const auto* last = t.data() + t.size();
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (t.empty() || ec != std::errc() || ptr != last) {
    fail(Errc::kParseError, where + ": cannot parse '" + field + "' as a number");
  }
  return value;
}

std::ifstream open_input(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) fail(Errc::kIoError, "cannot open " + file.string());
  return in;
}

std::ofstream open_output(const std::filesystem::path& file) {
  std::ofstream out(file);
  if (!out) fail(Errc::kIoError, "cannot write " + file.string());
  return out;
}

// Returns data rows (header skipped and checked against `expected`).
std::vector<std::vector<std::string>> read_csv(const std::filesystem::path& file,
                                               const std::vector<std::string>& expected) {
  auto in = open_input(file);
  std::string line;
  if (!std::getline(in, line)) fail(Errc::kParseError, file.string() + ": missing header");
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
  auto header = split_csv_line(line);
  for (auto& h : header) h = trim(h);
  if (header != expected) {
    std::string want;
    for (const auto& e : expected) want += (want.empty() ? "" : ",") + e;
    fail(Errc::kParseError, file.string() + ": expected header '" + want + "'");
  }
  std::vector<std::vector<std::string>> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto fields = split_csv_line(line);
    if (fields.size() != expected.size()) {
      fail(Errc::kParseError, file.string() + ":" + std::to_string(line_no) + ": expected " +
                                  std::to_string(expected.size()) + " fields");
    }
    rows.push_back(std::move(fields));
  }
  return rows;
}

std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string current;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          current += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        current += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(current));
      current.clear();
    } else if (c != '\r') {
      current += c;
    }
  }
  fields.push_back(std::move(current));
  return fields;
}

PoiCatalog::PoiCatalog(std::vector<Poi> pois) : pois_(std::move(pois)) {
  if (pois_.empty()) fail(Errc::kEmptyCatalog, "catalog has no POIs");
  std::sort(pois_.begin(), pois_.end(), [](const Poi& a, const Poi& b) { return a.id < b.id; });
  for (std::size_t i = 0; i < pois_.size(); ++i) {
    const Poi& p = pois_[i];
    if (i > 0 && pois_[i - 1].id == p.id) {
      fail(Errc::kDuplicateId, "duplicate POI id " + std::to_string(p.id));
    }
  }
  for (std::size_t i = 0; i < pois_.size(); ++i) {
    const Poi& p = pois_[i];
    if (p.id != static_cast<PoiId>(i)) {
      fail(Errc::kParseError, "POI ids must be contiguous from 0; missing id " + std::to_string(i));
    }
    if (!(p.lat >= -90.0 && p.lat <= 90.0) || !(p.lon >= -180.0 && p.lon <= 180.0)) {
      fail(Errc::kParseError, "POI " + std::to_string(p.id) + " has out-of-range coordinates");
    }
    if (p.category.empty()) {
      fail(Errc::kParseError, "POI " + std::to_string(p.id) + " has an empty category");
    }
  }
}

std::uint64_t PoiCatalog::fingerprint() const {
  Fnv1a h;
  for (const auto& p : pois_) {
    h.update(static_cast<std::int64_t>(p.id));
    h.update(p.lat);
    h.update(p.lon);
    h.update(p.category);
  }
  return h.digest();
}

std::vector<int> FoldAssignment::fold_sizes() const {
  std::vector<int> sizes(static_cast<std::size_t>(n_folds), 0);
  for (int f : fold_of_route) ++sizes[static_cast<std::size_t>(f)];
  return sizes;
}

std::vector<std::size_t> FoldAssignment::routes_in_fold(int fold) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < fold_of_route.size(); ++i) {
    if (fold_of_route[i] == fold) out.push_back(i);
  }
  return out;
}

std::vector<std::size_t> FoldAssignment::routes_outside_fold(int fold) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < fold_of_route.size(); ++i) {
    if (fold_of_route[i] != fold) out.push_back(i);
  }
  return out;
}

const std::vector<Route>* GroundTruthIndex::find(PoiId s, PoiId d) const {
  const auto it = by_endpoints.find({s, d});
  return it == by_endpoints.end() ? nullptr : &it->second;
}

PoiCatalog load_catalog(const std::filesystem::path& poi_file) {
  const auto rows = read_csv(poi_file, {"poi_id", "lat", "lon", "category"});
  std::vector<Poi> pois;
  pois.reserve(rows.size());
  for (const auto& r : rows) {
    const std::string where = poi_file.string();
    pois.push_back(Poi{parse_number<int>(r[0], where), parse_number<double>(r[1], where),
                       parse_number<double>(r[2], where), trim(r[3])});
  }
  return PoiCatalog(std::move(pois));
}

void save_catalog(const PoiCatalog& catalog, const std::filesystem::path& poi_file) {
  auto out = open_output(poi_file);
  out << "poi_id,lat,lon,category\n";
  out.precision(17);
  for (const auto& p : catalog.pois()) {
    out << p.id << ',' << p.lat << ',' << p.lon << ',' << csv_escape(p.category) << '\n';
  }
}

std::vector<Visit> load_visits(const std::filesystem::path& visits_file) {
  const auto rows = read_csv(visits_file, {"user_id", "poi_id", "ts"});
  std::vector<Visit> visits;
  visits.reserve(rows.size());
  for (const auto& r : rows) {
    const std::string where = visits_file.string();
    visits.push_back(
        Visit{trim(r[0]), parse_number<int>(r[1], where), parse_number<std::int64_t>(r[2], where)});
  }
  return visits;
}

std::vector<Route> build_routes(std::vector<Visit> visits, const PoiCatalog& catalog,
                                double gap_hours) {
  for (const auto& v : visits) {
    if (!catalog.contains(v.poi)) {
      fail(Errc::kUnknownPoi, "visit by user '" + v.user + "' references unknown POI " +
                                  std::to_string(v.poi));
    }
  }
  // Stable sort keeps file order for visits sharing a timestamp.
  std::stable_sort(visits.begin(), visits.end(), [](const Visit& a, const Visit& b) {
    if (a.user != b.user) return a.user < b.user;
    return a.ts < b.ts;
  });

  const double gap_seconds = gap_hours * 3600.0;
  std::vector<Route> routes;
  Route current;
  std::set<PoiId> seen;
  auto flush = [&] {
    if (current.size() >= 3) routes.push_back(current);
    current.clear();
    seen.clear();
  };

  for (std::size_t i = 0; i < visits.size(); ++i) {
    const Visit& v = visits[i];
    const bool new_user = i == 0 || visits[i - 1].user != v.user;
    const bool gap = !new_user && static_cast<double>(v.ts - visits[i - 1].ts) > gap_seconds;
    if (new_user || gap) flush();
    if (seen.insert(v.poi).second) current.push_back(v.poi);
  }
  flush();
  return routes;
}

FoldAssignment split_folds(const std::vector<Route>& routes, int n_folds, std::uint64_t seed) {
  if (n_folds < 1) fail(Errc::kInvalidArgument, "n_folds must be positive");
  if (routes.size() < static_cast<std::size_t>(n_folds)) {
    fail(Errc::kTooFewRoutes, std::to_string(routes.size()) + " routes cannot fill " +
                                  std::to_string(n_folds) + " folds");
  }
  std::vector<std::size_t> order(routes.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  rng.shuffle(order);

  FoldAssignment folds;
  folds.seed = seed;
  folds.n_folds = n_folds;
  folds.fold_of_route.assign(routes.size(), 0);
  for (std::size_t pos = 0; pos < order.size(); ++pos) {
    folds.fold_of_route[order[pos]] = static_cast<int>(pos % static_cast<std::size_t>(n_folds));
  }
  return folds;
}

GroundTruthIndex ground_truth_index(const std::vector<Route>& routes) {
  GroundTruthIndex index;
  for (const auto& r : routes) {
    if (r.empty()) continue;
    index.by_endpoints[{r.front(), r.back()}].push_back(r);
  }
  return index;
}

void save_routes(const std::vector<Route>& routes, const std::filesystem::path& file) {
  auto out = open_output(file);
  out << "route_id,pois\n";
  for (std::size_t i = 0; i < routes.size(); ++i) {
    out << i << ',';
    for (std::size_t j = 0; j < routes[i].size(); ++j) {
      out << (j ? ";" : "") << routes[i][j];
    }
    out << '\n';
  }
}

std::vector<Route> load_routes(const std::filesystem::path& file, const PoiCatalog& catalog) {
  const auto rows = read_csv(file, {"route_id", "pois"});
  std::vector<Route> routes;
  routes.reserve(rows.size());
  for (const auto& r : rows) {
    Route route;
    std::stringstream ss(r[1]);
    std::string tok;
    while (std::getline(ss, tok, ';')) {
      const int id = parse_number<int>(tok, file.string());
      if (!catalog.contains(id)) {
        fail(Errc::kUnknownPoi, file.string() + ": unknown POI " + std::to_string(id));
      }
      route.push_back(id);
    }
    routes.push_back(std::move(route));
  }
  return routes;
}

void save_folds(const FoldAssignment& folds, const std::filesystem::path& file) {
  nlohmann::json j;
  j["seed"] = folds.seed;
  j["n_folds"] = folds.n_folds;
  j["assignment"] = folds.fold_of_route;
  auto out = open_output(file);
  out << j.dump() << '\n';
}

FoldAssignment load_folds(const std::filesystem::path& file) {
  auto in = open_input(file);
  FoldAssignment folds;
  try {
    const auto j = nlohmann::json::parse(in);
    folds.seed = j.at("seed").get<std::uint64_t>();
    folds.n_folds = j.value("n_folds", 5);
    folds.fold_of_route = j.at("assignment").get<std::vector<int>>();
  } catch (const nlohmann::json::exception& e) {
    fail(Errc::kParseError, file.string() + ": " + e.what());
  }
  for (int f : folds.fold_of_route) {
    if (f < 0 || f >= folds.n_folds) fail(Errc::kParseError, file.string() + ": fold id out of range");
  }
  return folds;
}

std::uint64_t routes_fingerprint(const std::vector<Route>& routes) {
  Fnv1a h;
  for (const auto& r : routes) {
    h.update(static_cast<std::int64_t>(r.size()));
    for (PoiId p : r) h.update(static_cast<std::int64_t>(p));
  }
  return h.digest();
}

}  // namespace alttrip
