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

#include "alttrip/constraints.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "alttrip/error.hpp"

namespace alttrip {
namespace {

using nlohmann::json;

constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

std::string strip(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  return s.substr(b, s.find_last_not_of(" \t\r\n") - b + 1);
}

template <typename T>
T to_number(const std::string& text, const std::string& where) {
  const std::string t = strip(text);
  T v{};
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size()) {
    fail(Errc::kParseError, where + ": cannot parse '" + text + "'");
  }
  return v;
}

std::vector<std::vector<std::string>> read_rows(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) fail(Errc::kIoError, "cannot open " + file.string());
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (strip(line).empty()) continue;
    rows.push_back(split_csv_line(line));
  }
  if (rows.empty()) fail(Errc::kParseError, file.string() + ": empty file");
  return rows;
}

PoiId checked_id(long long id, int n, const std::string& where) {
  if (id < 0 || id >= n) fail(Errc::kInvalidId, where + ": POI id " + std::to_string(id));
  return static_cast<PoiId>(id);
}

Matrix matrix_from_csv(const std::filesystem::path& file, int n) {
  const auto rows = read_rows(file);
  const auto& header = rows.front();
  if (header.empty() || strip(header[0]) != "poi_id") {
    fail(Errc::kParseError, file.string() + ": header must start with poi_id");
  }
  std::vector<PoiId> cols;
  for (std::size_t c = 1; c < header.size(); ++c) {
    cols.push_back(checked_id(to_number<long long>(header[c], file.string()), n, file.string()));
  }
  Matrix m(static_cast<std::size_t>(n), static_cast<std::size_t>(n), kMissing);
  for (std::size_t r = 1; r < rows.size(); ++r) {
    if (rows[r].size() != header.size()) {
      fail(Errc::kParseError, file.string() + ": row " + std::to_string(r + 1) + " has " +
                                  std::to_string(rows[r].size()) + " fields");
    }
    const PoiId from =
        checked_id(to_number<long long>(rows[r][0], file.string()), n, file.string());
    for (std::size_t c = 0; c < cols.size(); ++c) {
      m(static_cast<std::size_t>(from), static_cast<std::size_t>(cols[c])) =
          to_number<double>(rows[r][c + 1], file.string());
    }
  }
  return m;
}

Matrix matrix_from_json(const json& doc, int n, const std::string& what) {
  if (!doc.is_array() || doc.size() != static_cast<std::size_t>(n)) {
    fail(Errc::kInvalidArgument, what + " must be an " + std::to_string(n) + " x " +
                                     std::to_string(n) + " array");
  }
  Matrix m(static_cast<std::size_t>(n), static_cast<std::size_t>(n), kMissing);
  for (std::size_t r = 0; r < doc.size(); ++r) {
    if (!doc[r].is_array() || doc[r].size() != static_cast<std::size_t>(n)) {
      fail(Errc::kInvalidArgument, what + " row " + std::to_string(r) + " has the wrong length");
    }
    for (std::size_t c = 0; c < doc[r].size(); ++c) {
      if (!doc[r][c].is_null()) m(r, c) = doc[r][c].get<double>();
    }
  }
  return m;
}

std::filesystem::path resolve_ref(const json& obj, const std::string& key,
                                  const std::filesystem::path* base_dir) {
  if (!base_dir) fail(Errc::kInvalidArgument, key + " is not accepted here; inline the table");
  std::filesystem::path p = obj.at(key).get<std::string>();
  return p.is_absolute() ? p : *base_dir / p;
}

Matrix read_matrix(const json& obj, const std::string& inline_key, const std::string& ref_key,
                   int n, const std::filesystem::path* base_dir) {
  if (obj.contains(inline_key)) return matrix_from_json(obj.at(inline_key), n, inline_key);
  if (obj.contains(ref_key)) return matrix_from_csv(resolve_ref(obj, ref_key, base_dir), n);
  fail(Errc::kInvalidArgument, "missing " + inline_key + " or " + ref_key);
}

void set_window(TimeConstraint& t, PoiId id, double open, double close, double stay) {
  const auto i = static_cast<std::size_t>(id);
  t.open[i] = open;
  t.close[i] = close;
  t.stay[i] = stay;
}

double leg(const Matrix& m, PoiId a, PoiId b, const char* what) {
  const double v = m(static_cast<std::size_t>(a), static_cast<std::size_t>(b));
  if (std::isnan(v)) {
    fail(Errc::kMissingTableEntry, std::string(what) + " has no entry for " + std::to_string(a) +
                                       " -> " + std::to_string(b));
  }
  return v;
}

}  // namespace

std::string violation_kind_name(ViolationKind kind) {
  switch (kind) {
    case ViolationKind::kBudget: return "budget";
    case ViolationKind::kMustSee: return "must_see";
    case ViolationKind::kOpeningHours: return "opening_hours";
    case ViolationKind::kTimeLimit: return "time_limit";
  }
  return "unknown";
}

void ConstraintSet::validate(int n_pois) const {
  const auto n = static_cast<std::size_t>(n_pois);
  auto nonnegative = [](const Matrix& m, const char* what) {
    for (double v : m.values()) {
      if (v < 0.0 || std::isinf(v)) {
        fail(Errc::kInvalidArgument, std::string(what) + " entries must be finite and >= 0");
      }
    }
  };
  if (budget) {
    if (!(budget->limit > 0.0)) fail(Errc::kInvalidArgument, "budget limit must be positive");
    if (budget->cost.rows() != n || budget->cost.cols() != n) {
      fail(Errc::kShapeMismatch, "cost matrix does not match the catalog");
    }
    nonnegative(budget->cost, "cost matrix");
  }
  for (PoiId p : must_see) {
    if (p < 0 || p >= n_pois) fail(Errc::kInvalidId, "must-see POI " + std::to_string(p));
  }
  if (time) {
    if (time->limit && !(*time->limit > 0.0)) {
      fail(Errc::kInvalidArgument, "time limit must be positive");
    }
    if (time->open.size() != n || time->close.size() != n || time->stay.size() != n ||
        time->travel.rows() != n || time->travel.cols() != n) {
      fail(Errc::kShapeMismatch, "time tables do not match the catalog");
    }
    nonnegative(time->travel, "travel matrix");
    for (std::size_t i = 0; i < n; ++i) {
      if (time->stay[i] < 0.0) fail(Errc::kInvalidArgument, "stay durations must be >= 0");
      if (time->close[i] < time->open[i]) fail(Errc::kInvalidArgument, "POI closes before it opens");
    }
  }
}

ConstraintReport check_constraints(std::span<const PoiId> itinerary,
                                   const ConstraintSet& constraints) {
  ConstraintReport report;
  if (constraints.empty()) return report;
  for (PoiId p : itinerary) {
    const auto idx = static_cast<std::size_t>(p);
    if (p < 0 || (constraints.budget && idx >= constraints.budget->cost.rows()) ||
        (constraints.time && idx >= constraints.time->open.size())) {
      fail(Errc::kMissingTableEntry, "no table entries for POI " + std::to_string(p));
    }
  }

  if (constraints.budget) {
    double cost = 0.0;
    for (std::size_t i = 1; i < itinerary.size(); ++i) {
      cost += leg(constraints.budget->cost, itinerary[i - 1], itinerary[i], "cost matrix");
    }
    report.cost = cost;
    if (cost > constraints.budget->limit) {
      report.violations.push_back({ViolationKind::kBudget, -1, cost, constraints.budget->limit});
    }
  }

  for (PoiId m : constraints.must_see) {
    if (std::find(itinerary.begin(), itinerary.end(), m) == itinerary.end()) {
      report.violations.push_back({ViolationKind::kMustSee, m, 0.0, 0.0});
    }
  }

  if (constraints.time) {
    const TimeConstraint& t = *constraints.time;
    double clock = t.start;
    for (std::size_t i = 0; i < itinerary.size(); ++i) {
      const PoiId p = itinerary[i];
      const auto idx = static_cast<std::size_t>(p);
      if (i > 0) clock += leg(t.travel, itinerary[i - 1], p, "travel matrix");
      if (std::isnan(t.open[idx]) || std::isnan(t.close[idx]) || std::isnan(t.stay[idx])) {
        fail(Errc::kMissingTableEntry, "no opening hours for POI " + std::to_string(p));
      }
      if (clock > t.close[idx]) {
        report.violations.push_back({ViolationKind::kOpeningHours, p, clock, t.close[idx]});
      }
      clock = std::max(clock, t.open[idx]) + t.stay[idx];
    }
    report.elapsed = clock - t.start;
    if (t.limit && report.elapsed > *t.limit) {
      report.violations.push_back({ViolationKind::kTimeLimit, -1, report.elapsed, *t.limit});
    }
  }
  report.satisfied = report.violations.empty();
  return report;
}

ConstraintSet constraints_from_json(const json& doc, int n_pois,
                                    const std::filesystem::path* base_dir) {
  if (!doc.is_object()) fail(Errc::kInvalidArgument, "constraints must be a JSON object");
  ConstraintSet out;
  try {
    for (const auto& [key, value] : doc.items()) {
      if (key != "budget" && key != "must_see" && key != "time") {
        fail(Errc::kInvalidArgument, "unknown constraint '" + key + "'");
      }
      (void)value;
    }
    if (doc.contains("budget") && !doc.at("budget").is_null()) {
      const json& b = doc.at("budget");
      BudgetConstraint budget;
      budget.limit = b.at("limit").get<double>();
      budget.cost = read_matrix(b, "cost_matrix", "cost_matrix_ref", n_pois, base_dir);
      out.budget = std::move(budget);
    }
    if (doc.contains("must_see") && !doc.at("must_see").is_null()) {
      for (const auto& v : doc.at("must_see")) {
        out.must_see.push_back(checked_id(v.get<long long>(), n_pois, "must_see"));
      }
    }
    if (doc.contains("time") && !doc.at("time").is_null()) {
      const json& tj = doc.at("time");
      TimeConstraint t;
      t.start = tj.value("start", 0.0);
      if (tj.contains("limit") && !tj.at("limit").is_null()) t.limit = tj.at("limit").get<double>();
      const auto n = static_cast<std::size_t>(n_pois);
      t.open.assign(n, kMissing);
      t.close.assign(n, kMissing);
      t.stay.assign(n, kMissing);
      if (tj.contains("windows")) {
        for (const auto& w : tj.at("windows")) {
          set_window(t, checked_id(w.at("poi_id").get<long long>(), n_pois, "windows"),
                     w.at("open").get<double>(), w.at("close").get<double>(),
                     w.value("stay", 0.0));
        }
      } else if (tj.contains("windows_ref")) {
        const auto file = resolve_ref(tj, "windows_ref", base_dir);
        const auto rows = read_rows(file);
        std::vector<std::string> header;
        for (const auto& h : rows.front()) header.push_back(strip(h));
        if (header != std::vector<std::string>{"poi_id", "open", "close", "stay"}) {
          fail(Errc::kParseError, file.string() + ": expected header 'poi_id,open,close,stay'");
        }
        for (std::size_t r = 1; r < rows.size(); ++r) {
          if (rows[r].size() != 4) fail(Errc::kParseError, file.string() + ": expected 4 fields");
          const auto where = file.string();
          set_window(t, checked_id(to_number<long long>(rows[r][0], where), n_pois, where),
                     to_number<double>(rows[r][1], where), to_number<double>(rows[r][2], where),
                     to_number<double>(rows[r][3], where));
        }
      } else {
        fail(Errc::kInvalidArgument, "time constraint needs windows or windows_ref");
      }
      t.travel = read_matrix(tj, "travel_matrix", "travel_matrix_ref", n_pois, base_dir);
      out.time = std::move(t);
    }
  } catch (const json::exception& e) {
    fail(Errc::kInvalidArgument, std::string("malformed constraints: ") + e.what());
  }
  out.validate(n_pois);
  return out;
}

ConstraintSet load_constraints(const std::filesystem::path& file, int n_pois) {
  std::ifstream in(file);
  if (!in) fail(Errc::kIoError, "cannot open " + file.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    fail(Errc::kParseError, file.string() + ": " + e.what());
  }
  const auto base = file.parent_path();
  return constraints_from_json(doc, n_pois, &base);
}

json report_to_json(const ConstraintReport& report) {
  json violations = json::array();
  for (const auto& v : report.violations) {
    json item{{"kind", violation_kind_name(v.kind)}};
    if (v.poi >= 0) item["poi"] = v.poi;
    if (v.kind != ViolationKind::kMustSee) {
      item["value"] = v.value;
      item["limit"] = v.limit;
    }
    violations.push_back(std::move(item));
  }
  return json{{"satisfied", report.satisfied},
              {"violations", std::move(violations)},
              {"cost", report.cost},
              {"elapsed", report.elapsed}};
}

}  // namespace alttrip
