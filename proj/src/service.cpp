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

#include "alttrip/service.hpp"

#include <random>

#include "alttrip/constraints.hpp"
#include "alttrip/hash.hpp"
#include "alttrip/sampler.hpp"
#include "httplib.h"
#include "json.hpp"

namespace alttrip {
namespace {

using nlohmann::json;

HttpResponse ok(const json& body) { return {200, body.dump()}; }

HttpResponse error_response(Errc code, const std::string& message) {
  return {http_status(code), json{{"code", errc_name(code)}, {"message", message}}.dump()};
}

json parse_body(const std::string& body) {
  try {
    json doc = json::parse(body);
    if (!doc.is_object()) fail(Errc::kInvalidArgument, "request body must be a JSON object");
    return doc;
  } catch (const json::exception& e) {
    fail(Errc::kInvalidArgument, std::string("malformed JSON: ") + e.what());
  }
}

template <typename T>
T field(const json& doc, const char* key) {
  if (!doc.contains(key)) fail(Errc::kInvalidArgument, std::string("missing field '") + key + "'");
  try {
    return doc.at(key).get<T>();
  } catch (const json::exception&) {
    fail(Errc::kInvalidArgument, std::string("field '") + key + "' has the wrong type");
  }
}

std::uint64_t request_seed(const json& doc) {
  if (doc.contains("seed") && !doc.at("seed").is_null()) return field<std::uint64_t>(doc, "seed");
  std::random_device rd;
  // Keep echoed seeds within the range JSON clients represent exactly.
  return ((static_cast<std::uint64_t>(rd()) << 32) | rd()) & ((1ULL << 53) - 1);
}

std::optional<int> optional_length(const json& doc) {
  if (!doc.contains("L") || doc.at("L").is_null()) return std::nullopt;
  return field<int>(doc, "L");
}

// Runs `fn`, mapping library errors to JSON error responses.
template <typename Fn>
HttpResponse guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const Error& e) {
    return error_response(e.code(), e.what());
  } catch (const std::exception& e) {
    return {500, json{{"code", "Internal"}, {"message", e.what()}}.dump()};
  }
}

}  // namespace

int http_status(Errc code) {
  switch (code) {
    case Errc::kInvalidArgument:
    case Errc::kInvalidId:
    case Errc::kParseError:
    case Errc::kConstraintUnsupported:
    case Errc::kMissingTableEntry:
    case Errc::kBadPosition:
    case Errc::kShapeMismatch:
    case Errc::kUnknownPoi:
      return 400;
    case Errc::kInfeasibleConstraints:
    case Errc::kExhaustedCandidates:
    case Errc::kNoEligiblePoi:
      return 422;
    default:
      return 500;
  }
}

RecommendationService::RecommendationService(EngineBundle bundle, PlannerOptions options)
    : bundle_(std::move(bundle)), options_(options) {
  bundle_.check_consistency();
}

HttpResponse RecommendationService::health() const {
  return ok({{"status", "ok"},
             {"dataset", bundle_.dataset_name},
             {"pois", bundle_.catalog.size()},
             {"catalog_hash", hex_digest(bundle_.catalog.fingerprint())}});
}

HttpResponse RecommendationService::pois() const {
  json list = json::array();
  for (const auto& p : bundle_.catalog.pois()) {
    list.push_back({{"id", p.id}, {"lat", p.lat}, {"lon", p.lon}, {"category", p.category}});
  }
  return ok({{"dataset", bundle_.dataset_name}, {"pois", std::move(list)}});
}

HttpResponse RecommendationService::recommend(const std::string& body) const {
  return guarded([&] {
    const json doc = parse_body(body);
    Query q;
    q.s = field<int>(doc, "s");
    q.d = field<int>(doc, "d");
    q.k = doc.contains("k") ? field<int>(doc, "k") : 1;
    q.length = optional_length(doc);
    q.method = parse_method(doc.contains("method") ? field<std::string>(doc, "method") : "lstm");
    q.seed = request_seed(doc);

    std::optional<ConstraintSet> constraints;
    if (doc.contains("constraints") && !doc.at("constraints").is_null()) {
      constraints = constraints_from_json(doc.at("constraints"), bundle_.catalog.size(), nullptr);
    }
    const auto set = recommend_topk(bundle_.model, q, constraints ? &*constraints : nullptr,
                                    options_);
    json its = json::array();
    for (const auto& it : set.itineraries) {
      its.push_back({{"pois", it.pois}, {"perplexity", it.perplexity}, {"prominent", it.prominent}});
    }
    return ok({{"itineraries", std::move(its)}, {"seed", q.seed}});
  });
}

HttpResponse RecommendationService::validate_constraints(const std::string& body) const {
  return guarded([&] {
    const json doc = parse_body(body);
    const int n = bundle_.catalog.size();
    const ConstraintSet cs =
        doc.contains("constraints") ? constraints_from_json(doc.at("constraints"), n, nullptr)
                                    : ConstraintSet{};
    json out{{"valid", true}};
    if (doc.contains("itinerary")) {
      const auto itinerary = field<std::vector<int>>(doc, "itinerary");
      for (PoiId p : itinerary) {
        if (p < 0 || p >= n) fail(Errc::kInvalidId, "POI id " + std::to_string(p));
      }
      out["report"] = report_to_json(check_constraints(itinerary, cs));
    } else if (doc.contains("s") && doc.contains("d")) {
      Query q;
      q.s = field<int>(doc, "s");
      q.d = field<int>(doc, "d");
      q.length = optional_length(doc);
      q.seed = request_seed(doc);
      validate_query(q, n);
      OccurrenceCounter occ(n);
      const auto scores = relevancy_scores(bundle_.model, q.s, q.d);
      const PoiId prominent = pick_prominent(scores, occ, q.s, q.d);
      Rng rng(q.seed);
      try {
        const auto seed = seed_itinerary(bundle_.model, prominent, q.s, q.d, &cs, q.length, rng,
                                         options_.seed_restarts);
        out["feasible"] = true;
        out["example"] = seed.pois;
        out["report"] = report_to_json(check_constraints(seed.pois, cs));
      } catch (const Error& e) {
        if (e.code() != Errc::kInfeasibleConstraints) throw;
        out["feasible"] = false;
        out["message"] = e.what();
      }
      out["seed"] = q.seed;
    }
    return ok(out);
  });
}

std::pair<std::string, int> parse_bind_address(const std::string& address) {
  const auto colon = address.rfind(':');
  if (colon == std::string::npos || colon == 0) {
    fail(Errc::kInvalidArgument, "bind address must be host:port, got '" + address + "'");
  }
  const std::string host = address.substr(0, colon);
  int port = -1;
  try {
    std::size_t used = 0;
    port = std::stoi(address.substr(colon + 1), &used);
    if (used != address.size() - colon - 1) port = -1;
  } catch (const std::exception&) {
    port = -1;
  }
  if (port < 0 || port > 65535) fail(Errc::kInvalidArgument, "bad port in '" + address + "'");
  return {host, port};
}

struct HttpServer::Impl {
  const RecommendationService& service;
  httplib::Server server;

  explicit Impl(const RecommendationService& s) : service(s) {
    auto send = [](httplib::Response& res, const HttpResponse& r) {
      res.status = r.status;
      res.set_content(r.body, "application/json");
    };
    server.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                                {"Access-Control-Allow-Headers", "Content-Type"},
                                {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"}});
    server.Get("/health", [this, send](const httplib::Request&, httplib::Response& res) {
      send(res, service.health());
    });
    server.Get("/pois", [this, send](const httplib::Request&, httplib::Response& res) {
      send(res, service.pois());
    });
    server.Post("/recommend", [this, send](const httplib::Request& req, httplib::Response& res) {
      send(res, service.recommend(req.body));
    });
    server.Post("/constraints/validate",
                [this, send](const httplib::Request& req, httplib::Response& res) {
                  send(res, service.validate_constraints(req.body));
                });
    server.Options(".*", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });
  }
};

HttpServer::HttpServer(const RecommendationService& service)
    : impl_(std::make_unique<Impl>(service)) {}

HttpServer::~HttpServer() = default;

int HttpServer::bind(const std::string& host, int port) {
  int bound = -1;
  if (port == 0) {
    bound = impl_->server.bind_to_any_port(host);
  } else if (impl_->server.bind_to_port(host, port)) {
    bound = port;
  }
  if (bound <= 0) {
    fail(Errc::kBindFailure, "cannot bind " + host + ":" + std::to_string(port));
  }
  return bound;
}

void HttpServer::listen() { impl_->server.listen_after_bind(); }

void HttpServer::stop() { impl_->server.stop(); }

}  // namespace alttrip
