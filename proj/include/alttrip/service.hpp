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

// HTTP JSON API over a loaded bundle.
//
//   GET  /health                -> {"status": "ok", "pois": N, ...}
//   GET  /pois                  -> {"dataset": name, "pois": [{id, lat, lon, category}]}
//   POST /recommend             {s, d, k, L?, method?, constraints?, seed?}
//                               -> {"itineraries": [{pois, perplexity, prominent}], "seed"}
//   POST /constraints/validate  {constraints, itinerary? | s, d, L?, seed?}
//                               -> feasibility report
//
// Errors are {"code": <error name>, "message": text} with a 4xx/5xx status.
// The handlers are plain functions of the request body so they can be
// exercised without sockets.

#pragma once

#include <memory>
#include <string>
#include <utility>

#include "alttrip/bundle.hpp"
#include "alttrip/error.hpp"
#include "alttrip/planner.hpp"

namespace alttrip {

struct HttpResponse {
  int status = 200;
  std::string body;  // JSON
};

int http_status(Errc code);

class RecommendationService {
 public:
  explicit RecommendationService(EngineBundle bundle, PlannerOptions options = {});

  HttpResponse health() const;
  HttpResponse pois() const;
  HttpResponse recommend(const std::string& body) const;
  HttpResponse validate_constraints(const std::string& body) const;

  const EngineBundle& bundle() const { return bundle_; }

 private:
  EngineBundle bundle_;
  PlannerOptions options_;
};

// "host:port"; throws InvalidArgument.
std::pair<std::string, int> parse_bind_address(const std::string& address);

class HttpServer {
 public:
  explicit HttpServer(const RecommendationService& service);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  // Port 0 picks a free port. Returns the bound port; BindFailure on error.
  int bind(const std::string& host, int port);
  // Serves until stop() is called from another thread.
  void listen();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace alttrip
