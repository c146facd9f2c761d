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

#include <fstream>
#include <thread>

#include "alttrip/bundle.hpp"
#include "alttrip/error.hpp"
#include "alttrip/service.hpp"
#include "httplib.h"
#include "json.hpp"
#include "toy.hpp"

namespace alttrip {
namespace {

using nlohmann::json;

Errc code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return Errc::kInvalidArgument;
}

EngineBundle toy_bundle() {
  return EngineBundle{"toy", testing::toy_catalog(16, 11), testing::small_trained_model()};
}

std::string read_bytes(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

TEST(Bundle, RoundTripReproducesInference) {
  auto b = toy_bundle();
  auto dir = testing::temp_dir("bundle");
  save_bundle(b, dir / "b.bin");
  auto back = load_bundle(dir / "b.bin");
  EXPECT_EQ(back.dataset_name, "toy");
  EXPECT_EQ(back.catalog.fingerprint(), b.catalog.fingerprint());
  PoiMask mask(16);
  std::vector<PoiId> prefix{3, 7};
  EXPECT_EQ(forward_step_probs(back.model, prefix, 3, 9, mask).probs,
            forward_step_probs(b.model, prefix, 3, 9, mask).probs);
  // Saving the loaded bundle gives the same bytes.
  save_bundle(back, dir / "c.bin");
  EXPECT_EQ(read_bytes(dir / "b.bin"), read_bytes(dir / "c.bin"));
}

TEST(Bundle, TamperedFileIsCorrupt) {
  auto dir = testing::temp_dir("tamper");
  save_bundle(toy_bundle(), dir / "b.bin");
  auto bytes = read_bytes(dir / "b.bin");
  bytes[bytes.size() / 3] ^= 0x01;
  std::ofstream(dir / "b.bin", std::ios::binary) << bytes;
  EXPECT_EQ(code_of([&] { load_bundle(dir / "b.bin"); }), Errc::kCorruptFile);
  std::ofstream(dir / "short.bin", std::ios::binary) << bytes.substr(0, 20);
  EXPECT_EQ(code_of([&] { load_bundle(dir / "short.bin"); }), Errc::kCorruptFile);
}

TEST(Bundle, CatalogMismatchRejectedOnSave) {
  auto b = toy_bundle();
  b.catalog = testing::toy_catalog(16, 12);
  auto dir = testing::temp_dir("mismatch");
  EXPECT_EQ(code_of([&] { save_bundle(b, dir / "b.bin"); }), Errc::kHashMismatch);
  EXPECT_EQ(code_of([&] { b.check_consistency(); }), Errc::kHashMismatch);
}

TEST(Service, StatusMapping) {
  EXPECT_EQ(http_status(Errc::kInvalidArgument), 400);
  EXPECT_EQ(http_status(Errc::kConstraintUnsupported), 400);
  EXPECT_EQ(http_status(Errc::kInvalidId), 400);
  EXPECT_EQ(http_status(Errc::kInfeasibleConstraints), 422);
  EXPECT_EQ(http_status(Errc::kIoError), 500);
}

TEST(Service, HealthAndPois) {
  RecommendationService svc(toy_bundle());
  auto h = json::parse(svc.health().body);
  EXPECT_EQ(h.at("status"), "ok");
  EXPECT_EQ(h.at("pois"), 16);
  auto p = svc.pois();
  EXPECT_EQ(p.status, 200);
  auto j = json::parse(p.body);
  ASSERT_EQ(j.at("pois").size(), 16u);
  for (const auto& poi : j.at("pois")) {
    for (const char* key : {"id", "lat", "lon", "category"}) EXPECT_TRUE(poi.contains(key));
  }
}

TEST(Service, RecommendSampler) {
  RecommendationService svc(toy_bundle());
  const std::string body = R"({"s": 2, "d": 9, "k": 3, "L": 5, "method": "sampler", "seed": 4})";
  auto r = svc.recommend(body);
  ASSERT_EQ(r.status, 200) << r.body;
  auto j = json::parse(r.body);
  EXPECT_EQ(j.at("seed"), 4);
  ASSERT_EQ(j.at("itineraries").size(), 3u);
  for (const auto& it : j.at("itineraries")) {
    auto pois = it.at("pois").get<std::vector<int>>();
    EXPECT_EQ(pois.size(), 5u);
    EXPECT_EQ(pois.front(), 2);
    EXPECT_EQ(pois.back(), 9);
  }
  EXPECT_EQ(svc.recommend(body).body, r.body);
}

TEST(Service, SeedIsEchoedWhenAbsent) {
  RecommendationService svc(toy_bundle());
  auto r = svc.recommend(R"({"s": 2, "d": 9, "k": 2, "L": 4, "method": "sampler"})");
  ASSERT_EQ(r.status, 200);
  auto j = json::parse(r.body);
  const auto seed = j.at("seed").get<std::uint64_t>();
  auto again = svc.recommend(R"({"s": 2, "d": 9, "k": 2, "L": 4, "method": "sampler", "seed": )" +
                             std::to_string(seed) + "}");
  EXPECT_EQ(json::parse(again.body).at("itineraries"), j.at("itineraries"));
}

TEST(Service, Errors) {
  RecommendationService svc(toy_bundle());
  auto r = svc.recommend(R"({"s": 2, "d": 9, "k": 3, "method": "lstm", "constraints": {"must_see": [4]}})");
  EXPECT_EQ(r.status, 400);
  EXPECT_EQ(json::parse(r.body).at("code"), "ConstraintUnsupported");
  EXPECT_EQ(svc.recommend("{not json").status, 400);
  EXPECT_EQ(svc.recommend(R"({"s": 2})").status, 400);
  EXPECT_EQ(svc.recommend(R"({"s": 2, "d": 2})").status, 400);
  EXPECT_EQ(svc.recommend(R"({"s": 2, "d": 99})").status, 400);
  auto ref = svc.recommend(
      R"({"s": 2, "d": 9, "method": "sampler", "constraints": {"budget": {"limit": 1, "cost_matrix_ref": "/etc/passwd"}}})");
  EXPECT_EQ(ref.status, 400);
}

TEST(Service, InfeasibleIsUnprocessable) {
  RecommendationService svc(toy_bundle(), PlannerOptions{0, EndpointRule::kFirstPassage, 0, 5});
  json cost = json::array();
  for (int i = 0; i < 16; ++i) cost.push_back(std::vector<double>(16, 10.0));
  json body = {{"s", 2}, {"d", 9}, {"k", 1}, {"method", "sampler"},
               {"constraints", {{"budget", {{"limit", 5.0}, {"cost_matrix", cost}}}}}};
  auto r = svc.recommend(body.dump());
  EXPECT_EQ(r.status, 422);
  EXPECT_EQ(json::parse(r.body).at("code"), "InfeasibleConstraints");

  json check = {{"s", 2}, {"d", 9}, {"constraints", {{"budget", {{"limit", 5.0}, {"cost_matrix", cost}}}}}};
  auto v = json::parse(svc.validate_constraints(check.dump()).body);
  EXPECT_FALSE(v.at("feasible").get<bool>());
}

TEST(Service, ValidateItinerary) {
  RecommendationService svc(toy_bundle());
  auto r = svc.validate_constraints(R"({"constraints": {"must_see": [5]}, "itinerary": [2, 5, 9]})");
  ASSERT_EQ(r.status, 200) << r.body;
  auto j = json::parse(r.body);
  EXPECT_TRUE(j.at("report").at("satisfied").get<bool>());
  j = json::parse(
      svc.validate_constraints(R"({"constraints": {"must_see": [5]}, "itinerary": [2, 6, 9]})").body);
  EXPECT_FALSE(j.at("report").at("satisfied").get<bool>());
  auto f = json::parse(svc.validate_constraints(R"({"constraints": {"must_see": [5]}, "s": 2, "d": 9, "L": 5, "seed": 1})").body);
  EXPECT_TRUE(f.at("feasible").get<bool>());
  auto example = f.at("example").get<std::vector<int>>();
  EXPECT_NE(std::find(example.begin(), example.end(), 5), example.end());
}

TEST(Service, BindAddress) {
  EXPECT_EQ(parse_bind_address("127.0.0.1:8080"), (std::pair<std::string, int>{"127.0.0.1", 8080}));
  EXPECT_EQ(code_of([] { parse_bind_address("localhost"); }), Errc::kInvalidArgument);
  EXPECT_EQ(code_of([] { parse_bind_address("h:99999"); }), Errc::kInvalidArgument);
}

TEST(Service, OverSocket) {
  RecommendationService svc(toy_bundle());
  HttpServer server(svc);
  const int port = server.bind("127.0.0.1", 0);
  ASSERT_GT(port, 0);
  std::thread thread([&] { server.listen(); });
  httplib::Client client("127.0.0.1", port);
  client.set_connection_timeout(5);

  auto pois = client.Get("/pois");
  ASSERT_TRUE(pois);
  EXPECT_EQ(pois->status, 200);
  EXPECT_EQ(pois->get_header_value("Access-Control-Allow-Origin"), "*");
  EXPECT_EQ(json::parse(pois->body).at("pois").size(), 16u);

  auto rec = client.Post("/recommend", R"({"s": 1, "d": 3, "k": 2, "L": 4, "method": "sampler", "seed": 5})",
                         "application/json");
  ASSERT_TRUE(rec);
  EXPECT_EQ(rec->status, 200);
  EXPECT_EQ(rec->body, svc.recommend(R"({"s": 1, "d": 3, "k": 2, "L": 4, "method": "sampler", "seed": 5})").body);

  auto bad = client.Post("/recommend", R"({"s": 1, "d": 3, "method": "lstm", "constraints": {"must_see": [4]}})",
                         "application/json");
  ASSERT_TRUE(bad);
  EXPECT_EQ(bad->status, 400);

  auto options = client.Options("/recommend");
  ASSERT_TRUE(options);
  EXPECT_LT(options->status, 300);
  EXPECT_EQ(client.Get("/health")->status, 200);

  HttpServer other(svc);
  EXPECT_EQ(code_of([&] { other.bind("203.0.113.300", 0); }), Errc::kBindFailure);

  server.stop();
  thread.join();
}

}  // namespace
}  // namespace alttrip
