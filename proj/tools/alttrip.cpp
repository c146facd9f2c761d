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

// Command-line front end: ingestion, training, queries, evaluation and the
// HTTP service.

#include <csignal>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "alttrip/bundle.hpp"
#include "alttrip/constraints.hpp"
#include "alttrip/dataset.hpp"
#include "alttrip/error.hpp"
#include "alttrip/hash.hpp"
#include "alttrip/itrnet.hpp"
#include "alttrip/metrics.hpp"
#include "alttrip/planner.hpp"
#include "alttrip/poigraph.hpp"
#include "alttrip/service.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using namespace alttrip;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitDivergence = 4;

int exit_code(Errc code) {
  switch (code) {
    case Errc::kNonFiniteLoss: return kExitDivergence;
    case Errc::kInvalidArgument:
    case Errc::kConstraintUnsupported: return kExitUsage;
    default: return kExitData;
  }
}

std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stoi(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      fail(Errc::kInvalidArgument, "expected comma-separated integers, got '" + text + "'");
    }
  }
  return out;
}

struct TrainFlags {
  int hidden = 32;
  int mlp = 30;
  int epochs = 100;
  int batch = 32;
  double lr = 0.001;
  int patience = 10;
  std::uint64_t seed = 1;

  void add(CLI::App* cmd) {
    cmd->add_option("--hidden", hidden, "LSTM hidden size")->capture_default_str();
    cmd->add_option("--mlp", mlp, "scorer hidden size")->capture_default_str();
    cmd->add_option("--epochs", epochs, "maximum epochs")->capture_default_str();
    cmd->add_option("--batch", batch, "batch size")->capture_default_str();
    cmd->add_option("--lr", lr, "Adam learning rate")->capture_default_str();
    cmd->add_option("--patience", patience, "early-stopping patience")->capture_default_str();
    cmd->add_option("--seed", seed, "initialisation and shuffling seed")->capture_default_str();
  }

  TrainConfig config() const {
    TrainConfig c;
    c.hidden_size = hidden;
    c.mlp_dim = mlp;
    c.epochs = epochs;
    c.batch_size = batch;
    c.learning_rate = lr;
    c.patience = patience;
    c.seed = seed;
    return c;
  }
};

ItrNetModel train_logged(const std::vector<Route>& routes, const EmbeddingTable& emb,
                         const TrainConfig& cfg, const std::string& label) {
  TrainTrace trace;
  auto model = train_itrnet(routes, emb, cfg, &trace);
  std::cerr << label << ": " << trace.epochs_run << " epochs, best epoch " << trace.best_epoch + 1
            << ", train loss " << (trace.train_loss.empty() ? 0.0 : trace.train_loss.back());
  if (!trace.validation_loss.empty()) {
    std::cerr << ", validation loss " << trace.validation_loss[static_cast<std::size_t>(trace.best_epoch)];
  }
  std::cerr << '\n';
  return model;
}

EmbeddingTable train_embeddings_for(const PoiCatalog& catalog, int cat_dim, int dist_dim,
                                    std::uint64_t seed) {
  auto cat = GaeConfig::category_defaults();
  auto dist = GaeConfig::distance_defaults();
  cat.embed_dim = cat_dim;
  dist.embed_dim = dist_dim;
  cat.seed = seed;
  dist.seed = seed + 1;
  GaeTrace tc, td;
  auto emb = embed_catalog(catalog, cat, dist, &tc, &td);
  std::cerr << "category autoencoder: loss " << tc.loss.front() << " -> " << tc.loss.back()
            << "; distance autoencoder: loss " << td.loss.front() << " -> " << td.loss.back()
            << '\n';
  return emb;
}

void print_itineraries(const RecommendationSet& set, const PoiCatalog& catalog, bool as_json) {
  if (as_json) {
    nlohmann::json its = nlohmann::json::array();
    for (const auto& it : set.itineraries) {
      its.push_back({{"pois", it.pois}, {"perplexity", it.perplexity}, {"prominent", it.prominent}});
    }
    std::cout << nlohmann::json{{"itineraries", its}, {"seed", set.query.seed}}.dump(2) << '\n';
    return;
  }
  for (std::size_t i = 0; i < set.itineraries.size(); ++i) {
    const auto& it = set.itineraries[i];
    std::cout << '#' << i + 1 << "  perplexity " << std::fixed << std::setprecision(4)
              << it.perplexity << "  prominent " << it.prominent << '\n'
              << "    ";
    for (std::size_t j = 0; j < it.pois.size(); ++j) {
      std::cout << (j ? " -> " : "") << it.pois[j] << " (" << catalog[it.pois[j]].category << ')';
    }
    std::cout << '\n';
  }
  std::cout << "seed " << set.query.seed << '\n';
}

// Loads the cached model for `fold` when it matches the configuration,
// routes and embeddings; otherwise trains and caches a fresh one.
ItrNetModel fold_model(const fs::path& dir, int fold, const std::vector<Route>& train,
                       const EmbeddingTable& emb, const TrainConfig& cfg) {
  const fs::path file = dir / ("fold" + std::to_string(fold) + ".model.bin");
  if (fs::exists(file)) {
    try {
      auto cached = load_model(file);
      if (cached.train_config.fingerprint() == cfg.fingerprint() &&
          cached.corpus_hash == routes_fingerprint(train) &&
          cached.embeddings().fingerprint() == emb.fingerprint()) {
        std::cerr << "fold " << fold << ": using cached " << file.string() << '\n';
        return cached;
      }
    } catch (const Error& e) {
      std::cerr << "fold " << fold << ": ignoring unreadable cache (" << e.what() << ")\n";
    }
  }
  auto model = train_logged(train, emb, cfg, "fold " + std::to_string(fold));
  save_model(model, file);
  return model;
}

HttpServer* g_server = nullptr;

void on_signal(int) {
  if (g_server) g_server->stop();
}

EndpointRule endpoint_rule(const std::string& name) {
  return name == "conditional" ? EndpointRule::kConditional : EndpointRule::kFirstPassage;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Alternative itinerary recommendation"};
  app.require_subcommand(1);

  // ingest
  auto* ingest = app.add_subcommand("ingest", "Build routes and folds from check-ins");
  std::string pois_file, visits_file, out_dir, dataset_name = "dataset";
  double gap_hours = 8.0;
  int n_folds = 5;
  std::uint64_t fold_seed = 1;
  ingest->add_option("--pois", pois_file, "POI catalog CSV")->required();
  ingest->add_option("--visits", visits_file, "check-in CSV")->required();
  ingest->add_option("--out", out_dir, "output directory")->required();
  ingest->add_option("--gap-hours", gap_hours, "trajectory split gap")->capture_default_str();
  ingest->add_option("--folds", n_folds, "number of folds")->capture_default_str();
  ingest->add_option("--seed", fold_seed, "fold shuffle seed")->capture_default_str();
  ingest->add_option("--name", dataset_name, "dataset name")->capture_default_str();

  // train-embeddings
  auto* train_emb = app.add_subcommand("train-embeddings", "Train the POI graph autoencoders");
  std::string data_dir, emb_out, dims = "12,24";
  std::uint64_t emb_seed = 1;
  train_emb->add_option("--data", data_dir, "ingested data directory")->required();
  train_emb->add_option("--out", emb_out, "embedding file")->required();
  train_emb->add_option("--dims", dims, "category,distance embedding sizes")->capture_default_str();
  train_emb->add_option("--seed", emb_seed, "initialisation seed")->capture_default_str();

  // train-itrnet
  auto* train_net = app.add_subcommand("train-itrnet", "Train the sequence model into a bundle");
  std::string emb_file, model_out;
  int train_fold = -1;
  TrainFlags tflags;
  train_net->add_option("--data", data_dir, "ingested data directory")->required();
  train_net->add_option("--emb", emb_file, "embedding file")->required();
  train_net->add_option("--out", model_out, "bundle file")->required();
  train_net->add_option("--fold", train_fold, "hold out this fold (-1 trains on all routes)")
      ->capture_default_str();
  train_net->add_option("--name", dataset_name, "dataset name");
  tflags.add(train_net);

  // recommend
  auto* rec = app.add_subcommand("recommend", "Recommend k itineraries");
  std::string bundle_file, method = "lstm", constraints_file;
  int s = -1, d = -1, k = 3, length = 0, iterations = 0, l_max = 0;
  std::string endpoint = "first-passage";
  std::uint64_t query_seed = 0;
  bool as_json = false;
  rec->add_option("--bundle", bundle_file, "bundle file")->required();
  rec->add_option("--s", s, "source POI")->required();
  rec->add_option("--d", d, "destination POI")->required();
  rec->add_option("--k", k, "number of itineraries")->capture_default_str();
  rec->add_option("--L", length, "fixed itinerary length (0 = free)")->capture_default_str();
  rec->add_option("--method", method, "lstm or sampler")->capture_default_str();
  rec->add_option("--constraints", constraints_file, "constraints JSON (sampler only)");
  auto* seed_opt = rec->add_option("--seed", query_seed, "sampler seed");
  rec->add_option("--iterations", iterations, "sampler iterations (0 = default)");
  rec->add_option("--lmax", l_max, "half-itinerary bound for free length (0 = model default)");
  rec->add_option("--endpoint", endpoint, "free-length endpoint slot: first-passage or conditional")
      ->check(CLI::IsMember({"first-passage", "conditional"}))
      ->capture_default_str();
  rec->add_flag("--json", as_json, "print JSON");

  // evaluate
  auto* eval = app.add_subcommand("evaluate", "Cross-validated evaluation");
  std::string bundle_dir, report_out, alphas = "0.1:0.9:0.2", folds_list;
  std::uint64_t eval_seed = 1;
  TrainFlags eflags;
  eval->add_option("--bundle-dir", bundle_dir,
                   "directory with pois.csv, routes.csv, folds.json (emb.bin and per-fold "
                   "models are created there when missing)")
      ->required();
  eval->add_option("--k", k, "number of itineraries")->capture_default_str();
  eval->add_option("--L", length, "fixed itinerary length (0 = free)")->capture_default_str();
  eval->add_option("--method", method, "lstm or sampler")->capture_default_str();
  eval->add_option("--alphas", alphas, "alpha grid start:stop:step or list")->capture_default_str();
  eval->add_option("--out", report_out, "per-query CSV; a JSON summary is written alongside")
      ->required();
  eval->add_option("--folds", folds_list, "comma-separated folds to run (default all)");
  eval->add_option("--query-seed", eval_seed, "sampler seed base")->capture_default_str();
  eval->add_option("--iterations", iterations, "sampler iterations (0 = default)");
  eval->add_option("--lmax", l_max, "half-itinerary bound for free length (0 = model default)");
  eval->add_option("--endpoint", endpoint, "free-length endpoint slot: first-passage or conditional")
      ->check(CLI::IsMember({"first-passage", "conditional"}))
      ->capture_default_str();
  eflags.add(eval);

  // serve
  auto* serve = app.add_subcommand("serve", "Serve the HTTP API");
  std::string bind = "127.0.0.1:8080";
  serve->add_option("--bundle", bundle_file, "bundle file")->required();
  serve->add_option("--bind", bind, "host:port")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  }

  try {
    if (*ingest) {
      const auto catalog = load_catalog(pois_file);
      const auto routes = build_routes(load_visits(visits_file), catalog, gap_hours);
      const auto folds = split_folds(routes, n_folds, fold_seed);
      const auto truth = ground_truth_index(routes);
      fs::create_directories(out_dir);
      save_catalog(catalog, fs::path(out_dir) / "pois.csv");
      save_routes(routes, fs::path(out_dir) / "routes.csv");
      save_folds(folds, fs::path(out_dir) / "folds.json");
      const nlohmann::json manifest{{"name", dataset_name},
                                    {"pois", catalog.size()},
                                    {"routes", routes.size()},
                                    {"pairs", truth.key_count()},
                                    {"gap_hours", gap_hours},
                                    {"catalog_hash", hex_digest(catalog.fingerprint())},
                                    {"routes_hash", hex_digest(routes_fingerprint(routes))}};
      std::ofstream(fs::path(out_dir) / "manifest.json") << manifest.dump(2) << '\n';
      std::cout << "pois " << catalog.size() << "\nroutes " << routes.size() << "\npairs "
                << truth.key_count() << '\n';
    } else if (*train_emb) {
      const auto d2 = parse_int_list(dims);
      if (d2.size() != 2) fail(Errc::kInvalidArgument, "--dims needs two sizes");
      const auto catalog = load_catalog(fs::path(data_dir) / "pois.csv");
      save_embeddings(train_embeddings_for(catalog, d2[0], d2[1], emb_seed), emb_out);
    } else if (*train_net) {
      const auto catalog = load_catalog(fs::path(data_dir) / "pois.csv");
      auto routes = load_routes(fs::path(data_dir) / "routes.csv", catalog);
      if (train_fold >= 0) {
        const auto folds = load_folds(fs::path(data_dir) / "folds.json");
        std::vector<Route> train;
        for (auto i : folds.routes_outside_fold(train_fold)) train.push_back(routes[i]);
        routes = std::move(train);
      }
      const auto emb = load_embeddings(emb_file);
      if (emb.catalog_hash != catalog.fingerprint()) {
        fail(Errc::kHashMismatch, "embeddings were trained on a different catalog");
      }
      EngineBundle bundle;
      bundle.dataset_name = dataset_name;
      if (fs::exists(fs::path(data_dir) / "manifest.json") && !train_net->count("--name")) {
        std::ifstream in(fs::path(data_dir) / "manifest.json");
        bundle.dataset_name = nlohmann::json::parse(in).value("name", dataset_name);
      }
      bundle.catalog = catalog;
      bundle.model = train_logged(routes, emb, tflags.config(), "itrnet");
      save_bundle(bundle, model_out);
    } else if (*rec) {
      const auto bundle = load_bundle(bundle_file);
      Query q;
      q.s = s;
      q.d = d;
      q.k = k;
      if (length > 0) q.length = length;
      q.method = parse_method(method);
      q.seed = seed_opt->count() ? query_seed : std::random_device{}();
      std::optional<ConstraintSet> cs;
      if (!constraints_file.empty()) cs = load_constraints(constraints_file, bundle.catalog.size());
      PlannerOptions opts;
      opts.sampler_iterations = iterations;
      opts.l_max = l_max;
      opts.endpoint_rule = endpoint_rule(endpoint);
      const auto set = recommend_topk(bundle.model, q, cs ? &*cs : nullptr, opts);
      print_itineraries(set, bundle.catalog, as_json);
    } else if (*eval) {
      const fs::path dir = bundle_dir;
      const auto catalog = load_catalog(dir / "pois.csv");
      const auto routes = load_routes(dir / "routes.csv", catalog);
      const auto folds = load_folds(dir / "folds.json");
      EmbeddingTable emb;
      if (fs::exists(dir / "emb.bin")) {
        emb = load_embeddings(dir / "emb.bin");
        if (emb.catalog_hash != catalog.fingerprint()) {
          fail(Errc::kHashMismatch, "emb.bin was trained on a different catalog");
        }
      } else {
        emb = train_embeddings_for(catalog, 12, 24, 1);
        save_embeddings(emb, dir / "emb.bin");
      }
      EvaluationConfig cfg;
      cfg.k = k;
      if (length > 0) cfg.length = length;
      cfg.method = parse_method(method);
      cfg.alphas = parse_alpha_grid(alphas);
      for (double a : cfg.alphas) {
        if (!alpha_in_evaluated_range(a)) {
          std::cerr << "warning: alpha " << a << " is outside [0.1, 0.9]\n";
        }
      }
      cfg.seed = eval_seed;
      cfg.planner.sampler_iterations = iterations;
      cfg.planner.l_max = l_max;
      cfg.planner.endpoint_rule = endpoint_rule(endpoint);
      if (!folds_list.empty()) cfg.folds = parse_int_list(folds_list);
      const TrainConfig tcfg = eflags.config();
      const auto report = evaluate_folds(
          [&](int fold, const std::vector<Route>& train) {
            return fold_model(dir, fold, train, emb, tcfg);
          },
          routes, folds, cfg);
      write_report_csv(report, report_out);
      fs::path json_out = report_out;
      json_out.replace_extension(".json");
      auto summary = report_summary_json(report);
      summary["train"] = {{"hidden", tcfg.hidden_size}, {"mlp", tcfg.mlp_dim},
                          {"epochs", tcfg.epochs},      {"batch", tcfg.batch_size},
                          {"lr", tcfg.learning_rate},   {"patience", tcfg.patience},
                          {"seed", tcfg.seed},          {"config_hash", hex_digest(tcfg.fingerprint())}};
      summary["dataset"] = {{"catalog_hash", hex_digest(catalog.fingerprint())},
                            {"routes_hash", hex_digest(routes_fingerprint(routes))},
                            {"fold_seed", folds.seed}};
      std::ofstream(json_out) << summary.dump(2) << '\n';
      std::cout << "f1 " << report.f1 << "\npairs_f1 " << report.pairs_f1 << "\ndiversity "
                << (report.diversity ? std::to_string(*report.diversity) : std::string("--"))
                << "\nseconds/query " << report.mean_seconds << '\n';
    } else if (*serve) {
      RecommendationService service(load_bundle(bundle_file));
      HttpServer server(service);
      const auto [host, port] = parse_bind_address(bind);
      const int bound = server.bind(host, port);
      g_server = &server;
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      std::cerr << "serving " << service.bundle().catalog.size() << " POIs on " << host << ':'
                << bound << '\n';
      server.listen();
      g_server = nullptr;
    }
  } catch (const Error& e) {
    std::cerr << "error [" << errc_name(e.code()) << "]: " << e.what() << '\n';
    return exit_code(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  }
  return 0;
}
