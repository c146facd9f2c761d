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

// Serial reference kernels against their OpenMP counterparts.

#include <benchmark/benchmark.h>

#include "alttrip/itrnet.hpp"
#include "alttrip/kernels.hpp"
#include "alttrip/rng.hpp"

namespace {

using alttrip::Matrix;
namespace kernels = alttrip::kernels;

Matrix random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  alttrip::Rng rng(seed);
  Matrix m(rows, cols);
  for (double& v : m.values()) v = rng.uniform(-1.0, 1.0);
  return m;
}

template <bool kParallel>
void BM_Matmul(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Matrix a = random_matrix(n, n, 1);
  const Matrix b = random_matrix(n, n, 2);
  Matrix out;
  for (auto _ : state) {
    if constexpr (kParallel) {
      kernels::omp::matmul(a, b, out);
    } else {
      kernels::serial::matmul(a, b, out);
    }
    benchmark::DoNotOptimize(out.values().data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n * n * n));
}

template <bool kParallel>
void BM_Score(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const std::size_t m = 30;
  const Matrix proj = random_matrix(n, m, 3);
  const Matrix uw = random_matrix(2, m, 4);
  std::vector<double> alpha(n);
  for (auto _ : state) {
    kernels::ScorerArgs args{proj, uw.row(0), uw.row(1), 0.1};
    if constexpr (kParallel) {
      kernels::omp::score(args, alpha, nullptr);
    } else {
      kernels::serial::score(args, alpha, nullptr);
    }
    benchmark::DoNotOptimize(alpha.data());
  }
}

template <bool kParallel>
void BM_PairwiseDistances(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Matrix pts = random_matrix(n, 2, 5);
  for (auto _ : state) {
    Matrix d = kParallel ? kernels::omp::pairwise_distances(pts)
                         : kernels::serial::pairwise_distances(pts);
    benchmark::DoNotOptimize(d.values().data());
  }
}

template <alttrip::Execution kExec>
void BM_BatchGradient(benchmark::State& state) {
  const int n = 88;
  alttrip::EmbeddingTable emb;
  emb.z = random_matrix(n, 36, 6);
  const alttrip::ItrNetModel model(emb, 32, 30, 7);
  alttrip::Rng rng(8);
  std::vector<alttrip::Route> routes;
  for (int r = 0; r < state.range(0); ++r) {
    std::vector<int> pool(n);
    for (int i = 0; i < n; ++i) pool[static_cast<std::size_t>(i)] = i;
    rng.shuffle(pool);
    pool.resize(static_cast<std::size_t>(rng.between(3, 8)));
    routes.push_back(pool);
  }
  for (auto _ : state) {
    auto g = alttrip::itrnet_gradient(model, routes, kExec);
    benchmark::DoNotOptimize(g.data());
  }
}

BENCHMARK_TEMPLATE(BM_Matmul, false)->Arg(64)->Arg(256);
BENCHMARK_TEMPLATE(BM_Matmul, true)->Arg(64)->Arg(256);
BENCHMARK_TEMPLATE(BM_Score, false)->Arg(88)->Arg(4096);
BENCHMARK_TEMPLATE(BM_Score, true)->Arg(88)->Arg(4096);
BENCHMARK_TEMPLATE(BM_PairwiseDistances, false)->Arg(88)->Arg(2048);
BENCHMARK_TEMPLATE(BM_PairwiseDistances, true)->Arg(88)->Arg(2048);
BENCHMARK_TEMPLATE(BM_BatchGradient, alttrip::Execution::kSerial)->Arg(32);
BENCHMARK_TEMPLATE(BM_BatchGradient, alttrip::Execution::kParallel)->Arg(32);

}  // namespace

BENCHMARK_MAIN();
