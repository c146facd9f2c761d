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

#include "alttrip/kernels.hpp"
#include "alttrip/rng.hpp"

namespace alttrip {
namespace {

Matrix random_matrix(std::size_t r, std::size_t c, std::uint64_t seed) {
  Rng rng(seed);
  Matrix m(r, c);
  for (double& v : m.values()) v = rng.uniform(-1.0, 1.0);
  return m;
}

// Triple loop written here, independent of the kernels.
Matrix naive_product(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < b.cols(); ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < a.cols(); ++k) s += a(i, k) * b(k, j);
      out(i, j) = s;
    }
  return out;
}

Matrix transpose(const Matrix& a) {
  Matrix t(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
  return t;
}

TEST(Kernels, MatmulVariantsMatchNaive) {
  auto a = random_matrix(13, 7, 1);
  auto b = random_matrix(7, 9, 2);
  auto ref = naive_product(a, b);
  Matrix s, o;
  kernels::serial::matmul(a, b, s);
  kernels::omp::matmul(a, b, o);
  EXPECT_EQ(s, o);
  for (std::size_t i = 0; i < s.size(); ++i) EXPECT_NEAR(s.values()[i], ref.values()[i], 1e-12);

  auto at = transpose(a);
  Matrix tn_s, tn_o;
  kernels::serial::matmul_tn(at, b, tn_s);
  kernels::omp::matmul_tn(at, b, tn_o);
  EXPECT_EQ(tn_s, tn_o);
  for (std::size_t i = 0; i < s.size(); ++i) EXPECT_NEAR(tn_s.values()[i], ref.values()[i], 1e-12);

  auto bt = transpose(b);
  Matrix nt_s, nt_o;
  kernels::serial::matmul_nt(a, bt, nt_s);
  kernels::omp::matmul_nt(a, bt, nt_o);
  EXPECT_EQ(nt_s, nt_o);
  for (std::size_t i = 0; i < s.size(); ++i) EXPECT_NEAR(nt_s.values()[i], ref.values()[i], 1e-12);
}

TEST(Kernels, GemvAccumulates) {
  auto a = random_matrix(11, 5, 3);
  std::vector<double> x{1.0, -2.0, 0.5, 0.25, 3.0};
  std::vector<double> ys(11, 1.0), yo(11, 1.0);
  kernels::serial::gemv_acc(a, x, ys);
  kernels::omp::gemv_acc(a, x, yo);
  EXPECT_EQ(ys, yo);
  for (std::size_t i = 0; i < 11; ++i) {
    double ref = 1.0;
    for (std::size_t k = 0; k < 5; ++k) ref += a(i, k) * x[k];
    EXPECT_NEAR(ys[i], ref, 1e-12);
  }
}

TEST(Kernels, ScoreMatchesDirectFormula) {
  auto proj = random_matrix(40, 6, 4);
  std::vector<double> u{0.1, -0.2, 0.3, 0.0, 0.5, -0.4};
  std::vector<double> w{1.0, 0.5, -0.5, 0.2, 0.1, -1.0};
  kernels::ScorerArgs args{proj, u, w, 0.3};
  std::vector<double> as(40), ao(40);
  Matrix hs(40, 6), ho(40, 6);
  kernels::serial::score(args, as, &hs);
  kernels::omp::score(args, ao, &ho);
  EXPECT_EQ(as, ao);
  EXPECT_EQ(hs, ho);
  for (std::size_t p = 0; p < 40; ++p) {
    double ref = 0.3;
    for (std::size_t m = 0; m < 6; ++m) ref += w[m] * std::tanh(proj(p, m) + u[m]);
    EXPECT_NEAR(as[p], ref, 1e-12);
  }
}

TEST(Kernels, PairwiseDistances) {
  auto pts = random_matrix(25, 2, 5);
  auto s = kernels::serial::pairwise_distances(pts);
  auto o = kernels::omp::pairwise_distances(pts);
  EXPECT_EQ(s, o);
  for (std::size_t i = 0; i < 25; ++i) {
    EXPECT_EQ(s(i, i), 0.0);
    for (std::size_t j = 0; j < 25; ++j) {
      EXPECT_EQ(s(i, j), s(j, i));
      EXPECT_NEAR(s(i, j), std::hypot(pts(i, 0) - pts(j, 0), pts(i, 1) - pts(j, 1)), 1e-12);
    }
  }
}

}  // namespace
}  // namespace alttrip
