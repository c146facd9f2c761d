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

#include "alttrip/kernels.hpp"

#include <cmath>
#include <cstdint>

#include "alttrip/error.hpp"

namespace alttrip {

Matrix identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

namespace kernels {
namespace {

// Below this many multiply-adds a parallel region costs more than it saves.
constexpr std::int64_t kParallelWork = 1 << 14;

void check(bool ok, const char* what) {
  if (!ok) fail(Errc::kShapeMismatch, what);
}

// Row kernels shared by both paths. Each computes complete output rows so
// the accumulation order of every element is fixed.
inline void matmul_row(const Matrix& a, const Matrix& b, Matrix& out, std::size_t i) {
  auto o = out.row(i);
  std::fill(o.begin(), o.end(), 0.0);
  for (std::size_t k = 0; k < a.cols(); ++k) {
    const double aik = a(i, k);
    if (aik == 0.0) continue;
    auto br = b.row(k);
    for (std::size_t j = 0; j < b.cols(); ++j) o[j] += aik * br[j];
  }
}

inline void matmul_tn_row(const Matrix& a, const Matrix& b, Matrix& out, std::size_t i) {
  auto o = out.row(i);
  std::fill(o.begin(), o.end(), 0.0);
  for (std::size_t r = 0; r < a.rows(); ++r) {
    const double ari = a(r, i);
    if (ari == 0.0) continue;
    auto br = b.row(r);
    for (std::size_t j = 0; j < b.cols(); ++j) o[j] += ari * br[j];
  }
}

inline void matmul_nt_row(const Matrix& a, const Matrix& b, Matrix& out, std::size_t i) {
  auto ar = a.row(i);
  for (std::size_t j = 0; j < b.rows(); ++j) {
    auto br = b.row(j);
    double acc = 0.0;
    for (std::size_t k = 0; k < a.cols(); ++k) acc += ar[k] * br[k];
    out(i, j) = acc;
  }
}

inline double score_row(const ScorerArgs& args, std::size_t p, Matrix* hidden) {
  auto pr = args.proj.row(p);
  double acc = args.bias;
  for (std::size_t m = 0; m < pr.size(); ++m) {
    const double h = std::tanh(pr[m] + args.u[m]);
    if (hidden) (*hidden)(p, m) = h;
    acc += args.w[m] * h;
  }
  return acc;
}

inline void distance_row(const Matrix& pts, Matrix& out, std::size_t i) {
  for (std::size_t j = 0; j < pts.rows(); ++j) {
    double acc = 0.0;
    for (std::size_t k = 0; k < pts.cols(); ++k) {
      const double diff = pts(i, k) - pts(j, k);
      acc += diff * diff;
    }
    out(i, j) = std::sqrt(acc);
  }
}

void prepare(Matrix& out, std::size_t rows, std::size_t cols) {
  if (out.rows() != rows || out.cols() != cols) out = Matrix(rows, cols);
}

void check_scorer(const ScorerArgs& args, std::span<double> alpha, const Matrix* hidden) {
  check(args.u.size() == args.proj.cols() && args.w.size() == args.proj.cols(),
        "scorer: width mismatch");
  check(alpha.size() == args.proj.rows(), "scorer: output length mismatch");
  if (hidden) {
    check(hidden->rows() == args.proj.rows() && hidden->cols() == args.proj.cols(),
          "scorer: hidden buffer shape mismatch");
  }
}

}  // namespace

namespace serial {

void matmul(const Matrix& a, const Matrix& b, Matrix& out) {
  check(a.cols() == b.rows(), "matmul: inner dimensions differ");
  prepare(out, a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) matmul_row(a, b, out, i);
}

void matmul_tn(const Matrix& a, const Matrix& b, Matrix& out) {
  check(a.rows() == b.rows(), "matmul_tn: row counts differ");
  prepare(out, a.cols(), b.cols());
  for (std::size_t i = 0; i < a.cols(); ++i) matmul_tn_row(a, b, out, i);
}

void matmul_nt(const Matrix& a, const Matrix& b, Matrix& out) {
  check(a.cols() == b.cols(), "matmul_nt: column counts differ");
  prepare(out, a.rows(), b.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) matmul_nt_row(a, b, out, i);
}

void gemv_acc(const Matrix& a, std::span<const double> x, std::span<double> y) {
  check(a.cols() == x.size() && a.rows() == y.size(), "gemv: shape mismatch");
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto ar = a.row(i);
    double acc = 0.0;
    for (std::size_t k = 0; k < ar.size(); ++k) acc += ar[k] * x[k];
    y[i] += acc;
  }
}

void score(const ScorerArgs& args, std::span<double> alpha, Matrix* hidden) {
  check_scorer(args, alpha, hidden);
  for (std::size_t p = 0; p < args.proj.rows(); ++p) alpha[p] = score_row(args, p, hidden);
}

Matrix pairwise_distances(const Matrix& points) {
  Matrix out(points.rows(), points.rows());
  for (std::size_t i = 0; i < points.rows(); ++i) distance_row(points, out, i);
  return out;
}

}  // namespace serial

namespace omp {

void matmul(const Matrix& a, const Matrix& b, Matrix& out) {
  check(a.cols() == b.rows(), "matmul: inner dimensions differ");
  prepare(out, a.rows(), b.cols());
  const auto n = static_cast<std::int64_t>(a.rows());
  const auto work = n * static_cast<std::int64_t>(a.cols() * b.cols());
#pragma omp parallel for schedule(static) if (work > kParallelWork)
  for (std::int64_t i = 0; i < n; ++i) matmul_row(a, b, out, static_cast<std::size_t>(i));
}

void matmul_tn(const Matrix& a, const Matrix& b, Matrix& out) {
  check(a.rows() == b.rows(), "matmul_tn: row counts differ");
  prepare(out, a.cols(), b.cols());
  const auto n = static_cast<std::int64_t>(a.cols());
  const auto work = n * static_cast<std::int64_t>(a.rows() * b.cols());
#pragma omp parallel for schedule(static) if (work > kParallelWork)
  for (std::int64_t i = 0; i < n; ++i) matmul_tn_row(a, b, out, static_cast<std::size_t>(i));
}

void matmul_nt(const Matrix& a, const Matrix& b, Matrix& out) {
  check(a.cols() == b.cols(), "matmul_nt: column counts differ");
  prepare(out, a.rows(), b.rows());
  const auto n = static_cast<std::int64_t>(a.rows());
  const auto work = n * static_cast<std::int64_t>(b.rows() * a.cols());
#pragma omp parallel for schedule(static) if (work > kParallelWork)
  for (std::int64_t i = 0; i < n; ++i) matmul_nt_row(a, b, out, static_cast<std::size_t>(i));
}

void gemv_acc(const Matrix& a, std::span<const double> x, std::span<double> y) {
  check(a.cols() == x.size() && a.rows() == y.size(), "gemv: shape mismatch");
  const auto n = static_cast<std::int64_t>(a.rows());
  const auto work = n * static_cast<std::int64_t>(a.cols());
#pragma omp parallel for schedule(static) if (work > kParallelWork)
  for (std::int64_t i = 0; i < n; ++i) {
    auto ar = a.row(static_cast<std::size_t>(i));
    double acc = 0.0;
    for (std::size_t k = 0; k < ar.size(); ++k) acc += ar[k] * x[k];
    y[static_cast<std::size_t>(i)] += acc;
  }
}

void score(const ScorerArgs& args, std::span<double> alpha, Matrix* hidden) {
  check_scorer(args, alpha, hidden);
  const auto n = static_cast<std::int64_t>(args.proj.rows());
  const auto work = n * static_cast<std::int64_t>(args.proj.cols()) * 8;
#pragma omp parallel for schedule(static) if (work > kParallelWork)
  for (std::int64_t p = 0; p < n; ++p) {
    alpha[static_cast<std::size_t>(p)] = score_row(args, static_cast<std::size_t>(p), hidden);
  }
}

Matrix pairwise_distances(const Matrix& points) {
  Matrix out(points.rows(), points.rows());
  const auto n = static_cast<std::int64_t>(points.rows());
  const auto work = n * n * static_cast<std::int64_t>(points.cols());
#pragma omp parallel for schedule(static) if (work > kParallelWork)
  for (std::int64_t i = 0; i < n; ++i) distance_row(points, out, static_cast<std::size_t>(i));
  return out;
}

}  // namespace omp
}  // namespace kernels
}  // namespace alttrip
