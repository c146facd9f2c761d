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

// Dense kernels used by the autoencoders, the scorer, and training.
//
// Every kernel has a serial reference in `kernels::serial` and an OpenMP
// version in `kernels::omp`. The OpenMP versions partition output elements
// across threads and keep each element's accumulation order identical to the
// serial loop, so the two produce bit-identical results.

#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <vector>

namespace alttrip {

// Row-major dense matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }

  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }

  void fill(double v) { std::fill(data_.begin(), data_.end(), v); }

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

Matrix identity(std::size_t n);

// Selects between the serial reference and the OpenMP path where a caller
// exposes the choice (training, evaluation).
enum class Execution { kSerial, kParallel };

namespace kernels {

// Output of a pairwise scorer pass: alpha[p] = w . tanh(proj.row(p) + u) + bias
// for every row p of `proj`. `hidden` (optional) receives the tanh activations.
struct ScorerArgs {
  const Matrix& proj;
  std::span<const double> u;
  std::span<const double> w;
  double bias;
};

namespace serial {
// out = a * b
void matmul(const Matrix& a, const Matrix& b, Matrix& out);
// out = a^T * b
void matmul_tn(const Matrix& a, const Matrix& b, Matrix& out);
// out = a * b^T
void matmul_nt(const Matrix& a, const Matrix& b, Matrix& out);
// y += a * x
void gemv_acc(const Matrix& a, std::span<const double> x, std::span<double> y);
void score(const ScorerArgs& args, std::span<double> alpha, Matrix* hidden);
// Euclidean distances between the rows of `points`.
Matrix pairwise_distances(const Matrix& points);
}  // namespace serial

namespace omp {
void matmul(const Matrix& a, const Matrix& b, Matrix& out);
void matmul_tn(const Matrix& a, const Matrix& b, Matrix& out);
void matmul_nt(const Matrix& a, const Matrix& b, Matrix& out);
void gemv_acc(const Matrix& a, std::span<const double> x, std::span<double> y);
void score(const ScorerArgs& args, std::span<double> alpha, Matrix* hidden);
Matrix pairwise_distances(const Matrix& points);
}  // namespace omp

}  // namespace kernels
}  // namespace alttrip
