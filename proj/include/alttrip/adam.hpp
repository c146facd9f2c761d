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

#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace alttrip {

// Adam over a fixed list of parameter blocks. Block i of every step() call
// must refer to the same tensor as block i of the first call.
class Adam {
 public:
  explicit Adam(double learning_rate, double beta1 = 0.9, double beta2 = 0.999,
                double epsilon = 1e-8)
      : lr_(learning_rate), beta1_(beta1), beta2_(beta2), eps_(epsilon) {}

  void step(const std::vector<std::span<double>>& params,
            const std::vector<std::span<const double>>& grads) {
    if (m_.empty()) {
      for (const auto& p : params) {
        m_.emplace_back(p.size(), 0.0);
        v_.emplace_back(p.size(), 0.0);
      }
    }
    ++t_;
    const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    for (std::size_t b = 0; b < params.size(); ++b) {
      auto p = params[b];
      auto g = grads[b];
      auto& m = m_[b];
      auto& v = v_[b];
      for (std::size_t i = 0; i < p.size(); ++i) {
        m[i] = beta1_ * m[i] + (1.0 - beta1_) * g[i];
        v[i] = beta2_ * v[i] + (1.0 - beta2_) * g[i] * g[i];
        p[i] -= lr_ * (m[i] / c1) / (std::sqrt(v[i] / c2) + eps_);
      }
    }
  }

  long steps() const { return t_; }

 private:
  double lr_, beta1_, beta2_, eps_;
  long t_ = 0;
  std::vector<std::vector<double>> m_;
  std::vector<std::vector<double>> v_;
};

}  // namespace alttrip
