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

#include "alttrip/itrnet.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <numeric>

#include "alttrip/adam.hpp"
#include "alttrip/binary_io.hpp"
#include "alttrip/error.hpp"
#include "alttrip/hash.hpp"
#include "alttrip/rng.hpp"

namespace alttrip {
namespace {

constexpr char kModelMagic[] = "ATITRNET";
constexpr std::uint32_t kModelVersion = 1;

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

void glorot(Matrix& w, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(w.rows() + w.cols()));
  for (double& v : w.values()) v = rng.uniform(-limit, limit);
}

// Column block [first, first + width) of `m`, as its own matrix.
Matrix column_block(const Matrix& m, std::size_t first, std::size_t width) {
  Matrix out(m.rows(), width);
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < width; ++c) out(r, c) = m(r, first + c);
  }
  return out;
}

// Softmax of `alpha` over unmasked entries, written in place. Masked entries
// become exactly 0.
void masked_softmax(std::span<double> alpha, const PoiMask* mask) {
  double hi = -std::numeric_limits<double>::infinity();
  bool any = false;
  for (std::size_t p = 0; p < alpha.size(); ++p) {
    if (mask && mask->masked(static_cast<PoiId>(p))) continue;
    // Overflowed weights; only a diverged model gets here.
    if (!std::isfinite(alpha[p])) fail(Errc::kNonFiniteLoss, "non-finite POI score");
    hi = std::max(hi, alpha[p]);
    any = true;
  }
  if (!any) fail(Errc::kExhaustedCandidates, "every POI is masked");
  double total = 0.0;
  for (std::size_t p = 0; p < alpha.size(); ++p) {
    if (mask && mask->masked(static_cast<PoiId>(p))) {
      alpha[p] = 0.0;
    } else {
      alpha[p] = std::exp(alpha[p] - hi);
      total += alpha[p];
    }
  }
  for (double& a : alpha) a /= total;
}

struct CacheView {
  const Matrix& px_poi;
  const Matrix& px_src;
  const Matrix& px_dst;
  const Matrix& zproj;
};

// One LSTM step. `gates` receives post-activation i, f, g, o.
void lstm_step(const DirectionParams& p, const CacheView& cache, PoiId x, PoiId s, PoiId d,
               std::span<const double> h_prev, std::span<const double> c_prev,
               std::span<double> gates, std::span<double> c_out, std::span<double> h_out) {
  const std::size_t hsz = h_prev.size();
  auto rx = cache.px_poi.row(static_cast<std::size_t>(x));
  auto rs = cache.px_src.row(static_cast<std::size_t>(s));
  auto rd = cache.px_dst.row(static_cast<std::size_t>(d));
  for (std::size_t k = 0; k < 4 * hsz; ++k) gates[k] = rx[k] + rs[k] + rd[k] + p.b[k];
  kernels::serial::gemv_acc(p.w_h, h_prev, gates);
  for (std::size_t k = 0; k < hsz; ++k) {
    const double i = sigmoid(gates[k]);
    const double f = sigmoid(gates[hsz + k]);
    const double g = std::tanh(gates[2 * hsz + k]);
    const double o = sigmoid(gates[3 * hsz + k]);
    gates[k] = i;
    gates[hsz + k] = f;
    gates[2 * hsz + k] = g;
    gates[3 * hsz + k] = o;
    c_out[k] = f * c_prev[k] + i * g;
    h_out[k] = o * std::tanh(c_out[k]);
  }
}

// Scorer pre-activation offset u = A_h h + a_b.
std::vector<double> scorer_offset(const DirectionParams& p, std::span<const double> h) {
  std::vector<double> u(p.a_b);
  kernels::serial::gemv_acc(p.a_h, h, u);
  return u;
}

struct StepRecord {
  PoiId input = 0;
  PoiId target = 0;
  std::vector<double> gates;
  std::vector<double> c;
  std::vector<double> h;
  std::vector<double> probs;
  Matrix hidden;  // N x M scorer activations
};

// Gradient with respect to the cached projections; converted to parameter
// gradients once per batch.
struct DirectionGrad {
  Matrix d_px_poi, d_px_src, d_px_dst;
  Matrix d_w_h;
  std::vector<double> d_b;
  Matrix d_zproj;
  Matrix d_a_h;
  std::vector<double> d_a_b;
  std::vector<double> d_w;
  double d_w_b = 0.0;

  DirectionGrad() = default;
  DirectionGrad(std::size_t n, std::size_t hsz, std::size_t m)
      : d_px_poi(n, 4 * hsz), d_px_src(n, 4 * hsz), d_px_dst(n, 4 * hsz), d_w_h(4 * hsz, hsz),
        d_b(4 * hsz, 0.0), d_zproj(n, m), d_a_h(m, hsz), d_a_b(m, 0.0), d_w(m, 0.0) {}

  void zero() {
    d_px_poi.fill(0.0);
    d_px_src.fill(0.0);
    d_px_dst.fill(0.0);
    d_w_h.fill(0.0);
    std::fill(d_b.begin(), d_b.end(), 0.0);
    d_zproj.fill(0.0);
    d_a_h.fill(0.0);
    std::fill(d_a_b.begin(), d_a_b.end(), 0.0);
    std::fill(d_w.begin(), d_w.end(), 0.0);
    d_w_b = 0.0;
  }

  std::vector<std::span<double>> parts() {
    return {d_px_poi.values(), d_px_src.values(), d_px_dst.values(), d_w_h.values(),
            d_b,               d_zproj.values(),  d_a_h.values(),    d_a_b,
            d_w,               std::span<double>(&d_w_b, 1)};
  }

  void add(DirectionGrad& other) {
    auto mine = parts();
    auto theirs = other.parts();
    for (std::size_t b = 0; b < mine.size(); ++b) {
      for (std::size_t i = 0; i < mine[b].size(); ++i) mine[b][i] += theirs[b][i];
    }
  }
};

// Teacher-forced pass over `seq`: after reading seq[0..j] the model predicts
// seq[j+1]. Returns the summed cross-entropy. Accumulates into `grad` when
// non-null.
double sequence_pass(const DirectionParams& p, const CacheView& cache, std::size_t hsz,
                     std::span<const PoiId> seq, PoiId s, PoiId d, DirectionGrad* grad) {
  if (seq.size() < 2) return 0.0;
  const std::size_t n = cache.zproj.rows();
  const std::size_t m = cache.zproj.cols();
  const std::size_t steps = seq.size() - 1;

  std::vector<StepRecord> rec(steps);
  std::vector<double> h_prev(hsz, 0.0), c_prev(hsz, 0.0);
  double loss = 0.0;
  for (std::size_t j = 0; j < steps; ++j) {
    StepRecord& r = rec[j];
    r.input = seq[j];
    r.target = seq[j + 1];
    r.gates.assign(4 * hsz, 0.0);
    r.c.assign(hsz, 0.0);
    r.h.assign(hsz, 0.0);
    lstm_step(p, cache, r.input, s, d, h_prev, c_prev, r.gates, r.c, r.h);

    const auto u = scorer_offset(p, r.h);
    r.probs.assign(n, 0.0);
    if (grad) r.hidden = Matrix(n, m);
    kernels::serial::score({cache.zproj, u, p.w, p.w_b[0]}, r.probs, grad ? &r.hidden : nullptr);
    masked_softmax(r.probs, nullptr);
    loss -= std::log(std::max(r.probs[static_cast<std::size_t>(r.target)],
                              std::numeric_limits<double>::min()));
    h_prev = r.h;
    c_prev = r.c;
  }
  if (!grad) return loss;

  std::vector<double> dh_next(hsz, 0.0), dc_next(hsz, 0.0);
  std::vector<double> du(m), dh(hsz), da(4 * hsz);
  const std::vector<double> zeros(hsz, 0.0);
  for (std::size_t jj = steps; jj-- > 0;) {
    const StepRecord& r = rec[jj];
    const auto& hp = jj > 0 ? rec[jj - 1].h : zeros;
    const auto& cp = jj > 0 ? rec[jj - 1].c : zeros;

    // Scorer: alpha_p = w . tanh(zproj_p + u) + w_b, dL/dalpha = probs - onehot.
    std::fill(du.begin(), du.end(), 0.0);
    for (std::size_t q = 0; q < n; ++q) {
      const double da_q = r.probs[q] - (static_cast<PoiId>(q) == r.target ? 1.0 : 0.0);
      if (da_q == 0.0) continue;
      grad->d_w_b += da_q;
      auto hid = r.hidden.row(q);
      auto dz = grad->d_zproj.row(q);
      for (std::size_t k = 0; k < m; ++k) {
        grad->d_w[k] += da_q * hid[k];
        const double dq = da_q * p.w[k] * (1.0 - hid[k] * hid[k]);
        dz[k] += dq;
        du[k] += dq;
      }
    }
    for (std::size_t k = 0; k < m; ++k) {
      grad->d_a_b[k] += du[k];
      auto row = grad->d_a_h.row(k);
      for (std::size_t t = 0; t < hsz; ++t) row[t] += du[k] * r.h[t];
    }
    for (std::size_t t = 0; t < hsz; ++t) {
      double acc = dh_next[t];
      for (std::size_t k = 0; k < m; ++k) acc += p.a_h(k, t) * du[k];
      dh[t] = acc;
    }

    // LSTM cell.
    for (std::size_t k = 0; k < hsz; ++k) {
      const double i = r.gates[k];
      const double f = r.gates[hsz + k];
      const double g = r.gates[2 * hsz + k];
      const double o = r.gates[3 * hsz + k];
      const double tc = std::tanh(r.c[k]);
      const double d_o = dh[k] * tc;
      const double dc = dc_next[k] + dh[k] * o * (1.0 - tc * tc);
      da[k] = dc * g * i * (1.0 - i);
      da[hsz + k] = dc * cp[k] * f * (1.0 - f);
      da[2 * hsz + k] = dc * i * (1.0 - g * g);
      da[3 * hsz + k] = d_o * o * (1.0 - o);
      dc_next[k] = dc * f;
    }
    auto rx = grad->d_px_poi.row(static_cast<std::size_t>(r.input));
    auto rs = grad->d_px_src.row(static_cast<std::size_t>(s));
    auto rd = grad->d_px_dst.row(static_cast<std::size_t>(d));
    for (std::size_t k = 0; k < 4 * hsz; ++k) {
      rx[k] += da[k];
      rs[k] += da[k];
      rd[k] += da[k];
      grad->d_b[k] += da[k];
      auto wrow = grad->d_w_h.row(k);
      for (std::size_t t = 0; t < hsz; ++t) wrow[t] += da[k] * hp[t];
    }
    for (std::size_t t = 0; t < hsz; ++t) {
      double acc = 0.0;
      for (std::size_t k = 0; k < 4 * hsz; ++k) acc += p.w_h(k, t) * da[k];
      dh_next[t] = acc;
    }
  }
  return loss;
}

void validate_routes(const std::vector<Route>& routes, int n) {
  for (const auto& r : routes) {
    if (r.size() < 3) fail(Errc::kInvalidArgument, "training routes need at least three POIs");
    for (PoiId p : r) {
      if (p < 0 || p >= n) fail(Errc::kInvalidId, "route references POI " + std::to_string(p));
    }
  }
}

}  // namespace

// Grants the training helpers access to the model's cached projections.
class ItrNetTrainer {
 public:
  static CacheView view(const ItrNetModel& m, Direction dir) {
    const auto& c = dir == Direction::kForward ? m.fwd_cache_ : m.bwd_cache_;
    return {c.px_poi, c.px_src, c.px_dst, c.zproj};
  }
};

namespace {

struct ExampleGrad {
  DirectionGrad fwd, bwd;
  double loss = 0.0;
};

// Summed loss and projection-space gradients over `routes`.
double accumulate(const ItrNetModel& model, std::span<const Route* const> routes,
                  Execution execution, std::vector<ExampleGrad>& scratch, ExampleGrad& total) {
  const std::size_t hsz = static_cast<std::size_t>(model.hidden_size());
  const auto fview = ItrNetTrainer::view(model, Direction::kForward);
  const auto bview = ItrNetTrainer::view(model, Direction::kBackward);
  const auto& fp = model.params(Direction::kForward);
  const auto& bp = model.params(Direction::kBackward);
  const std::size_t n = static_cast<std::size_t>(model.poi_count());
  const std::size_t m = static_cast<std::size_t>(model.mlp_dim());

  if (scratch.size() < routes.size()) scratch.resize(routes.size());
  for (std::size_t e = 0; e < routes.size(); ++e) {
    if (scratch[e].fwd.d_w.size() != m || scratch[e].fwd.d_px_poi.rows() != n) {
      scratch[e].fwd = DirectionGrad(n, hsz, m);
      scratch[e].bwd = DirectionGrad(n, hsz, m);
    }
  }

  auto one = [&](std::size_t e) {
    const Route& r = *routes[e];
    ExampleGrad& g = scratch[e];
    g.fwd.zero();
    g.bwd.zero();
    const PoiId s = r.front();
    const PoiId d = r.back();
    Route rev(r.rbegin(), r.rend());
    g.loss = sequence_pass(fp, fview, hsz, r, s, d, &g.fwd) +
             sequence_pass(bp, bview, hsz, rev, s, d, &g.bwd);
  };

  const auto count = static_cast<std::int64_t>(routes.size());
  if (execution == Execution::kParallel) {
    // Exceptions may not leave a parallel region; keep the first and rethrow.
    std::exception_ptr error;
#pragma omp parallel for schedule(dynamic, 1)
    for (std::int64_t e = 0; e < count; ++e) {
      try {
        one(static_cast<std::size_t>(e));
      } catch (...) {
#pragma omp critical(alttrip_accumulate_error)
        if (!error) error = std::current_exception();
      }
    }
    if (error) std::rethrow_exception(error);
  } else {
    for (std::int64_t e = 0; e < count; ++e) one(static_cast<std::size_t>(e));
  }

  // Fixed-order reduction keeps results independent of the thread count.
  total.fwd = DirectionGrad(n, hsz, m);
  total.bwd = DirectionGrad(n, hsz, m);
  total.loss = 0.0;
  for (std::size_t e = 0; e < routes.size(); ++e) {
    total.fwd.add(scratch[e].fwd);
    total.bwd.add(scratch[e].bwd);
    total.loss += scratch[e].loss;
  }
  return total.loss;
}

// Parameter-space gradient blocks (DirectionParams::blocks() order) from
// projection-space gradients, scaled by `scale`.
std::vector<std::vector<double>> to_param_grads(const ItrNetModel& model, DirectionGrad& g,
                                                double scale) {
  const Matrix& z = model.embeddings().z;
  Matrix gx_poi, gx_src, gx_dst, g_az;
  kernels::omp::matmul_tn(g.d_px_poi, z, gx_poi);
  kernels::omp::matmul_tn(g.d_px_src, z, gx_src);
  kernels::omp::matmul_tn(g.d_px_dst, z, gx_dst);
  kernels::omp::matmul_tn(g.d_zproj, z, g_az);

  const std::size_t rows = gx_poi.rows();
  const std::size_t e = z.cols();
  std::vector<double> w_x(rows * 3 * e);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < e; ++c) {
      w_x[r * 3 * e + c] = gx_poi(r, c);
      w_x[r * 3 * e + e + c] = gx_src(r, c);
      w_x[r * 3 * e + 2 * e + c] = gx_dst(r, c);
    }
  }
  auto copy = [](std::span<const double> v) { return std::vector<double>(v.begin(), v.end()); };
  std::vector<std::vector<double>> out{std::move(w_x), copy(g.d_w_h.values()), copy(g.d_b),
                                       copy(g_az.values()), copy(g.d_a_h.values()),
                                       copy(g.d_a_b), copy(g.d_w),
                                       std::vector<double>{g.d_w_b}};
  for (auto& block : out) {
    for (double& v : block) v *= scale;
  }
  return out;
}

std::size_t step_count(std::span<const Route* const> routes) {
  std::size_t steps = 0;
  for (const Route* r : routes) steps += r->size() - 1;
  return steps;
}

std::vector<const Route*> pointers(const std::vector<Route>& routes) {
  std::vector<const Route*> out;
  out.reserve(routes.size());
  for (const auto& r : routes) out.push_back(&r);
  return out;
}

}  // namespace

int PoiMask::unmasked_count() const {
  return static_cast<int>(std::count(masked_.begin(), masked_.end(), 0));
}

int ProbVector::argmax() const {
  int best = -1;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (probs[i] > 0.0 && (best < 0 || probs[i] > probs[static_cast<std::size_t>(best)])) {
      best = static_cast<int>(i);
    }
  }
  return best;
}

std::uint64_t TrainConfig::fingerprint() const {
  Fnv1a h;
  h.update(static_cast<std::int64_t>(hidden_size));
  h.update(static_cast<std::int64_t>(mlp_dim));
  h.update(learning_rate);
  h.update(static_cast<std::int64_t>(batch_size));
  h.update(static_cast<std::int64_t>(epochs));
  h.update(validation_fraction);
  h.update(static_cast<std::int64_t>(patience));
  h.update(static_cast<std::int64_t>(seed));
  return h.digest();
}

DirectionParams::DirectionParams(int embed_dim, int hidden, int mlp_dim)
    : w_x(4 * static_cast<std::size_t>(hidden), 3 * static_cast<std::size_t>(embed_dim)),
      w_h(4 * static_cast<std::size_t>(hidden), static_cast<std::size_t>(hidden)),
      b(4 * static_cast<std::size_t>(hidden), 0.0),
      a_z(static_cast<std::size_t>(mlp_dim), static_cast<std::size_t>(embed_dim)),
      a_h(static_cast<std::size_t>(mlp_dim), static_cast<std::size_t>(hidden)),
      a_b(static_cast<std::size_t>(mlp_dim), 0.0),
      w(static_cast<std::size_t>(mlp_dim), 0.0),
      w_b(1, 0.0) {}

std::vector<std::span<double>> DirectionParams::blocks() {
  return {w_x.values(), w_h.values(), b, a_z.values(), a_h.values(), a_b, w, w_b};
}

std::vector<std::span<const double>> DirectionParams::blocks() const {
  return {w_x.values(), w_h.values(), b, a_z.values(), a_h.values(), a_b, w, w_b};
}

std::size_t DirectionParams::parameter_count() const {
  std::size_t total = 0;
  for (const auto& blk : blocks()) total += blk.size();
  return total;
}

ItrNetModel::ItrNetModel(EmbeddingTable embeddings, int hidden_size, int mlp_dim,
                         std::uint64_t seed)
    : embeddings_(std::move(embeddings)), hidden_(hidden_size), mlp_dim_(mlp_dim) {
  if (hidden_ <= 0 || mlp_dim_ <= 0) fail(Errc::kInvalidArgument, "hidden sizes must be positive");
  if (embeddings_.size() == 0) fail(Errc::kEmptyCatalog, "embedding table is empty");
  for (double v : embeddings_.z.values()) {
    if (!std::isfinite(v)) fail(Errc::kInvalidArgument, "embedding table has non-finite entries");
  }
  Rng rng(seed);
  for (DirectionParams* p : {&fwd_, &bwd_}) {
    *p = DirectionParams(embeddings_.dim(), hidden_, mlp_dim_);
    glorot(p->w_x, rng);
    glorot(p->w_h, rng);
    glorot(p->a_z, rng);
    glorot(p->a_h, rng);
    const double limit = std::sqrt(6.0 / static_cast<double>(mlp_dim_ + 1));
    for (double& v : p->w) v = rng.uniform(-limit, limit);
    for (int k = 0; k < hidden_; ++k) p->b[static_cast<std::size_t>(hidden_ + k)] = 1.0;
  }
  refresh();
}

const DirectionParams& ItrNetModel::params(Direction dir) const {
  if (dir == Direction::kCombined) fail(Errc::kInvalidArgument, "no parameters for combined");
  return dir == Direction::kForward ? fwd_ : bwd_;
}

DirectionParams& ItrNetModel::mutable_params(Direction dir) {
  if (dir == Direction::kCombined) fail(Errc::kInvalidArgument, "no parameters for combined");
  return dir == Direction::kForward ? fwd_ : bwd_;
}

void ItrNetModel::rebuild_cache(Direction dir) {
  const DirectionParams& p = params(dir);
  Cache& c = dir == Direction::kForward ? fwd_cache_ : bwd_cache_;
  const auto e = static_cast<std::size_t>(embeddings_.dim());
  const Matrix& z = embeddings_.z;
  kernels::omp::matmul_nt(z, column_block(p.w_x, 0, e), c.px_poi);
  kernels::omp::matmul_nt(z, column_block(p.w_x, e, e), c.px_src);
  kernels::omp::matmul_nt(z, column_block(p.w_x, 2 * e, e), c.px_dst);
  kernels::omp::matmul_nt(z, p.a_z, c.zproj);
}

void ItrNetModel::refresh() {
  rebuild_cache(Direction::kForward);
  rebuild_cache(Direction::kBackward);
}

LstmState ItrNetModel::initial_state() const {
  return {std::vector<double>(static_cast<std::size_t>(hidden_), 0.0),
          std::vector<double>(static_cast<std::size_t>(hidden_), 0.0)};
}

void ItrNetModel::check_id(PoiId id) const {
  if (id < 0 || id >= poi_count()) {
    fail(Errc::kInvalidId, "POI id " + std::to_string(id) + " outside [0, " +
                               std::to_string(poi_count()) + ")");
  }
}

LstmState ItrNetModel::advance(Direction dir, const LstmState& state, PoiId poi, PoiId s,
                               PoiId d) const {
  check_id(poi);
  check_id(s);
  check_id(d);
  const auto hsz = static_cast<std::size_t>(hidden_);
  LstmState next{std::vector<double>(hsz), std::vector<double>(hsz)};
  std::vector<double> gates(4 * hsz);
  lstm_step(params(dir), ItrNetTrainer::view(*this, dir), poi, s, d, state.h, state.c, gates,
            next.c, next.h);
  return next;
}

std::vector<double> ItrNetModel::distribution(Direction dir, const LstmState& state,
                                              const PoiMask& mask) const {
  if (mask.size() != poi_count()) fail(Errc::kShapeMismatch, "mask does not match catalog size");
  const DirectionParams& p = params(dir);
  const auto u = scorer_offset(p, state.h);
  std::vector<double> alpha(static_cast<std::size_t>(poi_count()));
  kernels::omp::score({ItrNetTrainer::view(*this, dir).zproj, u, p.w, p.w_b[0]}, alpha, nullptr);
  masked_softmax(alpha, &mask);
  return alpha;
}

ProbVector forward_step_probs(const ItrNetModel& model, std::span<const PoiId> prefix, PoiId s,
                              PoiId d, const PoiMask& mask) {
  if (prefix.empty()) fail(Errc::kEmptyPrefix, "forward prefix is empty");
  LstmState st = model.initial_state();
  for (PoiId p : prefix) st = model.advance(Direction::kForward, st, p, s, d);
  return {model.distribution(Direction::kForward, st, mask), static_cast<int>(prefix.size()),
          Direction::kForward};
}

ProbVector backward_step_probs(const ItrNetModel& model, std::span<const PoiId> reversed_suffix,
                               PoiId s, PoiId d, const PoiMask& mask) {
  if (reversed_suffix.empty()) fail(Errc::kEmptyPrefix, "backward suffix is empty");
  LstmState st = model.initial_state();
  for (PoiId p : reversed_suffix) st = model.advance(Direction::kBackward, st, p, s, d);
  // Position is filled in by callers that know the itinerary length.
  return {model.distribution(Direction::kBackward, st, mask), -1, Direction::kBackward};
}

ProbVector combined_step_probs(const ProbVector& pf, const ProbVector& pb, int t, int length) {
  if (pf.probs.size() != pb.probs.size()) {
    fail(Errc::kShapeMismatch, "forward and backward vectors differ in length");
  }
  if (length < 2 || t < 1 || t > length - 1) {
    fail(Errc::kBadPosition, "position " + std::to_string(t) + " invalid for length " +
                                 std::to_string(length));
  }
  const double beta = static_cast<double>(t) / static_cast<double>(length - 1);
  ProbVector out{std::vector<double>(pf.probs.size()), t, Direction::kCombined};
  double total = 0.0;
  for (std::size_t i = 0; i < out.probs.size(); ++i) {
    out.probs[i] = beta * pf.probs[i] + (1.0 - beta) * pb.probs[i];
    total += out.probs[i];
  }
  if (!(total > 0.0)) fail(Errc::kExhaustedCandidates, "combined distribution has no mass");
  if (std::abs(total - 1.0) > 1e-12) {
    for (double& v : out.probs) v /= total;
  }
  return out;
}

double itrnet_loss(const ItrNetModel& model, const std::vector<Route>& routes) {
  validate_routes(routes, model.poi_count());
  const std::size_t hsz = static_cast<std::size_t>(model.hidden_size());
  const auto fview = ItrNetTrainer::view(model, Direction::kForward);
  const auto bview = ItrNetTrainer::view(model, Direction::kBackward);
  double loss = 0.0;
  std::size_t steps = 0;
  for (const auto& r : routes) {
    Route rev(r.rbegin(), r.rend());
    loss += sequence_pass(model.params(Direction::kForward), fview, hsz, r, r.front(), r.back(),
                          nullptr);
    loss += sequence_pass(model.params(Direction::kBackward), bview, hsz, rev, r.front(),
                          r.back(), nullptr);
    steps += r.size() - 1;
  }
  return steps ? loss / static_cast<double>(steps) : 0.0;
}

std::vector<std::vector<double>> itrnet_gradient(const ItrNetModel& model,
                                                 const std::vector<Route>& routes,
                                                 Execution execution) {
  validate_routes(routes, model.poi_count());
  const auto ptrs = pointers(routes);
  std::vector<ExampleGrad> scratch;
  ExampleGrad total;
  accumulate(model, ptrs, execution, scratch, total);
  const double scale = 1.0 / static_cast<double>(std::max<std::size_t>(1, step_count(ptrs)));
  auto out = to_param_grads(model, total.fwd, scale);
  auto bwd = to_param_grads(model, total.bwd, scale);
  out.insert(out.end(), std::make_move_iterator(bwd.begin()), std::make_move_iterator(bwd.end()));
  return out;
}

ItrNetModel train_itrnet(const std::vector<Route>& routes, const EmbeddingTable& embeddings,
                         const TrainConfig& config, TrainTrace* trace) {
  if (routes.empty()) fail(Errc::kEmptyTrainingSet, "no training routes");
  if (config.hidden_size <= 0 || config.mlp_dim <= 0 || config.batch_size <= 0 ||
      config.epochs < 0 || !(config.learning_rate > 0.0) || config.validation_fraction < 0.0 ||
      config.validation_fraction >= 1.0) {
    fail(Errc::kInvalidArgument, "invalid training configuration");
  }
  validate_routes(routes, embeddings.size());

  ItrNetModel model(embeddings, config.hidden_size, config.mlp_dim, config.seed);
  model.train_config = config;
  model.corpus_hash = routes_fingerprint(routes);
  for (const auto& r : routes) {
    model.max_route_length = std::max(model.max_route_length, static_cast<int>(r.size()));
  }

  Rng rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
  std::vector<std::size_t> order(routes.size());
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(order);
  std::size_t n_val = 0;
  if (routes.size() >= 10) {
    n_val = static_cast<std::size_t>(config.validation_fraction * static_cast<double>(routes.size()));
  }
  std::vector<Route> val;
  std::vector<const Route*> train;
  for (std::size_t i = 0; i < order.size(); ++i) {
    if (i < n_val) {
      val.push_back(routes[order[i]]);
    } else {
      train.push_back(&routes[order[i]]);
    }
  }

  TrainTrace local;
  TrainTrace& tr = trace ? *trace : local;
  tr = TrainTrace{};

  Adam adam(config.learning_rate);
  std::vector<ExampleGrad> scratch;
  ExampleGrad total;
  DirectionParams best_fwd = model.params(Direction::kForward);
  DirectionParams best_bwd = model.params(Direction::kBackward);
  double best = std::numeric_limits<double>::infinity();
  int stale = 0;

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    rng.shuffle(train);
    double epoch_loss = 0.0;
    std::size_t epoch_steps = 0;
    for (std::size_t start = 0; start < train.size();
         start += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t stop =
          std::min(train.size(), start + static_cast<std::size_t>(config.batch_size));
      std::span<const Route* const> batch(train.data() + start, stop - start);
      const double loss = accumulate(model, batch, config.execution, scratch, total);
      const std::size_t steps = step_count(batch);
      if (!std::isfinite(loss)) {
        fail(Errc::kNonFiniteLoss, "training diverged in epoch " + std::to_string(epoch + 1));
      }
      epoch_loss += loss;
      epoch_steps += steps;

      const double scale = 1.0 / static_cast<double>(steps);
      auto gf = to_param_grads(model, total.fwd, scale);
      auto gb = to_param_grads(model, total.bwd, scale);
      std::vector<std::span<double>> params;
      std::vector<std::span<const double>> grads;
      for (auto blk : model.mutable_params(Direction::kForward).blocks()) params.push_back(blk);
      for (auto blk : model.mutable_params(Direction::kBackward).blocks()) params.push_back(blk);
      for (const auto& g : gf) grads.emplace_back(g);
      for (const auto& g : gb) grads.emplace_back(g);
      adam.step(params, grads);
      model.refresh();
    }
    const double train_loss = epoch_loss / static_cast<double>(std::max<std::size_t>(1, epoch_steps));
    tr.train_loss.push_back(train_loss);
    tr.epochs_run = epoch + 1;

    double monitored = train_loss;
    if (!val.empty()) {
      monitored = itrnet_loss(model, val);
      tr.validation_loss.push_back(monitored);
    }
    if (!std::isfinite(monitored)) fail(Errc::kNonFiniteLoss, "validation loss is not finite");
    if (monitored < best) {
      best = monitored;
      best_fwd = model.params(Direction::kForward);
      best_bwd = model.params(Direction::kBackward);
      tr.best_epoch = epoch;
      stale = 0;
    } else if (config.patience > 0 && ++stale >= config.patience) {
      break;
    }
  }

  if (config.epochs > 0) {
    model.mutable_params(Direction::kForward) = std::move(best_fwd);
    model.mutable_params(Direction::kBackward) = std::move(best_bwd);
    model.refresh();
  }
  return model;
}

double route_perplexity(const ItrNetModel& model, std::span<const PoiId> itinerary, PoiId s,
                        PoiId d) {
  if (itinerary.size() < 2) fail(Errc::kInvalidArgument, "itinerary needs at least two POIs");
  if (itinerary.front() != s || itinerary.back() != d) {
    fail(Errc::kInvalidArgument, "itinerary must start at s and end at d");
  }
  PoiMask visited(model.poi_count());
  LstmState st = model.initial_state();
  double total = 0.0;
  for (std::size_t i = 1; i < itinerary.size(); ++i) {
    st = model.advance(Direction::kForward, st, itinerary[i - 1], s, d);
    visited.mask(itinerary[i - 1]);
    if (visited.masked(itinerary[i])) return std::numeric_limits<double>::infinity();
    const auto probs = model.distribution(Direction::kForward, st, visited);
    const double p = probs[static_cast<std::size_t>(itinerary[i])];
    if (!(p > 0.0)) return std::numeric_limits<double>::infinity();
    total -= std::log(p);
  }
  return std::max(total, 0.0);
}

void write_model(BinaryWriter& out, const ItrNetModel& model) {
  const TrainConfig& c = model.train_config;
  out.i64(model.hidden_size());
  out.i64(model.mlp_dim());
  out.i64(c.hidden_size);
  out.i64(c.mlp_dim);
  out.f64(c.learning_rate);
  out.i64(c.batch_size);
  out.i64(c.epochs);
  out.f64(c.validation_fraction);
  out.i64(c.patience);
  out.u64(c.seed);
  out.u64(model.corpus_hash);
  out.i64(model.max_route_length);

  const EmbeddingTable& e = model.embeddings();
  out.u32(static_cast<std::uint32_t>(e.kind));
  out.u64(e.seed);
  out.u64(e.config_hash);
  out.u64(e.catalog_hash);
  out.u64(e.fingerprint());
  out.matrix(e.z);

  for (Direction dir : {Direction::kForward, Direction::kBackward}) {
    for (auto blk : model.params(dir).blocks()) out.doubles(blk);
  }
}

ItrNetModel read_model(BinaryReader& in) {
  const auto hidden = static_cast<int>(in.i64());
  const auto mlp = static_cast<int>(in.i64());
  TrainConfig c;
  c.hidden_size = static_cast<int>(in.i64());
  c.mlp_dim = static_cast<int>(in.i64());
  c.learning_rate = in.f64();
  c.batch_size = static_cast<int>(in.i64());
  c.epochs = static_cast<int>(in.i64());
  c.validation_fraction = in.f64();
  c.patience = static_cast<int>(in.i64());
  c.seed = in.u64();
  const auto corpus = in.u64();
  const auto longest = static_cast<int>(in.i64());

  EmbeddingTable e;
  const auto kind = in.u32();
  if (kind > static_cast<std::uint32_t>(GraphKind::kFused)) fail(Errc::kCorruptFile, "bad kind");
  e.kind = static_cast<GraphKind>(kind);
  e.seed = in.u64();
  e.config_hash = in.u64();
  e.catalog_hash = in.u64();
  const auto emb_hash = in.u64();
  e.z = in.matrix();
  if (e.fingerprint() != emb_hash) {
    fail(Errc::kHashMismatch, "embedded embedding table does not match its recorded hash");
  }
  if (hidden <= 0 || mlp <= 0 || e.size() == 0) fail(Errc::kCorruptFile, "bad model header");

  ItrNetModel model(std::move(e), hidden, mlp, 0);
  for (Direction dir : {Direction::kForward, Direction::kBackward}) {
    for (auto blk : model.mutable_params(dir).blocks()) {
      const auto values = in.doubles();
      if (values.size() != blk.size()) fail(Errc::kCorruptFile, "parameter block size mismatch");
      std::copy(values.begin(), values.end(), blk.begin());
    }
  }
  model.train_config = c;
  model.corpus_hash = corpus;
  model.max_route_length = longest;
  model.refresh();
  return model;
}

void save_model(const ItrNetModel& model, const std::filesystem::path& file) {
  BinaryWriter w(kModelMagic, kModelVersion);
  write_model(w, model);
  w.write_file(file);
}

ItrNetModel load_model(const std::filesystem::path& file) {
  auto r = BinaryReader::from_file(file, kModelMagic, kModelVersion);
  return read_model(r);
}

}  // namespace alttrip
