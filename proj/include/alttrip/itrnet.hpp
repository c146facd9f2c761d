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

// Source/destination-conditioned next-POI model.
//
// Two independent LSTM encoders read a partial route: the forward one from
// the source onwards, the backward one from the destination towards the
// source. At every step the input is [z(poi) | z(s) | z(d)] taken from the
// frozen POI embedding table. A two-layer perceptron scores each candidate
// POI p from [z(p) | h] and a softmax over the unmasked POIs turns the scores
// into a distribution over the next slot.

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "alttrip/dataset.hpp"
#include "alttrip/kernels.hpp"
#include "alttrip/poigraph.hpp"

namespace alttrip {

enum class Direction { kForward, kBackward, kCombined };

// Set of POIs excluded from a distribution.
class PoiMask {
 public:
  explicit PoiMask(int n = 0) : masked_(static_cast<std::size_t>(n), 0) {}

  void mask(PoiId id) { masked_.at(static_cast<std::size_t>(id)) = 1; }
  void unmask(PoiId id) { masked_.at(static_cast<std::size_t>(id)) = 0; }
  void mask_all(std::span<const PoiId> ids) {
    for (PoiId id : ids) mask(id);
  }
  bool masked(PoiId id) const { return masked_[static_cast<std::size_t>(id)] != 0; }
  int size() const { return static_cast<int>(masked_.size()); }
  int unmasked_count() const;

 private:
  std::vector<char> masked_;
};

struct ProbVector {
  std::vector<double> probs;
  // Number of POIs preceding the predicted slot in the itinerary.
  int position = 0;
  Direction direction = Direction::kForward;

  int argmax() const;
};

struct TrainConfig {
  int hidden_size = 32;
  int mlp_dim = 30;
  double learning_rate = 0.001;
  int batch_size = 32;
  int epochs = 100;
  // Fraction of the training routes held out for early stopping.
  double validation_fraction = 0.1;
  int patience = 10;
  std::uint64_t seed = 1;
  Execution execution = Execution::kParallel;

  std::uint64_t fingerprint() const;
};

struct TrainTrace {
  std::vector<double> train_loss;       // mean per-step loss, one per epoch
  std::vector<double> validation_loss;  // empty when no routes were held out
  int best_epoch = -1;
  int epochs_run = 0;
};

// Weights of one direction: the LSTM (gate order i, f, g, o) and the scorer.
struct DirectionParams {
  Matrix w_x;              // 4H x 3E, input columns [poi | source | destination]
  Matrix w_h;              // 4H x H
  std::vector<double> b;   // 4H
  Matrix a_z;              // M x E, scorer weights on the candidate embedding
  Matrix a_h;              // M x H, scorer weights on the hidden state
  std::vector<double> a_b; // M
  std::vector<double> w;   // M, output layer
  std::vector<double> w_b; // 1, output bias

  DirectionParams() = default;
  DirectionParams(int embed_dim, int hidden, int mlp_dim);

  std::vector<std::span<double>> blocks();
  std::vector<std::span<const double>> blocks() const;
  std::size_t parameter_count() const;
};

struct LstmState {
  std::vector<double> h;
  std::vector<double> c;
};

class ItrNetModel {
 public:
  ItrNetModel() = default;
  // Glorot-initialised weights, zero biases except the forget gate (1).
  ItrNetModel(EmbeddingTable embeddings, int hidden_size, int mlp_dim, std::uint64_t seed);

  int poi_count() const { return embeddings_.size(); }
  int hidden_size() const { return hidden_; }
  int mlp_dim() const { return mlp_dim_; }
  const EmbeddingTable& embeddings() const { return embeddings_; }

  const DirectionParams& params(Direction dir) const;
  // Callers that edit weights must call refresh() before inference.
  DirectionParams& mutable_params(Direction dir);
  void refresh();

  LstmState initial_state() const;
  LstmState advance(Direction dir, const LstmState& state, PoiId poi, PoiId s, PoiId d) const;
  // Softmax over unmasked POIs of the scores for the slot after `state`.
  // Throws ExhaustedCandidates when every POI is masked.
  std::vector<double> distribution(Direction dir, const LstmState& state,
                                   const PoiMask& mask) const;

  void check_id(PoiId id) const;

  // Bookkeeping carried into checkpoints.
  TrainConfig train_config;
  std::uint64_t corpus_hash = 0;
  // Longest training route; the default half-itinerary bound at query time.
  int max_route_length = 0;

 private:
  struct Cache {
    // Input projections per POI: rows are W_x[:, block] z(p).
    Matrix px_poi, px_src, px_dst;  // N x 4H
    Matrix zproj;                   // N x M, rows are A_z z(p)
  };
  void rebuild_cache(Direction dir);

  EmbeddingTable embeddings_;
  int hidden_ = 0;
  int mlp_dim_ = 0;
  DirectionParams fwd_;
  DirectionParams bwd_;
  Cache fwd_cache_;
  Cache bwd_cache_;

  friend class ItrNetTrainer;
};

// Distribution over the POI following `prefix` (source first).
ProbVector forward_step_probs(const ItrNetModel& model, std::span<const PoiId> prefix, PoiId s,
                              PoiId d, const PoiMask& mask);

// Distribution over the POI preceding a suffix given in reverse order
// (destination first).
ProbVector backward_step_probs(const ItrNetModel& model, std::span<const PoiId> reversed_suffix,
                               PoiId s, PoiId d, const PoiMask& mask);

// beta * pf + (1 - beta) * pb with beta = t / (T - 1), where t is the number
// of POIs before the slot and T the itinerary length.
ProbVector combined_step_probs(const ProbVector& pf, const ProbVector& pb, int t, int length);

ItrNetModel train_itrnet(const std::vector<Route>& routes, const EmbeddingTable& embeddings,
                         const TrainConfig& config, TrainTrace* trace = nullptr);

// Negative log-likelihood of positions 2..|I| under the forward model, with
// already-visited POIs masked at every step. +infinity when a step has zero
// probability.
double route_perplexity(const ItrNetModel& model, std::span<const PoiId> itinerary, PoiId s,
                        PoiId d);

// Mean per-step cross-entropy of the model on `routes` (both directions
// summed). Exposed for diagnostics and gradient tests.
double itrnet_loss(const ItrNetModel& model, const std::vector<Route>& routes);

// Gradient of itrnet_loss with respect to every parameter block of both
// directions (forward blocks first), computed by backpropagation.
std::vector<std::vector<double>> itrnet_gradient(const ItrNetModel& model,
                                                 const std::vector<Route>& routes,
                                                 Execution execution);

void save_model(const ItrNetModel& model, const std::filesystem::path& file);
ItrNetModel load_model(const std::filesystem::path& file);

// Serialisation hooks shared with the bundle container.
class BinaryWriter;
class BinaryReader;
void write_model(BinaryWriter& out, const ItrNetModel& model);
ItrNetModel read_model(BinaryReader& in);

}  // namespace alttrip
