#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ctgcn/aggregate.hpp"
#include "ctgcn/timeseries.hpp"

namespace ctgcn {

// Symmetric degree-normalized adjacency with self loops: with A~ = A + I and
// D~ its row-sum diagonal, a_hat = D~^-1/2 A~ D~^-1/2.
struct NormalizedAdjacency {
  Matrix a_hat;
  std::uint64_t fingerprint = 0;  // hash of the raw weights it came from
};

NormalizedAdjacency normalize_adjacency(const Matrix& weights);
NormalizedAdjacency normalize_adjacency(const CausalAdjacency& adj);

struct ModelShape {
  int n_nodes = 0;
  int history_len = 0;
  int horizon = 1;
  int kernel_width = 3;
  int channels = 16;
  int hidden = 16;
  int hidden_out = 8;

  void validate() const;
  bool operator==(const ModelShape&) const = default;
};

// Forecaster parameters. The temporal stage is a per-node valid convolution
// (shared across nodes) followed by a mean pool over the remaining positions;
// the graph stage is two normalized-adjacency convolutions with a ReLU
// between; a linear head maps each node's embedding to the horizon.
struct CtgcnModel {
  ModelShape shape;
  Matrix conv_kernel;  // channels x kernel_width
  Vector conv_bias;    // channels
  Matrix w0;           // channels x hidden
  Matrix w1;           // hidden x hidden_out
  Matrix head_w;       // hidden_out x horizon
  Vector head_b;       // horizon

  std::size_t parameter_count() const;
};

// Glorot-uniform weights, zero biases, deterministic in the seed.
CtgcnModel init_model(const ModelShape& shape, std::uint64_t seed);

// Forward pass for one window (n_nodes x history_len), returning the
// n_nodes x horizon forecast.
Matrix ctgcn_forward(const CtgcnModel& model, const NormalizedAdjacency& adj,
                     Eigen::Ref<const Matrix> window);

struct Gradients {
  Matrix conv_kernel;
  Vector conv_bias;
  Matrix w0;
  Matrix w1;
  Matrix head_w;
  Vector head_b;
};

struct LossGrads {
  double loss = 0.0;
  Gradients grads;
};

// Root-mean-square loss over a batch of windows and its exact gradients.
LossGrads loss_and_grads(const CtgcnModel& model, const NormalizedAdjacency& adj,
                         const TimeSeriesDataset& ds,
                         std::span<const Window> windows,
                         const WindowSpec& spec);

double batch_rmse(const CtgcnModel& model, const NormalizedAdjacency& adj,
                  const TimeSeriesDataset& ds, std::span<const Window> windows,
                  const WindowSpec& spec);

struct TrainConfig {
  int epochs = 50;
  int batch_size = 32;
  double learning_rate = 0.05;
  double momentum = 0.0;
  std::uint64_t seed = 0;
  double train_frac = 0.7;
  double val_frac = 0.1;

  void validate() const;
};

struct SplitWindows {
  std::vector<Window> train, val, test;
};

// Chronological split; fractions apply to the window list in order so the
// test windows are always the most recent.
SplitWindows split_windows_chronological(const std::vector<Window>& windows,
                                         const TrainConfig& cfg);

struct EpochStats {
  double train_loss = 0.0;
  double val_loss = 0.0;
};

struct TrainResult {
  CtgcnModel model;  // parameters from the best validation epoch
  std::vector<EpochStats> trace;
  int best_epoch = -1;
  double best_val_loss = 0.0;
  double test_loss = 0.0;
};

// Mini-batch gradient descent with optional momentum. Batch order is a seeded
// shuffle per epoch; the returned model is the best validation snapshot.
TrainResult train_model(const CtgcnModel& init, const NormalizedAdjacency& adj,
                        const TimeSeriesDataset& ds, const WindowSpec& spec,
                        const TrainConfig& cfg);

struct TuneCandidate {
  ModelShape shape;
  TrainConfig config;
};

struct TuneSpace {
  std::vector<double> learning_rates;
  std::vector<int> batch_sizes;
  std::vector<int> channels;
  std::vector<int> hidden;
  std::vector<int> hidden_out;
  std::vector<int> kernel_widths;
};

struct TuneOutcome {
  TuneCandidate best;
  double best_val_loss = 0.0;
  std::vector<std::pair<TuneCandidate, double>> all;
};

// Exhaustive grid search; every candidate trains from the same seed and the
// lowest validation loss wins (first in grid order on ties).
TuneOutcome tune_model(const TuneSpace& space, const ModelShape& base_shape,
                       const TrainConfig& base_cfg,
                       const NormalizedAdjacency& adj,
                       const TimeSeriesDataset& ds, const WindowSpec& spec);

// Versioned checkpoint: shapes, parameters at full precision, normalization
// stats, and the adjacency fingerprint the model was trained against.
struct Checkpoint {
  CtgcnModel model;
  std::uint64_t adjacency_fingerprint = 0;
  NormalizationStats stats;
  WindowSpec window_spec;
};

void save_checkpoint(const Checkpoint& ckpt, const std::string& path);

// Refuses version or shape mismatches and, when expected_fingerprint is
// nonzero, an adjacency fingerprint that differs from it.
Checkpoint load_checkpoint(const std::string& path,
                           std::uint64_t expected_fingerprint = 0);

}  // namespace ctgcn
