#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include "fiqa/embedding.hpp"
#include "fiqa/labeler.hpp"

namespace fiqa {

/// Sigmoid quality predictor over a fixed embedding: logistic(w.x + b).
struct RegressionHead {
  Vector weights;
  double bias = 0.0;

  static RegressionHead zeros(std::size_t dim) { return {Vector(dim, 0.0), 0.0}; }
};

struct TrainConfig {
  double learning_rate = 0.001;
  double momentum = 0.99;
  double weight_decay = 1e-5;
  std::size_t batch_size = 64;
  std::size_t epochs = 30;
  double train_fraction = 0.7;
  std::uint64_t seed = 0;
  double log_epsilon = 1e-7;

  /// Throws ContractError naming the first field out of range.
  void validate() const;
};

struct TrainHistory {
  std::vector<double> train_loss;  // one entry per epoch, after the epoch
  std::vector<double> test_loss;
  double initial_train_loss = 0.0;  // before the first step
  double initial_test_loss = 0.0;
  std::vector<RecordKey> train_keys;
  std::vector<RecordKey> test_keys;
};

/// Classical momentum state; one slot per parameter.
struct Velocity {
  Vector weights;
  double bias = 0.0;

  static Velocity zeros(std::size_t dim) { return {Vector(dim, 0.0), 0.0}; }
};

struct HeadGradient {
  Vector weights;
  double bias = 0.0;
};

/// Non-owning view of a mini-batch. `vectors[i]` pairs with `targets[i]`.
struct BatchView {
  std::vector<std::span<const double>> vectors;
  std::vector<double> targets;
};

double predict(const RegressionHead& head, std::span<const double> vector);

/// sqrt(mean((log(y + eps) - log(yhat + eps))^2)).
/// Throws ContractError on empty or mismatched input or values outside [0,1];
/// the closed interval admits sigmoid outputs that rounded to 0 or 1.
double rmsle_loss(std::span<const double> targets, std::span<const double> predictions,
                  double log_epsilon = 1e-7);

/// Analytic gradient of rmsle_loss(targets, predict(head, .)) with respect to
/// (weights, bias). Returns zeros when the batch loss is exactly zero.
HeadGradient loss_gradient(const RegressionHead& head, const BatchView& batch,
                           double log_epsilon = 1e-7);

/// v <- momentum*v - lr*(g + weight_decay*w); w <- w + v. The bias follows the
/// same rule without decay. Throws NumericError on a non-finite gradient.
void sgd_step(RegressionHead& head, Velocity& velocity, const HeadGradient& gradient,
              const TrainConfig& config);

struct TrainResult {
  RegressionHead head;
  TrainHistory history;
};

/// Seeded shuffle, floor(train_fraction * n) training samples, per-epoch
/// reshuffle, mini-batch SGD. Weights start from N(0, 0.01^2) draws of the
/// same seeded stream, the bias from 0. Bit-for-bit deterministic for a
/// given config. Throws DataError when a label has no embedding.
TrainResult train(const std::vector<QualityLabel>& labels, const Dataset& embeddings,
                  const TrainConfig& config);

// Model file: {"dim": D, "weights": [...], "bias": b, "config": {...}, "seed": s}
struct ModelFile {
  RegressionHead head;
  TrainConfig config;
};

void write_model(std::ostream& out, const RegressionHead& head, const TrainConfig& config);
ModelFile read_model(std::istream& in, const std::string& source = "<stream>");
void save_model(const std::filesystem::path& path, const RegressionHead& head,
                const TrainConfig& config);
ModelFile load_model(const std::filesystem::path& path);

// CSV: epoch,train_loss,test_loss (epochs numbered from 1)
void write_history(std::ostream& out, const TrainHistory& history);
void save_history(const std::filesystem::path& path, const TrainHistory& history);

}  // namespace fiqa
