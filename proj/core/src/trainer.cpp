#include "fiqa/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>
#include <string>

#include <json.hpp>

#include "fiqa/error.hpp"
#include "fiqa/io.hpp"

namespace fiqa {
namespace {

constexpr double kInitialWeightScale = 0.01;

double logistic(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

void require_finite(const HeadGradient& g) {
  if (!std::isfinite(g.bias)) throw NumericError("non-finite bias gradient");
  for (std::size_t i = 0; i < g.weights.size(); ++i) {
    if (!std::isfinite(g.weights[i]))
      throw NumericError("non-finite weight gradient at component " + std::to_string(i));
  }
}

double evaluate_loss(const RegressionHead& head, const std::vector<const EmbeddingRecord*>& records,
                     const std::vector<double>& targets, const std::vector<std::size_t>& subset,
                     double log_epsilon) {
  std::vector<double> y, yhat;
  y.reserve(subset.size());
  yhat.reserve(subset.size());
  for (std::size_t i : subset) {
    y.push_back(targets[i]);
    yhat.push_back(predict(head, records[i]->vector));
  }
  return rmsle_loss(y, yhat, log_epsilon);
}

}  // namespace

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate))
    throw ContractError("learning_rate must be > 0");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw ContractError("momentum must be in [0, 1)");
  if (!(weight_decay >= 0.0) || !std::isfinite(weight_decay))
    throw ContractError("weight_decay must be >= 0");
  if (batch_size < 1) throw ContractError("batch_size must be >= 1");
  if (epochs < 1) throw ContractError("epochs must be >= 1");
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw ContractError("train_fraction must be in (0, 1)");
  if (!(log_epsilon > 0.0) || !std::isfinite(log_epsilon))
    throw ContractError("log_epsilon must be > 0");
}

double predict(const RegressionHead& head, std::span<const double> vector) {
  if (vector.size() != head.weights.size())
    throw ContractError("head dimension " + std::to_string(head.weights.size()) +
                        " does not match vector dimension " + std::to_string(vector.size()));
  double activation = head.bias;
  for (std::size_t i = 0; i < vector.size(); ++i) activation += head.weights[i] * vector[i];
  return logistic(activation);
}

double rmsle_loss(std::span<const double> targets, std::span<const double> predictions,
                  double log_epsilon) {
  if (targets.empty()) throw ContractError("rmsle_loss needs at least one sample");
  if (targets.size() != predictions.size())
    throw ContractError("rmsle_loss length mismatch: " + std::to_string(targets.size()) + " vs " +
                        std::to_string(predictions.size()));
  double sum = 0.0;
  for (std::size_t i = 0; i < targets.size(); ++i) {
    const double y = targets[i];
    const double yhat = predictions[i];
    if (!(y >= 0.0 && y <= 1.0) || !(yhat >= 0.0 && yhat <= 1.0))
      throw ContractError("rmsle_loss values must lie in [0, 1]");
    const double r = std::log(y + log_epsilon) - std::log(yhat + log_epsilon);
    sum += r * r;
  }
  return std::sqrt(sum / static_cast<double>(targets.size()));
}

HeadGradient loss_gradient(const RegressionHead& head, const BatchView& batch, double log_epsilon) {
  const std::size_t n = batch.vectors.size();
  if (n == 0) throw ContractError("loss_gradient needs a non-empty batch");
  if (batch.targets.size() != n) throw ContractError("batch vectors and targets differ in length");

  std::vector<double> yhat(n), residual(n);
  double sum_sq = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    yhat[i] = predict(head, batch.vectors[i]);
    residual[i] = std::log(batch.targets[i] + log_epsilon) - std::log(yhat[i] + log_epsilon);
    sum_sq += residual[i] * residual[i];
  }
  const double loss = std::sqrt(sum_sq / static_cast<double>(n));

  HeadGradient grad{Vector(head.weights.size(), 0.0), 0.0};
  if (loss == 0.0) return grad;

  // dL/dz_i = -r_i * yhat_i (1 - yhat_i) / (yhat_i + eps) / (n L)
  const double scale = -1.0 / (static_cast<double>(n) * loss);
  for (std::size_t i = 0; i < n; ++i) {
    const double dz = scale * residual[i] * yhat[i] * (1.0 - yhat[i]) / (yhat[i] + log_epsilon);
    const auto x = batch.vectors[i];
    for (std::size_t k = 0; k < x.size(); ++k) grad.weights[k] += dz * x[k];
    grad.bias += dz;
  }
  return grad;
}

void sgd_step(RegressionHead& head, Velocity& velocity, const HeadGradient& gradient,
              const TrainConfig& config) {
  const std::size_t dim = head.weights.size();
  if (velocity.weights.size() != dim || gradient.weights.size() != dim)
    throw ContractError("sgd_step dimension mismatch");
  require_finite(gradient);

  const double lr = config.learning_rate;
  const double m = config.momentum;
  for (std::size_t i = 0; i < dim; ++i) {
    velocity.weights[i] =
        m * velocity.weights[i] - lr * (gradient.weights[i] + config.weight_decay * head.weights[i]);
    head.weights[i] += velocity.weights[i];
  }
  velocity.bias = m * velocity.bias - lr * gradient.bias;
  head.bias += velocity.bias;
}

TrainResult train(const std::vector<QualityLabel>& labels, const Dataset& embeddings,
                  const TrainConfig& config) {
  config.validate();
  const std::size_t n = labels.size();
  if (n < 2) throw DataError("training needs at least 2 labelled samples");

  std::vector<const EmbeddingRecord*> records;
  std::vector<double> targets;
  records.reserve(n);
  targets.reserve(n);
  for (const auto& label : labels) {
    const auto* record = embeddings.find(label.key());
    if (!record) throw DataError("label " + to_string(label.key()) + " has no embedding");
    records.push_back(record);
    targets.push_back(label.target);
  }

  std::mt19937_64 rng(config.seed);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::shuffle(order.begin(), order.end(), rng);

  const auto n_train = static_cast<std::size_t>(std::floor(config.train_fraction * static_cast<double>(n)));
  if (n_train == 0) throw DataError("train_fraction leaves no training samples");
  std::vector<std::size_t> train_idx(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
  const std::vector<std::size_t> test_idx(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());

  TrainResult result{RegressionHead::zeros(embeddings.dim()), {}};
  auto& head = result.head;
  std::normal_distribution<double> init(0.0, kInitialWeightScale);
  for (auto& w : head.weights) w = init(rng);
  auto& history = result.history;
  for (std::size_t i : train_idx) history.train_keys.push_back(records[i]->key());
  for (std::size_t i : test_idx) history.test_keys.push_back(records[i]->key());
  history.initial_train_loss = evaluate_loss(head, records, targets, train_idx, config.log_epsilon);
  history.initial_test_loss = evaluate_loss(head, records, targets, test_idx, config.log_epsilon);

  Velocity velocity = Velocity::zeros(embeddings.dim());
  BatchView batch;
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(train_idx.begin(), train_idx.end(), rng);
    for (std::size_t start = 0; start < n_train; start += config.batch_size) {
      const std::size_t stop = std::min(start + config.batch_size, n_train);
      batch.vectors.clear();
      batch.targets.clear();
      for (std::size_t k = start; k < stop; ++k) {
        batch.vectors.emplace_back(records[train_idx[k]]->vector);
        batch.targets.push_back(targets[train_idx[k]]);
      }
      const auto grad = loss_gradient(head, batch, config.log_epsilon);
      try {
        sgd_step(head, velocity, grad, config);
      } catch (const NumericError& e) {
        throw NumericError("training diverged in epoch " + std::to_string(epoch + 1) + ": " +
                           e.what());
      }
    }
    history.train_loss.push_back(evaluate_loss(head, records, targets, train_idx, config.log_epsilon));
    history.test_loss.push_back(evaluate_loss(head, records, targets, test_idx, config.log_epsilon));
  }
  return result;
}

void write_model(std::ostream& out, const RegressionHead& head, const TrainConfig& config) {
  out << "{\"dim\": " << head.weights.size() << ", \"weights\": [";
  for (std::size_t i = 0; i < head.weights.size(); ++i) {
    if (i) out << ", ";
    out << format_real(head.weights[i]);
  }
  out << "], \"bias\": " << format_real(head.bias) << ", \"config\": {"
      << "\"learning_rate\": " << format_real(config.learning_rate)
      << ", \"momentum\": " << format_real(config.momentum)
      << ", \"weight_decay\": " << format_real(config.weight_decay)
      << ", \"batch_size\": " << config.batch_size << ", \"epochs\": " << config.epochs
      << ", \"train_fraction\": " << format_real(config.train_fraction)
      << ", \"log_epsilon\": " << format_real(config.log_epsilon) << "}, \"seed\": " << config.seed
      << "}\n";
}

ModelFile read_model(std::istream& in, const std::string& source) {
  ModelFile model;
  try {
    const auto json = nlohmann::json::parse(in);
    const auto dim = json.at("dim").get<std::size_t>();
    model.head.weights = json.at("weights").get<std::vector<double>>();
    model.head.bias = json.at("bias").get<double>();
    if (dim == 0 || model.head.weights.size() != dim)
      throw DataError(source + ": 'weights' length does not match 'dim'");
    const auto& c = json.at("config");
    model.config.learning_rate = c.at("learning_rate").get<double>();
    model.config.momentum = c.at("momentum").get<double>();
    model.config.weight_decay = c.at("weight_decay").get<double>();
    model.config.batch_size = c.at("batch_size").get<std::size_t>();
    model.config.epochs = c.at("epochs").get<std::size_t>();
    model.config.train_fraction = c.at("train_fraction").get<double>();
    model.config.log_epsilon = c.value("log_epsilon", model.config.log_epsilon);
    model.config.seed = json.at("seed").get<std::uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw DataError(source + ": malformed model file: " + e.what());
  }
  if (!std::isfinite(model.head.bias) ||
      !std::all_of(model.head.weights.begin(), model.head.weights.end(),
                   [](double w) { return std::isfinite(w); }))
    throw DataError(source + ": model parameters must be finite");
  return model;
}

void save_model(const std::filesystem::path& path, const RegressionHead& head,
                const TrainConfig& config) {
  auto out = open_output(path);
  write_model(out, head, config);
  if (!out) throw DataError("failed writing " + path.string());
}

ModelFile load_model(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_model(in, path.string());
}

void write_history(std::ostream& out, const TrainHistory& history) {
  out << "epoch,train_loss,test_loss\n";
  for (std::size_t e = 0; e < history.train_loss.size(); ++e) {
    out << (e + 1) << ',' << format_real(history.train_loss[e]) << ','
        << format_real(history.test_loss[e]) << '\n';
  }
}

void save_history(const std::filesystem::path& path, const TrainHistory& history) {
  auto out = open_output(path);
  write_history(out, history);
  if (!out) throw DataError("failed writing " + path.string());
}

}  // namespace fiqa
