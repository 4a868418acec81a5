#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <set>
#include <sstream>

#include "fiqa/error.hpp"
#include "fiqa/synth.hpp"
#include "fiqa/trainer.hpp"
#include "oracles.hpp"

using namespace fiqa;

namespace {

struct RandomBatch {
  RegressionHead head;
  std::vector<std::vector<double>> xs;
  std::vector<double> ys;

  BatchView view() const {
    BatchView b;
    for (const auto& x : xs) b.vectors.emplace_back(x);
    b.targets = ys;
    return b;
  }
};

RandomBatch random_batch(std::mt19937_64& rng, std::size_t n, std::size_t dim) {
  std::uniform_real_distribution<double> target(0.05, 0.95);
  RandomBatch b;
  b.head.weights = oracle::random_vector(rng, dim, 0.3);
  b.head.bias = oracle::random_vector(rng, 1, 0.3)[0];
  for (std::size_t i = 0; i < n; ++i) {
    b.xs.push_back(oracle::random_vector(rng, dim));
    b.ys.push_back(target(rng));
  }
  return b;
}

std::string model_text(const RegressionHead& head, const TrainConfig& config) {
  std::ostringstream out;
  write_model(out, head, config);
  return out.str();
}

std::vector<QualityLabel> labels_for(const Dataset& ds, double target) {
  std::vector<QualityLabel> labels;
  for (const auto& r : ds.records()) {
    QualityLabel l;
    l.subject_id = r.subject_id;
    l.image_id = r.image_id;
    l.target = target;
    labels.push_back(l);
  }
  return labels;
}

}  // namespace

TEST(Predict, MidpointCases) {
  EXPECT_EQ(predict(RegressionHead::zeros(4), Vector{3, -2, 1, 9}), 0.5);
  RegressionHead e1 = RegressionHead::zeros(3);
  e1.weights[0] = 1.0;
  EXPECT_EQ(predict(e1, Vector{0, 0, 0}), 0.5);
}

TEST(Predict, MatchesDirectEvaluation) {
  std::mt19937_64 rng(10);
  RegressionHead head{oracle::random_vector(rng, 8), 0.25};
  const auto x = oracle::random_vector(rng, 8);
  EXPECT_NEAR(predict(head, x), oracle::naive_sigmoid_head(head, x), 1e-12);
}

TEST(Predict, DimensionMismatch) {
  EXPECT_THROW(predict(RegressionHead::zeros(3), Vector{1, 2}), ContractError);
}

TEST(Predict, OutputInOpenIntervalForModerateActivations) {
  std::mt19937_64 rng(31);
  for (int i = 0; i < 1000; ++i) {
    RegressionHead head{oracle::random_vector(rng, 6, 3.0), oracle::random_vector(rng, 1, 3.0)[0]};
    const double y = predict(head, oracle::random_vector(rng, 6));
    ASSERT_GT(y, 0.0);
    ASSERT_LT(y, 1.0);
  }
}

TEST(RmsleLoss, IdentityIsZero) {
  const std::vector<double> y{0.1, 0.5, 0.93};
  EXPECT_EQ(rmsle_loss(y, y), 0.0);
}

TEST(RmsleLoss, SingleSampleLogRatio) {
  const std::vector<double> y{std::exp(-1.0)}, yhat{std::exp(-2.0)};
  EXPECT_NEAR(rmsle_loss(y, yhat, 1e-7), 1.0, 1e-5);
  EXPECT_NEAR(rmsle_loss(y, yhat, 1e-15), 1.0, 1e-12);
  EXPECT_DOUBLE_EQ(rmsle_loss(y, yhat), rmsle_loss(yhat, y));
}

TEST(RmsleLoss, MatchesSummationOracle) {
  std::mt19937_64 rng(64);
  std::uniform_real_distribution<double> u(0.01, 0.99);
  std::vector<double> y(64), yhat(64);
  for (auto& v : y) v = u(rng);
  for (auto& v : yhat) v = u(rng);
  double s = 0.0;
  for (int i = 0; i < 64; ++i) s += std::pow(std::log(y[i] + 1e-7) - std::log(yhat[i] + 1e-7), 2);
  EXPECT_NEAR(rmsle_loss(y, yhat, 1e-7), std::sqrt(s / 64), 1e-12);
}

TEST(RmsleLoss, RejectsBadInput) {
  EXPECT_THROW(rmsle_loss(std::vector<double>{}, std::vector<double>{}), ContractError);
  EXPECT_THROW(rmsle_loss(std::vector<double>{0.5}, std::vector<double>{0.5, 0.2}), ContractError);
  EXPECT_THROW(rmsle_loss(std::vector<double>{1.5}, std::vector<double>{0.5}), ContractError);
}

TEST(LossGradient, ZeroAtExactFit) {
  const RegressionHead head{{0.3, -0.7}, 0.1};
  const Vector x1{1.0, 2.0}, x2{-0.5, 0.25};
  BatchView b;
  b.vectors = {x1, x2};
  b.targets = {predict(head, x1), predict(head, x2)};
  const auto g = loss_gradient(head, b);
  EXPECT_EQ(g.bias, 0.0);
  for (double w : g.weights) EXPECT_EQ(w, 0.0);
}

TEST(LossGradient, MatchesCentralDifferences) {
  std::mt19937_64 rng(1234);
  for (int trial = 0; trial < 100; ++trial) {
    const auto b = random_batch(rng, 8, 8);
    const auto g = loss_gradient(b.head, b.view(), 1e-7);
    const auto fd = oracle::fd_head_gradient(b.head, b.xs, b.ys, 1e-7);
    for (std::size_t k = 0; k < 8; ++k) ASSERT_LE(oracle::rel_error(g.weights[k], fd[k]), 1e-4) << k;
    ASSERT_LE(oracle::rel_error(g.bias, fd[8]), 1e-4);
  }
}

TEST(LossGradient, SingleSampleBiasSign) {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 50; ++trial) {
    const auto b = random_batch(rng, 1, 4);
    const double yhat = predict(b.head, b.xs[0]);
    const double expected = std::log(yhat + 1e-7) - std::log(b.ys[0] + 1e-7);
    const auto g = loss_gradient(b.head, b.view());
    ASSERT_EQ(std::signbit(g.bias), std::signbit(expected));
    ASSERT_NE(g.bias, 0.0);
  }
}

TEST(LossGradient, RejectsEmptyAndMismatched) {
  BatchView empty;
  EXPECT_THROW(loss_gradient(RegressionHead::zeros(2), empty), ContractError);
  const Vector x{1.0, 2.0};
  BatchView mismatched;
  mismatched.vectors = {x};
  EXPECT_THROW(loss_gradient(RegressionHead::zeros(2), mismatched), ContractError);
}

TEST(SgdStep, ZeroGradientFixedPoint) {
  TrainConfig config;
  config.weight_decay = 0.0;
  RegressionHead head{{0.5, -1.5}, 0.25};
  const auto before = head;
  Velocity v = Velocity::zeros(2);
  sgd_step(head, v, HeadGradient{{0.0, 0.0}, 0.0}, config);
  EXPECT_EQ(head.weights, before.weights);
  EXPECT_EQ(head.bias, before.bias);
}

TEST(SgdStep, FirstStepClosedForm) {
  TrainConfig config;
  config.learning_rate = 0.1;
  config.weight_decay = 0.01;
  RegressionHead head{{2.0, -4.0}, 1.0};
  Velocity v = Velocity::zeros(2);
  const HeadGradient g{{0.5, 0.25}, -2.0};
  sgd_step(head, v, g, config);
  EXPECT_DOUBLE_EQ(head.weights[0], 2.0 - 0.1 * (0.5 + 0.01 * 2.0));
  EXPECT_DOUBLE_EQ(head.weights[1], -4.0 - 0.1 * (0.25 + 0.01 * -4.0));
  EXPECT_DOUBLE_EQ(head.bias, 1.0 - 0.1 * -2.0);  // no decay on the bias
}

TEST(SgdStep, TwoStepMomentumRecursion) {
  TrainConfig config;
  config.learning_rate = 0.01;
  config.momentum = 0.9;
  config.weight_decay = 0.0;
  RegressionHead head{{1.0}, 0.0};
  Velocity v = Velocity::zeros(1);
  const HeadGradient g{{3.0}, 3.0};
  sgd_step(head, v, g, config);
  const double after_one = head.weights[0];
  sgd_step(head, v, g, config);
  EXPECT_NEAR(head.weights[0] - after_one, -0.01 * 3.0 * (1.0 + 0.9), 1e-15);
  EXPECT_NEAR(head.weights[0] - 1.0, -0.01 * 3.0 * (1.0 + (1.0 + 0.9)), 1e-15);
  EXPECT_NEAR(head.bias, -0.01 * 3.0 * (1.0 + (1.0 + 0.9)), 1e-15);
}

TEST(SgdStep, WeightDecayAloneShrinksNorm) {
  TrainConfig config;
  config.learning_rate = 0.05;
  config.momentum = 0.0;
  config.weight_decay = 0.1;
  std::mt19937_64 rng(5);
  RegressionHead head{oracle::random_vector(rng, 6), 0.0};
  Velocity v = Velocity::zeros(6);
  auto norm = [&] {
    double s = 0.0;
    for (double w : head.weights) s += w * w;
    return std::sqrt(s);
  };
  double previous = norm();
  for (int step = 0; step < 50; ++step) {
    sgd_step(head, v, HeadGradient{Vector(6, 0.0), 0.0}, config);
    const double now = norm();
    ASSERT_LT(now, previous) << "step " << step;
    previous = now;
  }
}

TEST(SgdStep, NonFiniteGradientAborts) {
  TrainConfig config;
  RegressionHead head = RegressionHead::zeros(2);
  Velocity v = Velocity::zeros(2);
  EXPECT_THROW(sgd_step(head, v, HeadGradient{{NAN, 0.0}, 0.0}, config), NumericError);
  EXPECT_THROW(sgd_step(head, v, HeadGradient{{0.0, 0.0}, INFINITY}, config), NumericError);
  EXPECT_THROW(sgd_step(head, v, HeadGradient{{0.0}, 0.0}, config), ContractError);
}

TEST(TrainConfig, DefaultsAndValidation) {
  TrainConfig c;
  EXPECT_EQ(c.learning_rate, 0.001);
  EXPECT_EQ(c.momentum, 0.99);
  EXPECT_EQ(c.weight_decay, 1e-5);
  EXPECT_EQ(c.batch_size, 64u);
  EXPECT_EQ(c.epochs, 30u);
  EXPECT_EQ(c.train_fraction, 0.7);
  EXPECT_EQ(c.log_epsilon, 1e-7);
  EXPECT_NO_THROW(c.validate());

  auto invalid = [](auto mutate) {
    TrainConfig bad;
    mutate(bad);
    EXPECT_THROW(bad.validate(), ContractError);
  };
  invalid([](TrainConfig& b) { b.epochs = 0; });
  invalid([](TrainConfig& b) { b.batch_size = 0; });
  invalid([](TrainConfig& b) { b.learning_rate = 0.0; });
  invalid([](TrainConfig& b) { b.momentum = 1.0; });
  invalid([](TrainConfig& b) { b.momentum = -0.1; });
  invalid([](TrainConfig& b) { b.weight_decay = -1e-5; });
  invalid([](TrainConfig& b) { b.train_fraction = 1.0; });
  invalid([](TrainConfig& b) { b.train_fraction = 0.0; });
  invalid([](TrainConfig& b) { b.log_epsilon = 0.0; });
}

TEST(Train, ConstantTargetsDriftTowardZeroHead) {
  SynthSpec spec;
  spec.n_subjects = 10;
  spec.images_per_subject = 10;
  spec.dim = 8;
  spec.noise_low = 0.1;
  spec.noise_high = 0.5;
  spec.seed = 3;
  const auto ds = generate(spec).dataset;
  TrainConfig config;
  config.seed = 17;
  const auto result = train(labels_for(ds, 0.5), ds, config);
  ASSERT_EQ(result.history.train_loss.size(), 30u);
  ASSERT_EQ(result.history.test_loss.size(), 30u);
  EXPECT_LT(result.history.train_loss.back(), result.history.initial_train_loss);
}

TEST(Train, SplitSizesAndKeys) {
  SynthSpec spec;
  spec.n_subjects = 3;
  spec.images_per_subject = 7;
  spec.dim = 4;
  spec.noise_high = 0.3;
  const auto ds = generate(spec).dataset;  // 21 records
  TrainConfig config;
  config.epochs = 1;
  const auto result = train(labels_for(ds, 0.7), ds, config);
  EXPECT_EQ(result.history.train_keys.size(), 14u);  // floor(0.7 * 21)
  EXPECT_EQ(result.history.test_keys.size(), 7u);
  std::set<RecordKey> all(result.history.train_keys.begin(), result.history.train_keys.end());
  all.insert(result.history.test_keys.begin(), result.history.test_keys.end());
  EXPECT_EQ(all.size(), 21u);
}

TEST(Train, DeterministicAndSeedSensitive) {
  SynthSpec spec;
  spec.n_subjects = 6;
  spec.images_per_subject = 6;
  spec.dim = 5;
  spec.noise_low = 0.05;
  spec.noise_high = 0.6;
  const auto ds = generate(spec).dataset;
  const auto labels = label_dataset(partition(ds)).labels;
  TrainConfig config;
  config.seed = 5;
  const auto a = train(labels, ds, config);
  const auto b = train(labels, ds, config);
  EXPECT_EQ(model_text(a.head, config), model_text(b.head, config));
  EXPECT_EQ(a.history.train_loss, b.history.train_loss);
  EXPECT_EQ(a.history.test_loss, b.history.test_loss);
  config.seed = 6;
  const auto c = train(labels, ds, config);
  EXPECT_NE(model_text(a.head, config), model_text(c.head, config));
}

TEST(Train, Errors) {
  Dataset ds(2);
  ds.add({"a", "1", {0.0, 1.0}});
  ds.add({"a", "2", {1.0, 0.0}});
  auto labels = labels_for(ds, 0.6);
  TrainConfig config;
  config.epochs = 0;
  EXPECT_THROW(train(labels, ds, config), ContractError);
  config.epochs = 2;
  labels.push_back({"ghost", "x", 0, 0, 0, 0, 0.5});
  try {
    train(labels, ds, config);
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("ghost"), std::string::npos);
  }
  EXPECT_THROW(train({labels.front()}, ds, config), DataError);
}

TEST(ModelFile, RoundTripIsExact) {
  std::mt19937_64 rng(2);
  RegressionHead head{oracle::random_vector(rng, 7), -0.1234567890123456789};
  TrainConfig config;
  config.seed = 99;
  std::stringstream buf;
  write_model(buf, head, config);
  const auto model = read_model(buf);
  EXPECT_EQ(model.head.weights, head.weights);
  EXPECT_EQ(model.head.bias, head.bias);
  EXPECT_EQ(model.config.learning_rate, 0.001);
  EXPECT_EQ(model.config.momentum, 0.99);
  EXPECT_EQ(model.config.weight_decay, 1e-5);
  EXPECT_EQ(model.config.batch_size, 64u);
  EXPECT_EQ(model.config.epochs, 30u);
  EXPECT_EQ(model.config.train_fraction, 0.7);
  EXPECT_EQ(model.config.seed, 99u);
}

TEST(ModelFile, RejectsInconsistentDim) {
  std::istringstream in(
      R"({"dim": 3, "weights": [1, 2], "bias": 0, "config": {"learning_rate": 0.1, "momentum": 0,
          "weight_decay": 0, "batch_size": 1, "epochs": 1, "train_fraction": 0.5}, "seed": 0})");
  EXPECT_THROW(read_model(in), DataError);
}

TEST(History, CsvLayout) {
  TrainHistory h;
  h.train_loss = {0.5, 0.25};
  h.test_loss = {0.75, 0.125};
  std::ostringstream out;
  write_history(out, h);
  EXPECT_EQ(out.str(), "epoch,train_loss,test_loss\n1,0.5,0.75\n2,0.25,0.125\n");
}
