#include <benchmark/benchmark.h>

#include <random>

#include "fiqa/distance.hpp"
#include "fiqa/gallery.hpp"
#include "fiqa/labeler.hpp"
#include "fiqa/metrics.hpp"
#include "fiqa/synth.hpp"
#include "fiqa/trainer.hpp"

namespace {

fiqa::SynthData make_data(int subjects, int images, std::size_t dim) {
  fiqa::SynthSpec spec;
  spec.n_subjects = subjects;
  spec.images_per_subject = images;
  spec.dim = dim;
  spec.seed = 3;
  return fiqa::generate(spec);
}

void BM_EuclideanDistance(benchmark::State& state) {
  const auto dim = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n;
  fiqa::Vector a(dim), b(dim);
  for (auto& x : a) x = n(rng);
  for (auto& x : b) x = n(rng);
  for (auto _ : state) benchmark::DoNotOptimize(fiqa::euclidean_distance(a, b));
}
BENCHMARK(BM_EuclideanDistance)->Arg(32)->Arg(128);

void BM_LabelDataset(benchmark::State& state) {
  const auto data = make_data(static_cast<int>(state.range(0)), 10, 128);
  const auto gallery = fiqa::partition(data.dataset);
  for (auto _ : state) benchmark::DoNotOptimize(fiqa::label_dataset(gallery));
}
BENCHMARK(BM_LabelDataset)->Arg(50)->Arg(200)->Unit(benchmark::kMillisecond);

void BM_Curve(benchmark::State& state) {
  const auto data = make_data(50, 10, 32);
  const auto pairs = fiqa::build_pairs(data.dataset);
  const auto grid = fiqa::default_grid(pairs, 512);
  for (auto _ : state) benchmark::DoNotOptimize(fiqa::curve(pairs, grid));
}
BENCHMARK(BM_Curve)->Unit(benchmark::kMillisecond);

void BM_TrainOneEpoch(benchmark::State& state) {
  const auto data = make_data(50, 10, 32);
  const auto labels = fiqa::label_dataset(fiqa::partition(data.dataset)).labels;
  fiqa::TrainConfig config;
  config.epochs = 1;
  for (auto _ : state) benchmark::DoNotOptimize(fiqa::train(labels, data.dataset, config));
}
BENCHMARK(BM_TrainOneEpoch)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
