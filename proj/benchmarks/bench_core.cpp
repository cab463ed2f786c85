#include <blindcd/blindcd.hpp>

#include <benchmark/benchmark.h>

using namespace blindcd;

namespace {

void BM_SampleAdjacency(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const SbmModel model = build_planted_partition(PlantedPartitionParams::from_gamma(n, 0.5));
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(sample_adjacency(model, ++seed));
}
BENCHMARK(BM_SampleAdjacency)->Arg(100)->Arg(1000);

void BM_ApplyFilter(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const SbmModel model = build_planted_partition(PlantedPartitionParams::from_gamma(n, 0.5));
  const LaplacianMatrix lap = laplacian(sample_adjacency(model, 1));
  const GraphFilter filter = lowpass_power_filter(diffusion_step(0.5, n), 5);
  const Eigen::VectorXd x = sample_excitation(n, ExcitationSpec::uniform(), 2);
  for (auto _ : state) benchmark::DoNotOptimize(apply_filter(filter, lap, x));
}
BENCHMARK(BM_ApplyFilter)->Arg(100)->Arg(1000);

void BM_GenerateObservation(benchmark::State& state) {
  const SbmModel model = build_planted_partition(PlantedPartitionParams::from_gamma(100, 0.5));
  const GraphFilter filter = lowpass_power_filter(diffusion_step(0.5, 100), 5);
  const ExcitationSpec spec = ExcitationSpec::uniform();
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(generate_observation(model, filter, spec, ++seed));
}
BENCHMARK(BM_GenerateObservation);

void BM_AccumulatorAdd(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const Eigen::VectorXd y = sample_excitation(n, ExcitationSpec::uniform(), 3);
  CovarianceAccumulator acc(n);
  for (auto _ : state) acc.add(y);
  benchmark::DoNotOptimize(acc.finalize());
}
BENCHMARK(BM_AccumulatorAdd)->Arg(100)->Arg(500);

void BM_TopEigenpairs(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const CConstants c{0.3, 0.1, 1.0};
  const Eigen::MatrixXd cy = theoretical_covariance(c, n).matrix();
  for (auto _ : state) benchmark::DoNotOptimize(top_k_eigenpairs(cy, 3));
}
BENCHMARK(BM_TopEigenpairs)->Arg(100)->Arg(400);

void BM_KMeans(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  Engine eng(4);
  Eigen::MatrixXd points(n, 2);
  for (int i = 0; i < n; ++i) {
    points(i, 0) = (i < n / 2 ? 1.0 : -1.0) + uniform(eng, -0.5, 0.5);
    points(i, 1) = uniform(eng, -0.5, 0.5);
  }
  for (auto _ : state) benchmark::DoNotOptimize(kmeans(points, 2, KMeansConfig{}, 5));
}
BENCHMARK(BM_KMeans)->Arg(100)->Arg(1000);

}  // namespace

BENCHMARK_MAIN();
