#include <blindcd/covariance.hpp>
#include <blindcd/signal_sim.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <set>

using namespace blindcd;

TEST(Excitation, RademacherAlphabet) {
  const Eigen::VectorXd w = sample_excitation(1000, ExcitationSpec::rademacher(), 4);
  for (int i = 0; i < w.size(); ++i) EXPECT_TRUE(w[i] == 1.0 || w[i] == -1.0);
  EXPECT_EQ(w.squaredNorm() / 1000.0, 1.0);
  EXPECT_GT((w.array() > 0).count(), 400);
  EXPECT_GT((w.array() < 0).count(), 400);
}

TEST(Excitation, UniformMomentsAndBounds) {
  for (double b : {1.0, 2.5}) {
    for (bool unit : {false, true}) {
      const ExcitationSpec spec = ExcitationSpec::uniform(b, unit);
      const int n = 200000;
      const Eigen::VectorXd w = sample_excitation(n, spec, 9);
      const double limit = unit ? std::sqrt(3.0) : b;
      EXPECT_LE(w.cwiseAbs().maxCoeff(), limit);
      const double var = spec.variance();
      EXPECT_DOUBLE_EQ(var, unit ? 1.0 : b * b / 3.0);
      // Var(w^2) = E[w^4] - var^2 = (9/5 - 1) var^2 for a centred uniform.
      const double se = std::sqrt(0.8 * var * var / n);
      EXPECT_NEAR(w.squaredNorm() / n, var, 4.0 * se);
      EXPECT_NEAR(w.mean(), 0.0, 4.0 * std::sqrt(var / n));
    }
  }
}

TEST(Excitation, CustomDrawRespectsBound) {
  const auto spec = ExcitationSpec::custom(0.5, 0.25, [](Engine& eng) { return (eng() & 1U) ? 0.5 : -0.5; });
  EXPECT_NO_THROW(sample_excitation(10, spec, 1));
  const auto bad = ExcitationSpec::custom(0.5, 1.0, [](Engine&) { return 0.7; });
  EXPECT_THROW(sample_excitation(10, bad, 1), std::invalid_argument);
  EXPECT_THROW(ExcitationSpec::uniform(0.0), std::invalid_argument);
  EXPECT_THROW(ExcitationSpec::uniform(INFINITY), std::invalid_argument);
}

TEST(GenerateObservation, IdentityFilterReturnsExcitation) {
  const SbmModel m = build_planted_partition(PlantedPartitionParams::from_gamma(20, 0.5));
  const ExcitationSpec spec = ExcitationSpec::uniform();
  const Observation obs = generate_observation(m, GraphFilter::identity(), spec, 42);
  EXPECT_EQ(obs.y, sample_excitation(20, spec, obs.excitation_seed));
}

TEST(GenerateObservation, InjectedLaplacian) {
  const LaplacianSource source = [](std::uint64_t) { return laplacian(AdjacencySample(2, {{0, 1}})); };
  // Custom draw producing w = [1, 0].
  int calls = 0;
  const auto fixed = ExcitationSpec::custom(1.0, 0.5, [&calls](Engine&) { return calls++ == 0 ? 1.0 : 0.0; });
  const Observation obs = generate_observation(source, GraphFilter({1.0, -1.0}), fixed, 3);
  EXPECT_EQ(obs.y, Eigen::VectorXd(Eigen::Vector2d(0.0, 1.0)));
  EXPECT_EQ(obs.edge_count, 1u);
}

TEST(GenerateObservation, OutputBoundedByFilterNorm) {
  const int n = 60;
  const auto params = PlantedPartitionParams::from_gamma(n, 0.5);
  const SbmModel m = build_planted_partition(params);
  const GraphFilter f = lowpass_power_filter(diffusion_step(0.5, n), 5);
  const ExcitationSpec spec = ExcitationSpec::uniform();
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const Observation obs = generate_observation(m, f, spec, seed, true);
    ASSERT_TRUE(obs.laplacian.has_value());
    ASSERT_TRUE(obs.adjacency.has_value());
    const double norm = filter_spectral_norm(f, *obs.laplacian, 1e-12, 100000).value;
    const Eigen::VectorXd w = sample_excitation(n, spec, obs.excitation_seed);
    EXPECT_LE(obs.y.norm(), norm * w.norm() * (1 + 1e-9));
  }
}

TEST(GenerateBatch, SingleSampleMatchesObservation) {
  const SbmModel m = build_planted_partition(PlantedPartitionParams::from_gamma(30, 0.5));
  const GraphFilter f = lowpass_power_filter(0.05, 3);
  const ExcitationSpec spec = ExcitationSpec::uniform();
  const ObservationBatch batch = generate_batch(m, f, spec, 1, 99);
  EXPECT_EQ(Eigen::VectorXd(batch.sample(0)), generate_observation(m, f, spec, observation_seed(99, 0)).y);
  EXPECT_THROW(generate_batch(m, f, spec, 0, 99), std::invalid_argument);
}

TEST(GenerateBatch, IndependentOfParallelism) {
  const SbmModel m = build_planted_partition(PlantedPartitionParams::from_gamma(80, 0.5));
  const GraphFilter f = lowpass_power_filter(diffusion_step(0.5, 80), 5);
  const ExcitationSpec spec = ExcitationSpec::uniform();
  const ObservationBatch serial = generate_batch(m, f, spec, 300, 5, 1);
  const ObservationBatch parallel = generate_batch(m, f, spec, 300, 5, 8);
  ASSERT_EQ(serial.signals().size(), parallel.signals().size());
  EXPECT_EQ(std::memcmp(serial.signals().data(), parallel.signals().data(),
                        sizeof(double) * static_cast<std::size_t>(serial.signals().size())),
            0);
  EXPECT_EQ(serial.manifest().model_hash, m.hash());
  EXPECT_EQ(serial.manifest().filter_hash, f.hash());
  EXPECT_EQ(serial.manifest().n, 80);
  EXPECT_EQ(serial.manifest().m, 300);
}

TEST(GenerateBatch, ManifestReproducesBatch) {
  const SbmModel m = build_planted_partition(PlantedPartitionParams::from_gamma(40, 0.3));
  const GraphFilter f = lowpass_power_filter(0.04, 4);
  const ObservationBatch first = generate_batch(m, f, ExcitationSpec::rademacher(), 50, 1234);
  const ObservationBatch again = generate_batch(m, f, ExcitationSpec::rademacher(), 50, first.manifest().master_seed);
  EXPECT_TRUE(first.signals() == again.signals());
}

TEST(GenerateBatch, FreshSubstreams) {
  std::set<std::uint64_t> seeds;
  for (int l = 0; l < 20000; ++l) {
    const std::uint64_t s = observation_seed(2024, l);
    seeds.insert(derive_seed(s, {0}));
    seeds.insert(derive_seed(s, {1}));
  }
  EXPECT_EQ(seeds.size(), 40000u);

  const SbmModel m = build_planted_partition(PlantedPartitionParams::from_gamma(40, 0.5));
  const auto a = generate_observation(m, GraphFilter::identity(), ExcitationSpec::uniform(), observation_seed(7, 0), true);
  const auto b = generate_observation(m, GraphFilter::identity(), ExcitationSpec::uniform(), observation_seed(7, 1), true);
  EXPECT_NE(a.adjacency->edges(), b.adjacency->edges());
  EXPECT_NE(a.y, b.y);
}

TEST(GenerateBatch, SecondMomentTraceMatchesTheory) {
  // trace of E[y y^T] = sigma^2 n c3 with c3 from exhaustive Monte-Carlo moments.
  const int n = 100;
  const auto params = PlantedPartitionParams::from_gamma(n, 0.5);
  const SbmModel m = build_planted_partition(params);
  const GraphFilter f = lowpass_power_filter(diffusion_step(0.5, n), 5);
  const ExcitationSpec spec = ExcitationSpec::uniform();
  PParamOptions opts;
  opts.trials = 400;
  opts.sampling = TripleSampling::exhaustive;
  opts.seed = 17;
  const CConstants c = c_constants(estimate_p_params(params, f, opts), n);
  const double expected = spec.variance() * n * c.c3;
  const ObservationBatch batch = generate_batch(m, f, spec, 500, 77);
  const double trace = batch.signals().squaredNorm() / 500.0;
  EXPECT_NEAR(trace / expected, 1.0, 0.05);
}
