#include "blindcd/signal_sim.hpp"

#include "blindcd/parallel.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace blindcd {

ExcitationSpec ExcitationSpec::uniform(double b, bool unit_variance) {
  ExcitationSpec s;
  s.kind = Kind::uniform;
  s.bound = b;
  s.unit_variance = unit_variance;
  s.validate();
  return s;
}

ExcitationSpec ExcitationSpec::rademacher() {
  ExcitationSpec s;
  s.kind = Kind::rademacher;
  s.bound = 1.0;
  return s;
}

ExcitationSpec ExcitationSpec::custom(double bound, double variance, std::function<double(Engine&)> draw) {
  ExcitationSpec s;
  s.kind = Kind::custom;
  s.bound = bound;
  s.custom_variance = variance;
  s.draw = std::move(draw);
  s.validate();
  return s;
}

void ExcitationSpec::validate() const {
  if (!(std::isfinite(bound) && bound > 0.0)) {
    throw std::invalid_argument("excitation: bound must be finite and positive");
  }
  if (kind == Kind::custom) {
    if (!draw) throw std::invalid_argument("excitation: custom kind requires a draw function");
    if (!(custom_variance >= 0.0)) throw std::invalid_argument("excitation: variance must be >= 0");
  }
}

double ExcitationSpec::variance() const {
  switch (kind) {
    case Kind::uniform:
      return unit_variance ? 1.0 : bound * bound / 3.0;
    case Kind::rademacher:
      return 1.0;
    case Kind::custom:
      return custom_variance;
  }
  return 0.0;
}

std::string ExcitationSpec::describe() const {
  std::ostringstream os;
  switch (kind) {
    case Kind::uniform:
      os << "uniform(" << bound << ")" << (unit_variance ? " unit_variance" : "");
      break;
    case Kind::rademacher:
      os << "rademacher";
      break;
    case Kind::custom:
      os << "custom(bound=" << bound << ", variance=" << custom_variance << ")";
      break;
  }
  return os.str();
}

Eigen::VectorXd sample_excitation(int n, const ExcitationSpec& spec, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("sample_excitation: n must be >= 1");
  spec.validate();
  Engine eng = make_engine(seed);
  Eigen::VectorXd w(n);
  switch (spec.kind) {
    case ExcitationSpec::Kind::uniform: {
      const double scale = spec.unit_variance ? std::sqrt(3.0) / spec.bound : 1.0;
      for (int i = 0; i < n; ++i) w[i] = scale * uniform(eng, -spec.bound, spec.bound);
      break;
    }
    case ExcitationSpec::Kind::rademacher:
      for (int i = 0; i < n; ++i) w[i] = (eng() >> 63) ? 1.0 : -1.0;
      break;
    case ExcitationSpec::Kind::custom:
      for (int i = 0; i < n; ++i) {
        w[i] = spec.draw(eng);
        if (!(std::abs(w[i]) <= spec.bound)) {
          throw std::invalid_argument("sample_excitation: custom draw exceeded its bound");
        }
      }
      break;
  }
  return w;
}

Observation generate_observation(const LaplacianSource& source, const GraphFilter& filter,
                                 const ExcitationSpec& spec, std::uint64_t seed, bool keep_graph) {
  Observation obs;
  obs.graph_seed = derive_seed(seed, {0});
  obs.excitation_seed = derive_seed(seed, {1});
  LaplacianMatrix l = source(obs.graph_seed);
  const Eigen::VectorXd w = sample_excitation(l.n(), spec, obs.excitation_seed);
  obs.y = apply_filter(filter, l, w);
  obs.edge_count = (l.nonzeros() - static_cast<std::size_t>(l.n())) / 2;
  if (keep_graph) obs.laplacian = std::move(l);
  return obs;
}

Observation generate_observation(const SbmModel& model, const GraphFilter& filter, const ExcitationSpec& spec,
                                 std::uint64_t seed, bool keep_graph) {
  std::optional<AdjacencySample> adj;
  auto source = [&](std::uint64_t graph_seed) {
    adj.emplace(sample_adjacency(model, graph_seed));
    return laplacian(*adj);
  };
  Observation obs = generate_observation(source, filter, spec, seed, keep_graph);
  obs.edge_count = adj->edge_count();
  if (keep_graph) obs.adjacency = std::move(adj);
  return obs;
}

ObservationBatch::ObservationBatch(Eigen::MatrixXd signals, BatchManifest manifest)
    : signals_(std::move(signals)), manifest_(std::move(manifest)) {
  manifest_.n = static_cast<int>(signals_.rows());
  manifest_.m = static_cast<int>(signals_.cols());
}

ObservationBatch generate_batch(const SbmModel& model, const GraphFilter& filter, const ExcitationSpec& spec, int m,
                                std::uint64_t master_seed, unsigned parallelism) {
  if (m < 1) throw std::invalid_argument("generate_batch: m must be >= 1");
  spec.validate();
  Eigen::MatrixXd signals(model.n(), m);
  parallel_for(static_cast<std::size_t>(m), parallelism, [&](std::size_t l) {
    const auto li = static_cast<int>(l);
    signals.col(li) = generate_observation(model, filter, spec, observation_seed(master_seed, li)).y;
  });
  BatchManifest manifest;
  manifest.master_seed = master_seed;
  manifest.model_hash = model.hash();
  manifest.filter_hash = filter.hash();
  manifest.excitation = spec.describe();
  return ObservationBatch(std::move(signals), std::move(manifest));
}

}  // namespace blindcd
