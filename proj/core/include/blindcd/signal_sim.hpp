#pragma once

#include "blindcd/filter.hpp"
#include "blindcd/graph_model.hpp"
#include "blindcd/rng.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <optional>
#include <string>

namespace blindcd {

/// Distribution of the i.i.d. zero-mean, bounded excitation entries.
struct ExcitationSpec {
  enum class Kind { uniform, rademacher, custom };

  Kind kind = Kind::uniform;
  double bound = 1.0;          // b for uniform(b); |w_i| bound for custom
  bool unit_variance = false;  // rescale uniform(b) by sqrt(3)/b
  double custom_variance = 1.0;
  std::function<double(Engine&)> draw;  // custom only

  static ExcitationSpec uniform(double b = 1.0, bool unit_variance = false);
  static ExcitationSpec rademacher();
  /// Caller-supplied bounded draw; `variance` is its per-entry variance.
  static ExcitationSpec custom(double bound, double variance, std::function<double(Engine&)> draw);

  /// Per-entry variance sigma^2, so that E[w w^T] = sigma^2 I.
  double variance() const;
  std::string describe() const;
  void validate() const;
};

Eigen::VectorXd sample_excitation(int n, const ExcitationSpec& spec, std::uint64_t seed);

/// Draws a Laplacian for a given per-observation graph seed.
using LaplacianSource = std::function<LaplacianMatrix(std::uint64_t seed)>;

struct Observation {
  Eigen::VectorXd y;
  std::uint64_t graph_seed = 0;
  std::uint64_t excitation_seed = 0;
  std::size_t edge_count = 0;
  std::optional<AdjacencySample> adjacency;  // kept on request
  std::optional<LaplacianMatrix> laplacian;  // kept on request
};

/// y = H(L) w with a fresh graph and a fresh excitation derived from `seed`.
Observation generate_observation(const SbmModel& model, const GraphFilter& filter, const ExcitationSpec& spec,
                                 std::uint64_t seed, bool keep_graph = false);

/// Same as above with the graph drawn by `source`, for fixed or custom graphs.
Observation generate_observation(const LaplacianSource& source, const GraphFilter& filter,
                                 const ExcitationSpec& spec, std::uint64_t seed, bool keep_graph = false);

struct BatchManifest {
  std::uint64_t master_seed = 0;
  std::uint64_t model_hash = 0;
  std::uint64_t filter_hash = 0;
  std::string excitation;
  std::string seed_scheme = "observation l: derive_seed(master, {l}); graph: {0}, excitation: {1}";
  int n = 0;
  int m = 0;
};

/// m observations stored as the columns of an n x m matrix.
class ObservationBatch {
 public:
  ObservationBatch(Eigen::MatrixXd signals, BatchManifest manifest);

  int n() const { return static_cast<int>(signals_.rows()); }
  int m() const { return static_cast<int>(signals_.cols()); }
  const Eigen::MatrixXd& signals() const { return signals_; }
  auto sample(int l) const { return signals_.col(l); }
  const BatchManifest& manifest() const { return manifest_; }

 private:
  Eigen::MatrixXd signals_;
  BatchManifest manifest_;
};

/// Seed of observation l inside a batch.
inline std::uint64_t observation_seed(std::uint64_t master_seed, int l) {
  return derive_seed(master_seed, {static_cast<std::uint64_t>(l)});
}

/// m independent observations; the result does not depend on `parallelism`.
ObservationBatch generate_batch(const SbmModel& model, const GraphFilter& filter, const ExcitationSpec& spec, int m,
                                std::uint64_t master_seed, unsigned parallelism = 1);

}  // namespace blindcd
