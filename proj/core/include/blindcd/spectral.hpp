#pragma once

#include "blindcd/graph_model.hpp"
#include "blindcd/signal_sim.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <span>
#include <vector>

namespace blindcd {

/// Eigenvalues in the requested order (descending for top, ascending for
/// bottom) with orthonormal eigenvector columns. Each vector's
/// largest-magnitude entry is positive (first such entry on ties).
struct EigenPairs {
  Eigen::VectorXd values;
  Eigen::MatrixXd vectors;
  double max_residual = 0.0;         // max_i ||C v_i - lambda_i v_i||
  double orthonormality_error = 0.0; // max |V^T V - I|
};

struct EigenOptions {
  int dense_limit = 512;       // dense self-adjoint solver up to this n
  double tol = 1e-10;          // relative residual target for the iterative path
  int max_iter = 20000;
  double symmetry_tol = 1e-10; // relative to max |C_ij|
  std::uint64_t seed = 0xe16e;
};

enum class SpectrumEnd { top, bottom };

/// k eigenpairs at the top (largest algebraic) or bottom of the spectrum.
EigenPairs extreme_eigenpairs(const Eigen::MatrixXd& c, int k, SpectrumEnd end, const EigenOptions& options = {});

inline EigenPairs top_k_eigenpairs(const Eigen::MatrixXd& c, int k, const EigenOptions& options = {}) {
  return extreme_eigenpairs(c, k, SpectrumEnd::top, options);
}

/// Applies the sign convention in place.
void fix_signs(Eigen::MatrixXd& vectors);

struct KMeansConfig {
  int restarts = 20;
  int max_iter = 300;
  double tol = 1e-9;
  unsigned parallelism = 1;
};

struct ClusterResult {
  std::vector<int> labels;
  Eigen::MatrixXd centroids;  // k x d
  double inertia = 0.0;
  int restarts_used = 0;
  int best_restart = 0;
  int iterations = 0;
  std::uint64_t seed = 0;
};

/// Lloyd's algorithm from k-means++ seeding, best of `restarts` by inertia.
/// Rows of `points` are the observations.
ClusterResult kmeans(const Eigen::MatrixXd& points, int k, const KMeansConfig& config, std::uint64_t seed);

struct PipelineConfig {
  KMeansConfig kmeans;
  EigenOptions eigen;
  bool center = false;          // subtract the sample mean before the outer products
  bool normalize_rows = false;  // unit-normalise rows of the eigenvector matrix
  double min_relative_gap = 1e-3;
};

struct PartitionResult {
  Partition partition;
  Eigen::VectorXd eigenvalues;  // top min(k + 1, n), descending
  double relative_eigengap = 0.0;  // (lambda_k - lambda_{k+1}) / max(|lambda_{k+1}|, eps)
  bool low_confidence = false;
  double eigen_residual = 0.0;
  double inertia = 0.0;
  int restarts_used = 0;
  std::uint64_t seed = 0;
  std::int64_t samples = 0;  // 0 when a covariance was supplied directly
};

/// Spectral partition of the nodes from a covariance matrix: top-k
/// eigenvectors, then k-means on their rows.
PartitionResult blind_partition(const Eigen::MatrixXd& covariance, int k, const PipelineConfig& config,
                                std::uint64_t seed);

/// Same, starting from signals (n x m, one sample per column): the sample
/// second moment is formed first.
PartitionResult blind_partition_from_signals(const Eigen::MatrixXd& signals, int k, const PipelineConfig& config,
                                             std::uint64_t seed);

PartitionResult blind_partition(const ObservationBatch& batch, int k, const PipelineConfig& config,
                                std::uint64_t seed);

/// Number of eigenvalues standing above the bulk: the largest i <= max_k
/// whose relative gap (lambda_i - lambda_{i+1}) / max(lambda_{i+1}, eps) is at
/// least `gap_fraction` times the largest such gap. Returns 1 when there is
/// no gap at all. `values` must be descending.
int estimate_num_groups(std::span<const double> values, int max_k, double gap_fraction = 0.5);

}  // namespace blindcd
