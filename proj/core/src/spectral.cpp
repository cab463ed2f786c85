#include "blindcd/spectral.hpp"

#include "blindcd/covariance.hpp"
#include "blindcd/errors.hpp"
#include "blindcd/parallel.hpp"
#include "blindcd/rng.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace blindcd {
namespace {

double max_abs(const Eigen::MatrixXd& c) { return c.size() == 0 ? 0.0 : c.cwiseAbs().maxCoeff(); }

void finish_pairs(const Eigen::MatrixXd& c, EigenPairs& pairs) {
  fix_signs(pairs.vectors);
  const Eigen::MatrixXd resid = c * pairs.vectors - pairs.vectors * pairs.values.asDiagonal();
  pairs.max_residual = resid.colwise().norm().maxCoeff();
  const Eigen::Index k = pairs.vectors.cols();
  pairs.orthonormality_error =
      (pairs.vectors.transpose() * pairs.vectors - Eigen::MatrixXd::Identity(k, k)).cwiseAbs().maxCoeff();
}

// Subspace iteration with Rayleigh-Ritz on a shifted PSD operator; used for
// matrices above the dense limit.
EigenPairs subspace_iteration(const Eigen::MatrixXd& c, int k, SpectrumEnd end, const EigenOptions& options) {
  const Eigen::Index n = c.rows();
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double radius = c.row(i).cwiseAbs().sum() - std::abs(c(i, i));
    lo = std::min(lo, c(i, i) - radius);
    hi = std::max(hi, c(i, i) + radius);
  }
  const double scale = std::max({std::abs(lo), std::abs(hi), std::numeric_limits<double>::min()});
  const double sign = end == SpectrumEnd::top ? 1.0 : -1.0;
  const double shift = end == SpectrumEnd::top ? lo : hi;

  const Eigen::Index p = std::min<Eigen::Index>(n, k + 8);
  Engine eng = make_engine(options.seed);
  Eigen::MatrixXd q(n, p);
  for (Eigen::Index j = 0; j < p; ++j)
    for (Eigen::Index i = 0; i < n; ++i) q(i, j) = uniform(eng, -1.0, 1.0);
  q = Eigen::HouseholderQR<Eigen::MatrixXd>(q).householderQ() * Eigen::MatrixXd::Identity(n, p);

  EigenPairs pairs;
  double worst = 0.0;
  for (int it = 0; it < options.max_iter; ++it) {
    Eigen::MatrixXd z = sign * (c * q - shift * q);
    q = Eigen::HouseholderQR<Eigen::MatrixXd>(z).householderQ() * Eigen::MatrixXd::Identity(n, p);
    const Eigen::MatrixXd t = q.transpose() * c * q;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> small(0.5 * (t + t.transpose()));
    const Eigen::MatrixXd ritz = q * small.eigenvectors();
    pairs.values.resize(k);
    pairs.vectors.resize(n, k);
    for (int i = 0; i < k; ++i) {
      const Eigen::Index src = end == SpectrumEnd::top ? p - 1 - i : i;
      pairs.values[i] = small.eigenvalues()[src];
      pairs.vectors.col(i) = ritz.col(src);
    }
    worst = 0.0;
    for (int i = 0; i < k; ++i) {
      worst = std::max(worst, (c * pairs.vectors.col(i) - pairs.values[i] * pairs.vectors.col(i)).norm());
    }
    if (worst <= options.tol * scale) return pairs;
    q = ritz;
  }
  throw NumericalError("eigensolver did not converge: residual " + std::to_string(worst) + " after " +
                       std::to_string(options.max_iter) + " iterations");
}

}  // namespace

void fix_signs(Eigen::MatrixXd& vectors) {
  for (Eigen::Index j = 0; j < vectors.cols(); ++j) {
    Eigen::Index arg = 0;
    double best = -1.0;
    for (Eigen::Index i = 0; i < vectors.rows(); ++i) {
      const double a = std::abs(vectors(i, j));
      if (a > best) {
        best = a;
        arg = i;
      }
    }
    if (vectors.rows() > 0 && vectors(arg, j) < 0.0) vectors.col(j) = -vectors.col(j);
  }
}

EigenPairs extreme_eigenpairs(const Eigen::MatrixXd& c, int k, SpectrumEnd end, const EigenOptions& options) {
  const Eigen::Index n = c.rows();
  if (c.cols() != n || n == 0) throw std::invalid_argument("eigenpairs: matrix must be square and non-empty");
  if (k < 1 || k > n) throw std::invalid_argument("eigenpairs: k = " + std::to_string(k) + " outside [1, n]");
  if (!c.allFinite()) throw NumericalError("eigenpairs: matrix has non-finite entries");
  const double asym = (c - c.transpose()).cwiseAbs().maxCoeff();
  if (asym > options.symmetry_tol * std::max(max_abs(c), 1.0)) {
    throw std::invalid_argument("eigenpairs: matrix is not symmetric (max asymmetry " + std::to_string(asym) + ")");
  }

  EigenPairs pairs;
  if (n <= options.dense_limit) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(c);
    if (solver.info() != Eigen::Success) throw NumericalError("eigenpairs: dense solver failed");
    pairs.values.resize(k);
    pairs.vectors.resize(n, k);
    for (int i = 0; i < k; ++i) {
      const Eigen::Index src = end == SpectrumEnd::top ? n - 1 - i : i;
      pairs.values[i] = solver.eigenvalues()[src];
      pairs.vectors.col(i) = solver.eigenvectors().col(src);
    }
  } else {
    pairs = subspace_iteration(c, k, end, options);
  }
  finish_pairs(c, pairs);
  return pairs;
}

namespace {

struct LloydRun {
  std::vector<int> labels;
  Eigen::MatrixXd centroids;
  double inertia = 0.0;
  int iterations = 0;
};

// Returns the index of the nearest centroid (lowest index on ties) and the
// squared distance.
std::pair<int, double> nearest(const Eigen::MatrixXd& centroids, const Eigen::Ref<const Eigen::RowVectorXd>& x) {
  int best = 0;
  double best_d = (centroids.row(0) - x).squaredNorm();
  for (Eigen::Index c = 1; c < centroids.rows(); ++c) {
    const double d = (centroids.row(c) - x).squaredNorm();
    if (d < best_d) {
      best_d = d;
      best = static_cast<int>(c);
    }
  }
  return {best, best_d};
}

Eigen::MatrixXd plus_plus_seeds(const Eigen::MatrixXd& points, int k, Engine& eng) {
  const Eigen::Index n = points.rows();
  Eigen::MatrixXd centroids(k, points.cols());
  std::vector<bool> chosen(static_cast<std::size_t>(n), false);
  auto take = [&](int c, Eigen::Index idx) {
    centroids.row(c) = points.row(idx);
    chosen[static_cast<std::size_t>(idx)] = true;
  };
  take(0, static_cast<Eigen::Index>(uniform_index(eng, static_cast<std::uint64_t>(n))));
  Eigen::VectorXd d2(n);
  for (Eigen::Index i = 0; i < n; ++i) d2[i] = (points.row(i) - centroids.row(0)).squaredNorm();
  for (int c = 1; c < k; ++c) {
    const double total = d2.sum();
    Eigen::Index pick = -1;
    if (total > 0.0) {
      const double target = uniform01(eng) * total;
      double run = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        run += d2[i];
        if (d2[i] > 0.0 && target < run) {
          pick = i;
          break;
        }
      }
      if (pick < 0) {
        for (Eigen::Index i = n - 1; i >= 0; --i)
          if (d2[i] > 0.0) {
            pick = i;
            break;
          }
      }
    } else {
      // Every point coincides with a chosen centre: pick an unused index.
      std::vector<Eigen::Index> unused;
      for (Eigen::Index i = 0; i < n; ++i)
        if (!chosen[static_cast<std::size_t>(i)]) unused.push_back(i);
      pick = unused[uniform_index(eng, unused.size())];
    }
    take(c, pick);
    for (Eigen::Index i = 0; i < n; ++i) d2[i] = std::min(d2[i], (points.row(i) - centroids.row(c)).squaredNorm());
  }
  return centroids;
}

LloydRun lloyd(const Eigen::MatrixXd& points, int k, const KMeansConfig& config, std::uint64_t seed) {
  const Eigen::Index n = points.rows();
  Engine eng = make_engine(seed);
  LloydRun run;
  run.centroids = plus_plus_seeds(points, k, eng);
  run.labels.assign(static_cast<std::size_t>(n), 0);
  Eigen::VectorXd dist(n);
  [[maybe_unused]] double previous = std::numeric_limits<double>::infinity();

  for (int it = 1; it <= config.max_iter; ++it) {
    run.iterations = it;
    std::vector<int> sizes(static_cast<std::size_t>(k), 0);
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto [c, d] = nearest(run.centroids, points.row(i));
      run.labels[static_cast<std::size_t>(i)] = c;
      dist[i] = d;
      ++sizes[static_cast<std::size_t>(c)];
    }
    // Empty clusters take the point farthest from its centroid among clusters
    // that can spare one (lowest index on ties).
    for (int c = 0; c < k; ++c) {
      if (sizes[static_cast<std::size_t>(c)] > 0) continue;
      Eigen::Index far = -1;
      for (Eigen::Index i = 0; i < n; ++i) {
        if (sizes[static_cast<std::size_t>(run.labels[static_cast<std::size_t>(i)])] < 2) continue;
        if (far < 0 || dist[i] > dist[far]) far = i;
      }
      --sizes[static_cast<std::size_t>(run.labels[static_cast<std::size_t>(far)])];
      run.labels[static_cast<std::size_t>(far)] = c;
      ++sizes[static_cast<std::size_t>(c)];
      run.centroids.row(c) = points.row(far);
      dist[far] = 0.0;
    }
    const double assigned = dist.sum();
    assert(assigned <= previous * (1.0 + 1e-12) + 1e-300 && "k-means inertia increased");

    Eigen::MatrixXd updated = Eigen::MatrixXd::Zero(k, points.cols());
    for (Eigen::Index i = 0; i < n; ++i) updated.row(run.labels[static_cast<std::size_t>(i)]) += points.row(i);
    for (int c = 0; c < k; ++c) updated.row(c) /= static_cast<double>(sizes[static_cast<std::size_t>(c)]);
    const double movement = (updated - run.centroids).rowwise().norm().maxCoeff();
    run.centroids = std::move(updated);
    previous = assigned;
    if (movement <= config.tol) break;
  }
  run.inertia = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    run.inertia += (points.row(i) - run.centroids.row(run.labels[static_cast<std::size_t>(i)])).squaredNorm();
  }
  return run;
}

// Renames clusters in order of first appearance.
std::vector<int> canonical_labels(const std::vector<int>& labels, int k) {
  std::vector<int> rename(static_cast<std::size_t>(k), -1);
  int next = 0;
  std::vector<int> out(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    int& r = rename[static_cast<std::size_t>(labels[i])];
    if (r < 0) r = next++;
    out[i] = r;
  }
  return out;
}

}  // namespace

ClusterResult kmeans(const Eigen::MatrixXd& points, int k, const KMeansConfig& config, std::uint64_t seed) {
  const Eigen::Index n = points.rows();
  if (k < 1) throw std::invalid_argument("kmeans: k must be >= 1");
  if (k > n) throw std::invalid_argument("kmeans: k = " + std::to_string(k) + " exceeds the number of points");
  if (!points.allFinite()) throw std::invalid_argument("kmeans: non-finite coordinates");
  if (config.restarts < 1 || config.max_iter < 1) {
    throw std::invalid_argument("kmeans: restarts and max_iter must be >= 1");
  }

  std::vector<LloydRun> runs(static_cast<std::size_t>(config.restarts));
  parallel_for(runs.size(), config.parallelism, [&](std::size_t r) {
    runs[r] = lloyd(points, k, config, derive_seed(seed, {r}));
  });
  std::size_t best = 0;
  for (std::size_t r = 1; r < runs.size(); ++r)
    if (runs[r].inertia < runs[best].inertia) best = r;

  ClusterResult result;
  result.labels = std::move(runs[best].labels);
  result.centroids = std::move(runs[best].centroids);
  result.inertia = runs[best].inertia;
  result.iterations = runs[best].iterations;
  result.restarts_used = config.restarts;
  result.best_restart = static_cast<int>(best);
  result.seed = seed;
  return result;
}

PartitionResult blind_partition(const Eigen::MatrixXd& covariance, int k, const PipelineConfig& config,
                                std::uint64_t seed) {
  const int n = static_cast<int>(covariance.rows());
  if (k < 2) throw std::invalid_argument("blind_partition: k must be >= 2");
  if (k > n) throw std::invalid_argument("blind_partition: k exceeds the number of nodes");

  const int kk = std::min(k + 1, n);
  const EigenPairs pairs = top_k_eigenpairs(covariance, kk, config.eigen);
  Eigen::MatrixXd rows = pairs.vectors.leftCols(k);
  if (config.normalize_rows) {
    for (Eigen::Index i = 0; i < rows.rows(); ++i) {
      const double norm = rows.row(i).norm();
      if (norm > 0.0) rows.row(i) /= norm;
    }
  }
  const ClusterResult clusters = kmeans(rows, k, config.kmeans, seed);

  PartitionResult result;
  result.partition = Partition(canonical_labels(clusters.labels, k), k);
  result.eigenvalues = pairs.values;
  result.eigen_residual = pairs.max_residual;
  result.inertia = clusters.inertia;
  result.restarts_used = clusters.restarts_used;
  result.seed = seed;
  if (kk > k) {
    const double eps = 1e-12 * std::max(std::abs(pairs.values[0]), std::numeric_limits<double>::min());
    result.relative_eigengap = (pairs.values[k - 1] - pairs.values[k]) / std::max(std::abs(pairs.values[k]), eps);
    result.low_confidence = result.relative_eigengap < config.min_relative_gap;
  }
  return result;
}

PartitionResult blind_partition_from_signals(const Eigen::MatrixXd& signals, int k, const PipelineConfig& config,
                                             std::uint64_t seed) {
  if (signals.cols() < 1) throw std::invalid_argument("blind_partition: need at least one sample (m >= 1)");
  PartitionResult result = blind_partition(sample_covariance(signals, config.center), k, config, seed);
  result.samples = signals.cols();
  return result;
}

PartitionResult blind_partition(const ObservationBatch& batch, int k, const PipelineConfig& config,
                                std::uint64_t seed) {
  return blind_partition_from_signals(batch.signals(), k, config, seed);
}

int estimate_num_groups(std::span<const double> values, int max_k, double gap_fraction) {
  if (values.size() < 2) throw std::invalid_argument("estimate_num_groups: need at least two eigenvalues");
  if (max_k < 1) throw std::invalid_argument("estimate_num_groups: max_k must be >= 1");
  const int limit = std::min<int>(max_k, static_cast<int>(values.size()) - 1);
  const double eps = 1e-12 * std::max(std::abs(values[0]), std::numeric_limits<double>::min());
  std::vector<double> gaps(static_cast<std::size_t>(limit));
  double largest = 0.0;
  for (int i = 0; i < limit; ++i) {
    gaps[i] = (values[i] - values[i + 1]) / std::max(values[i + 1], eps);
    largest = std::max(largest, gaps[i]);
  }
  if (!(largest > 1e-12)) return 1;
  int k_hat = 1;
  for (int i = 0; i < limit; ++i)
    if (gaps[i] >= gap_fraction * largest) k_hat = i + 1;
  return k_hat;
}

}  // namespace blindcd
