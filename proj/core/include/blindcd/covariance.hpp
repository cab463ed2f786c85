#pragma once

#include "blindcd/filter.hpp"
#include "blindcd/graph_model.hpp"
#include "blindcd/signal_sim.hpp"

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <vector>

namespace blindcd {

/// Mergeable accumulator of the uncentered second moment (1/m) sum y y^T.
///
/// Samples are buffered in blocks and each full block is folded into a
/// binary-counter stack of partial sums, so the summation follows a fixed
/// pairwise tree. Only the lower triangle of each partial sum is maintained.
class CovarianceAccumulator {
 public:
  explicit CovarianceAccumulator(int n, int block_size = 32);

  int n() const { return n_; }
  std::int64_t count() const { return count_; }

  void add(const Eigen::Ref<const Eigen::VectorXd>& y);
  /// Adds every column of `samples` in column order.
  void add_columns(const Eigen::Ref<const Eigen::MatrixXd>& samples);
  void merge(const CovarianceAccumulator& other);

  /// Full symmetric (1/m) sum y y^T; with `center`, subtracts the outer
  /// product of the sample mean.
  Eigen::MatrixXd finalize(bool center = false) const;
  Eigen::VectorXd mean() const;

 private:
  struct Node {
    std::int64_t count = 0;
    Eigen::MatrixXd outer;  // lower triangle valid
    Eigen::VectorXd sum;
  };

  void push(Node node);
  Node flush_buffer() const;
  Node total() const;

  int n_;
  int block_size_;
  std::int64_t count_ = 0;
  std::vector<Node> stack_;
  Eigen::MatrixXd buffer_;
  int buffered_ = 0;
};

/// Convenience: accumulate every sample of a batch and finalize.
Eigen::MatrixXd sample_covariance(const Eigen::MatrixXd& signals, bool center = false);

/// Moments of the random filter matrix H = H(L) under the planted partition
/// model, indexed p[0]..p[7] for p1..p8:
///   p1 E[H_ii^2]              p2 E[H_ij^2], i~j
///   p3 E[H_ij^2], i!~j        p4 E[H_il H_jl], i~j~l distinct
///   p5 E[H_ii H_ji], i~j      p6 E[H_il H_jl], i~j, l!~i
///   p7 E[H_ii H_ji], i!~j     p8 E[H_il H_jl], i!~j, l not in {i,j}
struct PParams {
  std::array<double, 8> value{};
  std::array<double, 8> stderr_{};
  int trials = 0;
  /// trials x 8 matrix of per-trial estimates (kept for derived errors).
  Eigen::MatrixXd per_trial;

  double p(int index) const { return value[static_cast<std::size_t>(index - 1)]; }
};

enum class TripleSampling {
  representative,  // one fixed index tuple per pattern
  random,          // the fixed tuple plus random pattern-respecting tuples
  exhaustive       // every pattern-respecting tuple (O(n^3) per trial)
};

struct PParamOptions {
  int trials = 1000;
  std::uint64_t seed = 1;
  TripleSampling sampling = TripleSampling::random;
  int random_tuples = 16;
  int max_n = 512;
  unsigned parallelism = 1;
};

PParams estimate_p_params(const PlantedPartitionParams& params, const GraphFilter& filter,
                          const PParamOptions& options);

/// Per-trial moments of a single dense filter matrix (planted partition with
/// two contiguous blocks); building block of estimate_p_params.
std::array<double, 8> p_moments_of(const Eigen::MatrixXd& h, TripleSampling sampling, int random_tuples,
                                   Engine& eng);

struct CConstants {
  double c1 = 0.0;
  double c2 = 0.0;
  double c3 = 0.0;
};

/// c1 = (n/2-2) p4 + 2 p5 + (n/2) p6
/// c2 = 2 (n/2-1) p8 + 2 p7
/// c3 = p1 + (n/2-1) p2 + (n/2) p3
CConstants c_constants(const std::array<double, 8>& p, int n);
CConstants c_constants(const PParams& p, int n);

struct CConstantsEstimate {
  CConstants value;
  CConstants stderr_;
  /// Standard error of c1 - c2 computed from per-trial differences.
  double diff12_stderr = 0.0;
  /// sqrt(se(c1)^2 + se(c2)^2).
  double combined12_stderr = 0.0;
};

CConstantsEstimate c_constants_with_error(const PParams& p, int n);

/// C_y = (c3 - c1) I + G [[c1, c2], [c2, c1]] G^T for two equisized blocks.
class TheoreticalCovariance {
 public:
  TheoreticalCovariance(CConstants c, int n);

  const CConstants& constants() const { return c_; }
  int n() const { return n_; }
  const Partition& partition() const { return partition_; }

  double entry(int i, int j) const;
  Eigen::MatrixXd matrix() const;

 private:
  CConstants c_;
  int n_;
  Partition partition_;
};

TheoreticalCovariance theoretical_covariance(CConstants c, int n);

struct ClosedFormSpectrum {
  double mu1 = 0.0;      // all-ones direction
  double mu2 = 0.0;      // block-sign direction
  double mu_rest = 0.0;  // multiplicity n - 2
  bool recoverable = false;  // c1 > |c2|
};

ClosedFormSpectrum closed_form_spectrum(CConstants c, int n);

struct ProbeOptions {
  std::vector<int> m_grid;
  int trials = 10;
  std::uint64_t seed = 1;
  unsigned parallelism = 1;
  double norm_tol = 1e-6;
  int norm_max_iter = 1000;
  bool center = false;
};

struct ProbeRow {
  int m = 0;
  int trial = 0;
  double spectral_error = 0.0;
};

struct ProbeSummaryRow {
  int m = 0;
  double mean = 0.0;
  double std = 0.0;
};

struct ProbeResult {
  std::vector<ProbeRow> raw;
  std::vector<ProbeSummaryRow> summary;
  double slope = 0.0;      // least squares slope of log(mean) on log(m)
  double intercept = 0.0;
};

/// Mean spectral-norm error ||C_hat_m - reference||_2 over independent
/// batches for each m of the grid, with a log-log slope fit.
ProbeResult concentration_probe(const SbmModel& model, const GraphFilter& filter, const ExcitationSpec& spec,
                                const Eigen::MatrixXd& reference, const ProbeOptions& options);

/// Least squares slope and intercept of y on x.
std::pair<double, double> fit_line(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace blindcd
