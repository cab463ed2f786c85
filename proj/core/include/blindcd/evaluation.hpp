#pragma once

#include "blindcd/graph_model.hpp"
#include "blindcd/signal_sim.hpp"
#include "blindcd/spectral.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace blindcd {

struct ErrorReport {
  double error_rate = 0.0;
  std::size_t misclassified = 0;
  /// permutation[p] = truth label matched to predicted label p (-1 if unmatched).
  std::vector<int> permutation;
  /// confusion(p, t) = number of nodes with predicted p and true t.
  Eigen::MatrixXi confusion;
};

/// Misclassification fraction under the best one-to-one relabelling of the
/// predicted groups. Brute force over permutations for k <= 6, Hungarian
/// assignment above. Requires pred.k() <= truth.k().
ErrorReport error_rate(const Partition& pred, const Partition& truth);

struct ScConfig {
  KMeansConfig kmeans;
  bool normalized = false;  // symmetric normalised Laplacian with row normalisation
};

struct ScResult {
  Partition partition;
  Eigen::VectorXd eigenvalues;  // k smallest, ascending
  bool degenerate = false;      // every computed eigenvalue is zero
};

/// Spectral clustering on one observed graph: k-means on the rows of the
/// eigenvectors of the k smallest Laplacian eigenvalues.
ScResult sc_baseline(const AdjacencySample& adj, int k, const ScConfig& config, std::uint64_t seed);

struct Fig1Config {
  int n = 100;
  std::vector<double> gammas{0.1, 0.5, 0.9};
  std::vector<int> m_grid{250, 500, 1000, 2000, 3000};
  int trials = 20;
  int sc_trials = 20;
  int filter_power = 5;
  std::optional<double> fixed_alpha;  // default: diffusion_step(gamma, n)
  ExcitationSpec excitation = ExcitationSpec::uniform(1.0);
  PipelineConfig pipeline;
  ScConfig sc;
  bool include_sc = true;
  std::uint64_t master_seed = 2024;
  unsigned parallelism = 1;
};

struct Fig1Row {
  double gamma = 0.0;
  int m = 0;  // 1 for the single-snapshot baseline
  int trial = 0;
  std::string method;  // "blind" or "sc"
  double error = 0.0;  // NaN when the trial failed
  std::string failure;
};

struct Fig1SummaryRow {
  double gamma = 0.0;
  int m = 0;
  std::string method;
  double mean = 0.0;
  double std = 0.0;
  int count = 0;
};

struct Fig1Result {
  std::vector<Fig1Row> raw;
  std::vector<Fig1SummaryRow> summary;

  const Fig1SummaryRow* find(double gamma, int m, const std::string& method) const;
};

/// Seeds of a single experiment cell; any cell can be recomputed alone.
std::uint64_t fig1_cell_seed(std::uint64_t master, double gamma, int m, int trial, const std::string& method);

/// One blind-recovery trial: batch -> blind_partition -> error vs planted truth.
double fig1_blind_trial(const Fig1Config& cfg, double gamma, int m, int trial);
/// One baseline trial on a single graph draw.
double fig1_sc_trial(const Fig1Config& cfg, double gamma, int trial);

Fig1Result run_fig1_experiment(const Fig1Config& cfg);

std::vector<Fig1SummaryRow> summarize(const std::vector<Fig1Row>& raw);

void write_fig1_raw_csv(std::ostream& os, const Fig1Result& result);
void write_fig1_summary_csv(std::ostream& os, const Fig1Result& result);
/// Mean error against m (log axis), one line per (gamma, method).
void write_fig1_svg(std::ostream& os, const Fig1Result& result);

}  // namespace blindcd
