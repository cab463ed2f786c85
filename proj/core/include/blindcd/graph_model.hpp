#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

namespace blindcd {

/// Node-to-group assignment. Labels are 0-based, in [0, k).
class Partition {
 public:
  Partition() = default;
  Partition(std::vector<int> labels, int k);

  /// Two contiguous equisized blocks: first n/2 nodes in group 0.
  static Partition two_blocks(int n);

  int k() const { return k_; }
  int size() const { return static_cast<int>(labels_.size()); }
  const std::vector<int>& labels() const { return labels_; }
  int operator[](int i) const { return labels_[static_cast<std::size_t>(i)]; }

  std::vector<int> group_sizes() const;
  /// Node indices of each group, ascending.
  std::vector<std::vector<int>> members() const;
  /// G in {0,1}^{n x k}, exactly one 1 per row.
  Eigen::MatrixXd indicator() const;

  friend bool operator==(const Partition&, const Partition&) = default;

 private:
  std::vector<int> labels_;
  int k_ = 0;
};

/// Stochastic blockmodel: symmetric k x k affinity matrix plus a partition.
class SbmModel {
 public:
  SbmModel(Eigen::MatrixXd omega, Partition partition);

  int n() const { return partition_.size(); }
  int k() const { return partition_.k(); }
  const Eigen::MatrixXd& omega() const { return omega_; }
  const Partition& partition() const { return partition_; }
  double edge_probability(int i, int j) const {
    return omega_(partition_[i], partition_[j]);
  }

  /// Stable 64-bit content hash (FNV-1a over n, omega bits, labels).
  std::uint64_t hash() const;

 private:
  Eigen::MatrixXd omega_;
  Partition partition_;
};

/// Two equisized blocks with within-block probability a and across-block
/// probability b.
struct PlantedPartitionParams {
  int n = 0;
  double a = 0.0;
  double b = 0.0;
  std::optional<double> gamma;

  /// a = 4 ln(n) / n, b = gamma * a.
  static PlantedPartitionParams from_gamma(int n, double gamma);
};

SbmModel build_planted_partition(const PlantedPartitionParams& params);

struct Edge {
  int u = 0;
  int v = 0;
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

/// Simple undirected graph without self-loops. Edges are stored with u < v in
/// ascending order; a compressed-row neighbour view is built alongside.
class AdjacencySample {
 public:
  AdjacencySample(int n, std::vector<Edge> edges);

  int n() const { return n_; }
  std::size_t edge_count() const { return edges_.size(); }
  const std::vector<Edge>& edges() const { return edges_; }
  std::span<const int> neighbors(int i) const;
  int degree(int i) const { return row_ptr_[i + 1] - row_ptr_[i]; }

  Eigen::MatrixXd to_dense() const;
  /// One "i j" pair per line, 0-indexed, ascending.
  void write_edge_list(std::ostream& os) const;

 private:
  int n_;
  std::vector<Edge> edges_;
  std::vector<int> row_ptr_;
  std::vector<int> cols_;
};

/// Combinatorial Laplacian L = D - A in compressed-row form. Each row holds
/// its diagonal entry and the off-diagonal -1 entries, column-sorted.
class LaplacianMatrix {
 public:
  int n() const { return n_; }
  std::size_t nonzeros() const { return cols_.size(); }

  /// out = L * in.
  void multiply(const Eigen::VectorXd& in, Eigen::VectorXd& out) const;
  Eigen::VectorXd operator*(const Eigen::VectorXd& x) const;

  Eigen::MatrixXd to_dense() const;
  double degree(int i) const { return diag_[static_cast<std::size_t>(i)]; }

  const std::vector<int>& row_ptr() const { return row_ptr_; }
  const std::vector<int>& cols() const { return cols_; }
  const std::vector<double>& values() const { return vals_; }

  static LaplacianMatrix from_dense(const Eigen::MatrixXd& dense);

 private:
  friend LaplacianMatrix laplacian(const AdjacencySample& adj);

  int n_ = 0;
  std::vector<int> row_ptr_{0};
  std::vector<int> cols_;
  std::vector<double> vals_;
  std::vector<double> diag_;
};

/// Draws each unordered pair {i, j}, i != j, independently with probability
/// Omega(g_i, g_j). Pure function of (model, seed).
AdjacencySample sample_adjacency(const SbmModel& model, std::uint64_t seed);

LaplacianMatrix laplacian(const AdjacencySample& adj);

/// G Omega G^T, diagonal included as written (sampled graphs have A_ii = 0).
Eigen::MatrixXd expected_adjacency(const SbmModel& model);

/// Expected number of edges of a sampled graph (self-loops excluded).
double expected_edge_count(const SbmModel& model);

}  // namespace blindcd
