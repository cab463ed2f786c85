#include "blindcd/graph_model.hpp"

#include "blindcd/rng.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <ostream>
#include <stdexcept>
#include <string>

namespace blindcd {
namespace {

constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;
constexpr std::uint64_t kFnvPrime = 0x100000001b3ULL;

void fnv_mix(std::uint64_t& h, std::uint64_t word) {
  for (int b = 0; b < 8; ++b) {
    h ^= (word >> (8 * b)) & 0xffU;
    h *= kFnvPrime;
  }
}

// Appends every pair of the index range selected with probability p.
// `count` is the number of candidate pairs; `pair_at` maps a monotonically
// increasing candidate index to the pair.
template <typename PairAt>
void sample_pairs(Engine& eng, double p, std::uint64_t count, PairAt&& pair_at,
                  std::vector<Edge>& out) {
  if (count == 0 || p <= 0.0) return;
  if (p >= 1.0) {
    for (std::uint64_t t = 0; t < count; ++t) out.push_back(pair_at(t));
    return;
  }
  const double log1m_p = std::log1p(-p);
  std::uint64_t t = geometric_skip(eng, log1m_p);
  while (t < count) {
    out.push_back(pair_at(t));
    const std::uint64_t skip = geometric_skip(eng, log1m_p);
    if (skip >= count - t) break;
    t += skip + 1;
  }
}

}  // namespace

Partition::Partition(std::vector<int> labels, int k) : labels_(std::move(labels)), k_(k) {
  if (k_ < 1) throw std::invalid_argument("Partition: k must be >= 1");
  for (int l : labels_) {
    if (l < 0 || l >= k_) {
      throw std::invalid_argument("Partition: label " + std::to_string(l) +
                                  " outside [0, " + std::to_string(k_) + ")");
    }
  }
}

Partition Partition::two_blocks(int n) {
  if (n < 2 || n % 2 != 0) throw std::invalid_argument("two_blocks: n must be even and >= 2");
  std::vector<int> labels(static_cast<std::size_t>(n), 0);
  std::fill(labels.begin() + n / 2, labels.end(), 1);
  return Partition(std::move(labels), 2);
}

std::vector<int> Partition::group_sizes() const {
  std::vector<int> sizes(static_cast<std::size_t>(k_), 0);
  for (int l : labels_) ++sizes[static_cast<std::size_t>(l)];
  return sizes;
}

std::vector<std::vector<int>> Partition::members() const {
  std::vector<std::vector<int>> groups(static_cast<std::size_t>(k_));
  for (int i = 0; i < size(); ++i) groups[static_cast<std::size_t>(labels_[i])].push_back(i);
  return groups;
}

Eigen::MatrixXd Partition::indicator() const {
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(size(), k_);
  for (int i = 0; i < size(); ++i) g(i, labels_[i]) = 1.0;
  return g;
}

SbmModel::SbmModel(Eigen::MatrixXd omega, Partition partition)
    : omega_(std::move(omega)), partition_(std::move(partition)) {
  if (omega_.rows() != omega_.cols() || omega_.rows() != partition_.k()) {
    throw std::invalid_argument("SbmModel: omega must be k x k");
  }
  for (Eigen::Index r = 0; r < omega_.rows(); ++r) {
    for (Eigen::Index c = 0; c < omega_.cols(); ++c) {
      const double p = omega_(r, c);
      if (!(p >= 0.0 && p <= 1.0)) {
        throw std::invalid_argument("SbmModel: probabilities must lie in [0, 1]");
      }
      if (p != omega_(c, r)) throw std::invalid_argument("SbmModel: omega must be symmetric");
    }
  }
}

std::uint64_t SbmModel::hash() const {
  std::uint64_t h = kFnvOffset;
  fnv_mix(h, static_cast<std::uint64_t>(n()));
  fnv_mix(h, static_cast<std::uint64_t>(k()));
  for (Eigen::Index c = 0; c < omega_.cols(); ++c)
    for (Eigen::Index r = 0; r < omega_.rows(); ++r) fnv_mix(h, std::bit_cast<std::uint64_t>(omega_(r, c)));
  for (int l : partition_.labels()) fnv_mix(h, static_cast<std::uint64_t>(l));
  return h;
}

PlantedPartitionParams PlantedPartitionParams::from_gamma(int n, double gamma) {
  if (n < 2) throw std::invalid_argument("from_gamma: n must be >= 2");
  const double a = 4.0 * std::log(static_cast<double>(n)) / n;
  return {n, a, gamma * a, gamma};
}

SbmModel build_planted_partition(const PlantedPartitionParams& params) {
  if (params.n < 2 || params.n % 2 != 0) {
    throw std::invalid_argument("planted partition: n must be even, got " + std::to_string(params.n));
  }
  auto in_unit = [](double p) { return p >= 0.0 && p <= 1.0; };
  if (!in_unit(params.a) || !in_unit(params.b)) {
    throw std::invalid_argument("planted partition: a and b must lie in [0, 1]");
  }
  Eigen::Matrix2d omega;
  omega << params.a, params.b, params.b, params.a;
  return SbmModel(omega, Partition::two_blocks(params.n));
}

AdjacencySample::AdjacencySample(int n, std::vector<Edge> edges) : n_(n), edges_(std::move(edges)) {
  if (n_ < 0) throw std::invalid_argument("AdjacencySample: negative n");
  for (Edge& e : edges_) {
    if (e.u > e.v) std::swap(e.u, e.v);
    if (e.u < 0 || e.v >= n_) throw std::invalid_argument("AdjacencySample: node index out of range");
    if (e.u == e.v) throw std::invalid_argument("AdjacencySample: self-loops are not allowed");
  }
  std::sort(edges_.begin(), edges_.end());
  if (std::adjacent_find(edges_.begin(), edges_.end()) != edges_.end()) {
    throw std::invalid_argument("AdjacencySample: duplicate edge");
  }
  row_ptr_.assign(static_cast<std::size_t>(n_) + 1, 0);
  for (const Edge& e : edges_) {
    ++row_ptr_[static_cast<std::size_t>(e.u) + 1];
    ++row_ptr_[static_cast<std::size_t>(e.v) + 1];
  }
  for (int i = 0; i < n_; ++i) row_ptr_[i + 1] += row_ptr_[i];
  cols_.resize(2 * edges_.size());
  std::vector<int> fill(row_ptr_.begin(), row_ptr_.end() - 1);
  // Edges are sorted, so each row receives its neighbours in ascending order
  // for the u side; the v side is sorted afterwards.
  for (const Edge& e : edges_) {
    cols_[static_cast<std::size_t>(fill[e.u]++)] = e.v;
    cols_[static_cast<std::size_t>(fill[e.v]++)] = e.u;
  }
  for (int i = 0; i < n_; ++i) std::sort(cols_.begin() + row_ptr_[i], cols_.begin() + row_ptr_[i + 1]);
}

std::span<const int> AdjacencySample::neighbors(int i) const {
  return std::span<const int>(cols_).subspan(static_cast<std::size_t>(row_ptr_[i]),
                                             static_cast<std::size_t>(degree(i)));
}

Eigen::MatrixXd AdjacencySample::to_dense() const {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n_, n_);
  for (const Edge& e : edges_) a(e.u, e.v) = a(e.v, e.u) = 1.0;
  return a;
}

void AdjacencySample::write_edge_list(std::ostream& os) const {
  for (const Edge& e : edges_) os << e.u << ' ' << e.v << '\n';
}

void LaplacianMatrix::multiply(const Eigen::VectorXd& in, Eigen::VectorXd& out) const {
  if (in.size() != n_) throw std::invalid_argument("LaplacianMatrix::multiply: dimension mismatch");
  out.resize(n_);
  for (int i = 0; i < n_; ++i) {
    double acc = 0.0;
    for (int p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p) acc += vals_[p] * in[cols_[p]];
    out[i] = acc;
  }
}

Eigen::VectorXd LaplacianMatrix::operator*(const Eigen::VectorXd& x) const {
  Eigen::VectorXd out;
  multiply(x, out);
  return out;
}

Eigen::MatrixXd LaplacianMatrix::to_dense() const {
  Eigen::MatrixXd l = Eigen::MatrixXd::Zero(n_, n_);
  for (int i = 0; i < n_; ++i)
    for (int p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p) l(i, cols_[p]) = vals_[p];
  return l;
}

LaplacianMatrix LaplacianMatrix::from_dense(const Eigen::MatrixXd& dense) {
  if (dense.rows() != dense.cols()) throw std::invalid_argument("from_dense: matrix must be square");
  LaplacianMatrix l;
  l.n_ = static_cast<int>(dense.rows());
  l.diag_.assign(static_cast<std::size_t>(l.n_), 0.0);
  for (int i = 0; i < l.n_; ++i) {
    for (int j = 0; j < l.n_; ++j) {
      if (dense(i, j) != dense(j, i)) throw std::invalid_argument("from_dense: matrix must be symmetric");
      if (dense(i, j) != 0.0 || i == j) {
        l.cols_.push_back(j);
        l.vals_.push_back(dense(i, j));
      }
    }
    l.diag_[i] = dense(i, i);
    l.row_ptr_.push_back(static_cast<int>(l.cols_.size()));
  }
  return l;
}

AdjacencySample sample_adjacency(const SbmModel& model, std::uint64_t seed) {
  Engine eng = make_engine(seed);
  const auto groups = model.partition().members();
  std::vector<Edge> edges;
  for (int g = 0; g < model.k(); ++g) {
    const auto& mg = groups[static_cast<std::size_t>(g)];
    const auto sg = static_cast<std::uint64_t>(mg.size());
    // Within group: pairs (r, c), r < c, enumerated row by row.
    {
      std::uint64_t row = 0;
      std::uint64_t row_start = 0;
      auto pair_at = [&](std::uint64_t t) {
        while (t >= row_start + (sg - 1 - row)) {
          row_start += sg - 1 - row;
          ++row;
        }
        const std::uint64_t col = row + 1 + (t - row_start);
        return Edge{mg[row], mg[col]};
      };
      const std::uint64_t count = sg < 2 ? 0 : sg * (sg - 1) / 2;
      sample_pairs(eng, model.omega()(g, g), count, pair_at, edges);
    }
    for (int h = g + 1; h < model.k(); ++h) {
      const auto& mh = groups[static_cast<std::size_t>(h)];
      const auto sh = static_cast<std::uint64_t>(mh.size());
      auto pair_at = [&](std::uint64_t t) {
        int u = mg[t / sh];
        int v = mh[t % sh];
        if (u > v) std::swap(u, v);
        return Edge{u, v};
      };
      sample_pairs(eng, model.omega()(g, h), sg * sh, pair_at, edges);
    }
  }
  return AdjacencySample(model.n(), std::move(edges));
}

LaplacianMatrix laplacian(const AdjacencySample& adj) {
  LaplacianMatrix l;
  const int n = adj.n();
  l.n_ = n;
  l.diag_.resize(static_cast<std::size_t>(n));
  l.row_ptr_.reserve(static_cast<std::size_t>(n) + 1);
  l.cols_.reserve(static_cast<std::size_t>(n) + 2 * adj.edge_count());
  l.vals_.reserve(l.cols_.capacity());
  for (int i = 0; i < n; ++i) {
    const auto nb = adj.neighbors(i);
    const double deg = static_cast<double>(nb.size());
    l.diag_[i] = deg;
    bool placed = false;
    for (int j : nb) {
      if (!placed && j > i) {
        l.cols_.push_back(i);
        l.vals_.push_back(deg);
        placed = true;
      }
      l.cols_.push_back(j);
      l.vals_.push_back(-1.0);
    }
    if (!placed) {
      l.cols_.push_back(i);
      l.vals_.push_back(deg);
    }
    l.row_ptr_.push_back(static_cast<int>(l.cols_.size()));
  }
  return l;
}

Eigen::MatrixXd expected_adjacency(const SbmModel& model) {
  const Eigen::MatrixXd g = model.partition().indicator();
  return g * model.omega() * g.transpose();
}

double expected_edge_count(const SbmModel& model) {
  const auto sizes = model.partition().group_sizes();
  double total = 0.0;
  for (int g = 0; g < model.k(); ++g) {
    const double sg = sizes[static_cast<std::size_t>(g)];
    total += model.omega()(g, g) * sg * (sg - 1.0) / 2.0;
    for (int h = g + 1; h < model.k(); ++h) total += model.omega()(g, h) * sg * sizes[static_cast<std::size_t>(h)];
  }
  return total;
}

}  // namespace blindcd
