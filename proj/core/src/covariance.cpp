#include "blindcd/covariance.hpp"

#include "blindcd/linalg.hpp"
#include "blindcd/parallel.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace blindcd {

CovarianceAccumulator::CovarianceAccumulator(int n, int block_size) : n_(n), block_size_(block_size) {
  if (n_ < 1) throw std::invalid_argument("CovarianceAccumulator: n must be >= 1");
  if (block_size_ < 1) throw std::invalid_argument("CovarianceAccumulator: block size must be >= 1");
  buffer_.resize(n_, block_size_);
}

void CovarianceAccumulator::add(const Eigen::Ref<const Eigen::VectorXd>& y) {
  if (y.size() != n_) {
    throw std::invalid_argument("accumulate: sample length " + std::to_string(y.size()) + " != n = " +
                                std::to_string(n_));
  }
  buffer_.col(buffered_++) = y;
  ++count_;
  if (buffered_ == block_size_) {
    push(flush_buffer());
    buffered_ = 0;
  }
}

void CovarianceAccumulator::add_columns(const Eigen::Ref<const Eigen::MatrixXd>& samples) {
  for (Eigen::Index c = 0; c < samples.cols(); ++c) add(samples.col(c));
}

CovarianceAccumulator::Node CovarianceAccumulator::flush_buffer() const {
  Node node;
  node.count = buffered_;
  node.outer = Eigen::MatrixXd::Zero(n_, n_);
  node.sum = Eigen::VectorXd::Zero(n_);
  if (buffered_ > 0) {
    const auto block = buffer_.leftCols(buffered_);
    node.outer.selfadjointView<Eigen::Lower>().rankUpdate(block);
    node.sum = block.rowwise().sum();
  }
  return node;
}

void CovarianceAccumulator::push(Node node) {
  stack_.push_back(std::move(node));
  while (stack_.size() >= 2 && stack_[stack_.size() - 2].count == stack_.back().count) {
    Node& older = stack_[stack_.size() - 2];
    const Node& newer = stack_.back();
    older.outer += newer.outer;
    older.sum += newer.sum;
    older.count += newer.count;
    stack_.pop_back();
  }
}

void CovarianceAccumulator::merge(const CovarianceAccumulator& other) {
  if (other.n_ != n_) throw std::invalid_argument("merge: accumulators have different dimensions");
  for (const Node& node : other.stack_) {
    count_ += node.count;
    push(node);
  }
  for (int c = 0; c < other.buffered_; ++c) add(other.buffer_.col(c));
}

CovarianceAccumulator::Node CovarianceAccumulator::total() const {
  Node acc = flush_buffer();
  if (stack_.empty()) return acc;
  Node sum = stack_.front();
  for (std::size_t i = 1; i < stack_.size(); ++i) {
    sum.outer += stack_[i].outer;
    sum.sum += stack_[i].sum;
    sum.count += stack_[i].count;
  }
  sum.outer += acc.outer;
  sum.sum += acc.sum;
  sum.count += acc.count;
  return sum;
}

Eigen::VectorXd CovarianceAccumulator::mean() const {
  if (count_ < 1) throw std::invalid_argument("mean: empty accumulator");
  return total().sum / static_cast<double>(count_);
}

Eigen::MatrixXd CovarianceAccumulator::finalize(bool center) const {
  if (count_ < 1) throw std::invalid_argument("finalize: empty accumulator");
  const Node t = total();
  const double m = static_cast<double>(count_);
  Eigen::MatrixXd c = t.outer / m;
  c.triangularView<Eigen::StrictlyUpper>() = c.transpose();
  if (center) {
    const Eigen::VectorXd mu = t.sum / m;
    c.noalias() -= mu * mu.transpose();
  }
  return c;
}

Eigen::MatrixXd sample_covariance(const Eigen::MatrixXd& signals, bool center) {
  CovarianceAccumulator acc(static_cast<int>(signals.rows()));
  acc.add_columns(signals);
  return acc.finalize(center);
}

namespace {

struct Blocks {
  int half;
  int block(int i) const { return i < half ? 0 : 1; }
  int start(int b) const { return b == 0 ? 0 : half; }
};

// Uniform index in block b, excluding up to two values.
int pick_in_block(Engine& eng, const Blocks& bl, int b, int ex1 = -1, int ex2 = -1) {
  for (;;) {
    const int v = bl.start(b) + static_cast<int>(uniform_index(eng, static_cast<std::uint64_t>(bl.half)));
    if (v != ex1 && v != ex2) return v;
  }
}

int pick_any(Engine& eng, int n, int ex1, int ex2) {
  for (;;) {
    const int v = static_cast<int>(uniform_index(eng, static_cast<std::uint64_t>(n)));
    if (v != ex1 && v != ex2) return v;
  }
}

std::array<double, 8> exhaustive_moments(const Eigen::MatrixXd& h) {
  const int n = static_cast<int>(h.rows());
  const int half = n / 2;
  const Eigen::MatrixXd h2 = h * h;
  std::array<double, 8> s{};
  std::array<double, 8> cnt{};
  const double hf = half;
  for (int b = 0; b < 2; ++b) {
    const int o = b * half;
    const int ob = (1 - b) * half;
    const auto hbb = h.block(o, o, half, half);
    const auto hbo = h.block(o, ob, half, half);
    const Eigen::MatrixXd within = hbb * hbb.transpose();  // sum over l in the same block
    const Eigen::MatrixXd across = hbo * hbo.transpose();  // sum over l in the other block
    for (int i = 0; i < half; ++i) {
      const int gi = o + i;
      s[0] += h(gi, gi) * h(gi, gi);
      for (int j = 0; j < half; ++j) {
        const int gj = o + j;
        if (i != j) {
          s[1] += h(gi, gj) * h(gi, gj);
          s[3] += within(i, j) - h(gi, gi) * h(gj, gi) - h(gi, gj) * h(gj, gj);
          s[4] += h(gi, gi) * h(gj, gi);
          s[5] += across(i, j);
        }
        const int gk = ob + j;
        s[2] += h(gi, gk) * h(gi, gk);
        s[6] += h(gi, gi) * h(gk, gi);
        s[7] += h2(gi, gk) - h(gi, gi) * h(gk, gi) - h(gi, gk) * h(gk, gk);
      }
    }
  }
  cnt[0] = n;
  cnt[1] = 2.0 * hf * (hf - 1.0);
  cnt[2] = 2.0 * hf * hf;
  cnt[3] = 2.0 * hf * (hf - 1.0) * (hf - 2.0);
  cnt[4] = cnt[1];
  cnt[5] = 2.0 * hf * (hf - 1.0) * hf;
  cnt[6] = cnt[2];
  cnt[7] = 2.0 * hf * hf * (n - 2.0);
  for (int p = 0; p < 8; ++p) s[p] /= cnt[p];
  return s;
}

}  // namespace

std::array<double, 8> p_moments_of(const Eigen::MatrixXd& h, TripleSampling sampling, int random_tuples,
                                   Engine& eng) {
  const int n = static_cast<int>(h.rows());
  if (h.cols() != n || n < 6 || n % 2 != 0) {
    throw std::invalid_argument("p_moments_of: need a square matrix with even n >= 6");
  }
  if (sampling == TripleSampling::exhaustive) return exhaustive_moments(h);

  const Blocks bl{n / 2};
  std::array<double, 8> s{};
  auto add_tuple = [&](int i, int j_same, int l_same, int l_other, int j_other, int l_any) {
    s[0] += h(i, i) * h(i, i);
    s[1] += h(i, j_same) * h(i, j_same);
    s[2] += h(i, j_other) * h(i, j_other);
    s[3] += h(i, l_same) * h(j_same, l_same);
    s[4] += h(i, i) * h(j_same, i);
    s[5] += h(i, l_other) * h(j_same, l_other);
    s[6] += h(i, i) * h(j_other, i);
    s[7] += h(i, l_any) * h(j_other, l_any);
  };
  const int half = n / 2;
  add_tuple(0, 1, 2, half, half, 1);
  int tuples = 1;
  if (sampling == TripleSampling::random) {
    for (int r = 0; r < random_tuples; ++r) {
      const int i = static_cast<int>(uniform_index(eng, static_cast<std::uint64_t>(n)));
      const int bi = bl.block(i);
      const int j_same = pick_in_block(eng, bl, bi, i);
      const int l_same = pick_in_block(eng, bl, bi, i, j_same);
      const int l_other = pick_in_block(eng, bl, 1 - bi);
      const int j_other = pick_in_block(eng, bl, 1 - bi);
      const int l_any = pick_any(eng, n, i, j_other);
      add_tuple(i, j_same, l_same, l_other, j_other, l_any);
      ++tuples;
    }
  }
  for (double& v : s) v /= tuples;
  return s;
}

PParams estimate_p_params(const PlantedPartitionParams& params, const GraphFilter& filter,
                          const PParamOptions& options) {
  if (options.trials < 1) throw std::invalid_argument("estimate_p_params: trials must be >= 1");
  if (params.n < 6) throw std::invalid_argument("estimate_p_params: n must be >= 6 for all index patterns");
  if (params.n > options.max_n) {
    throw std::invalid_argument("estimate_p_params: n = " + std::to_string(params.n) + " exceeds the dense cap " +
                                std::to_string(options.max_n));
  }
  if (options.random_tuples < 0) throw std::invalid_argument("estimate_p_params: random_tuples must be >= 0");
  const SbmModel model = build_planted_partition(params);

  PParams out;
  out.trials = options.trials;
  out.per_trial.resize(options.trials, 8);
  parallel_for(static_cast<std::size_t>(options.trials), options.parallelism, [&](std::size_t t) {
    const std::uint64_t trial_seed = derive_seed(options.seed, {t});
    const AdjacencySample adj = sample_adjacency(model, derive_seed(trial_seed, {0}));
    const Eigen::MatrixXd h = dense_filter_matrix(filter, laplacian(adj));
    Engine eng = make_engine(derive_seed(trial_seed, {2}));
    const auto moments = p_moments_of(h, options.sampling, options.random_tuples, eng);
    for (int p = 0; p < 8; ++p) out.per_trial(static_cast<Eigen::Index>(t), p) = moments[p];
  });

  const double trials = options.trials;
  for (int p = 0; p < 8; ++p) {
    const auto col = out.per_trial.col(p);
    const double mean = col.mean();
    out.value[p] = mean;
    if (options.trials > 1) {
      const double var = (col.array() - mean).square().sum() / (trials - 1.0);
      out.stderr_[p] = std::sqrt(var / trials);
    }
  }
  return out;
}

CConstants c_constants(const std::array<double, 8>& p, int n) {
  if (n < 4 || n % 2 != 0) throw std::invalid_argument("c_constants: n must be even and >= 4");
  const double h = n / 2.0;
  return {
      (h - 2.0) * p[3] + 2.0 * p[4] + h * p[5],
      2.0 * (h - 1.0) * p[7] + 2.0 * p[6],
      p[0] + (h - 1.0) * p[1] + h * p[2],
  };
}

CConstants c_constants(const PParams& p, int n) { return c_constants(p.value, n); }

CConstantsEstimate c_constants_with_error(const PParams& p, int n) {
  CConstantsEstimate est;
  est.value = c_constants(p, n);
  const Eigen::Index t = p.per_trial.rows();
  if (t < 2) return est;
  Eigen::VectorXd c1(t), c2(t), c3(t);
  for (Eigen::Index r = 0; r < t; ++r) {
    std::array<double, 8> row{};
    for (int k = 0; k < 8; ++k) row[k] = p.per_trial(r, k);
    const CConstants c = c_constants(row, n);
    c1[r] = c.c1;
    c2[r] = c.c2;
    c3[r] = c.c3;
  }
  auto se = [t](const Eigen::VectorXd& v) {
    const double mean = v.mean();
    const double var = (v.array() - mean).square().sum() / static_cast<double>(t - 1);
    return std::sqrt(var / static_cast<double>(t));
  };
  est.stderr_ = {se(c1), se(c2), se(c3)};
  est.diff12_stderr = se(c1 - c2);
  est.combined12_stderr = std::hypot(est.stderr_.c1, est.stderr_.c2);
  return est;
}

TheoreticalCovariance::TheoreticalCovariance(CConstants c, int n)
    : c_(c), n_(n), partition_(Partition::two_blocks(n)) {}

double TheoreticalCovariance::entry(int i, int j) const {
  if (i == j) return c_.c3;
  return partition_[i] == partition_[j] ? c_.c1 : c_.c2;
}

Eigen::MatrixXd TheoreticalCovariance::matrix() const {
  const Eigen::MatrixXd g = partition_.indicator();
  Eigen::Matrix2d block;
  block << c_.c1, c_.c2, c_.c2, c_.c1;
  Eigen::MatrixXd c = g * block * g.transpose();
  c.diagonal().array() += c_.c3 - c_.c1;
  return c;
}

TheoreticalCovariance theoretical_covariance(CConstants c, int n) {
  if (n < 2 || n % 2 != 0) throw std::invalid_argument("theoretical_covariance: n must be even");
  return TheoreticalCovariance(c, n);
}

ClosedFormSpectrum closed_form_spectrum(CConstants c, int n) {
  if (n < 2 || n % 2 != 0) throw std::invalid_argument("closed_form_spectrum: n must be even");
  const double h = n / 2.0;
  ClosedFormSpectrum s;
  s.mu_rest = c.c3 - c.c1;
  s.mu1 = h * (c.c1 + c.c2) + s.mu_rest;
  s.mu2 = h * (c.c1 - c.c2) + s.mu_rest;
  s.recoverable = c.c1 > std::abs(c.c2);
  return s;
}

std::pair<double, double> fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.empty()) throw std::invalid_argument("fit_line: need matching non-empty inputs");
  const double k = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / k;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / k;
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  const double slope = sxx > 0.0 ? sxy / sxx : 0.0;
  return {slope, my - slope * mx};
}

ProbeResult concentration_probe(const SbmModel& model, const GraphFilter& filter, const ExcitationSpec& spec,
                                const Eigen::MatrixXd& reference, const ProbeOptions& options) {
  if (options.m_grid.empty()) throw std::invalid_argument("concentration_probe: empty m grid");
  for (std::size_t i = 0; i < options.m_grid.size(); ++i) {
    if (options.m_grid[i] < 1 || (i > 0 && options.m_grid[i] <= options.m_grid[i - 1])) {
      throw std::invalid_argument("concentration_probe: m grid must be positive and strictly ascending");
    }
  }
  if (options.trials < 1) throw std::invalid_argument("concentration_probe: trials must be >= 1");
  if (reference.rows() != model.n() || reference.cols() != model.n()) {
    throw std::invalid_argument("concentration_probe: reference has the wrong shape");
  }

  const std::size_t cells = options.m_grid.size() * static_cast<std::size_t>(options.trials);
  ProbeResult result;
  result.raw.resize(cells);
  parallel_for(cells, options.parallelism, [&](std::size_t cell) {
    const int m = options.m_grid[cell / static_cast<std::size_t>(options.trials)];
    const int trial = static_cast<int>(cell % static_cast<std::size_t>(options.trials));
    const std::uint64_t batch_seed =
        derive_seed(options.seed, {static_cast<std::uint64_t>(m), static_cast<std::uint64_t>(trial)});
    CovarianceAccumulator acc(model.n());
    for (int l = 0; l < m; ++l) acc.add(generate_observation(model, filter, spec, observation_seed(batch_seed, l)).y);
    const Eigen::MatrixXd diff = acc.finalize(options.center) - reference;
    const NormEstimate err =
        symmetric_spectral_norm(diff, options.norm_tol, options.norm_max_iter, derive_seed(batch_seed, {7}));
    result.raw[cell] = {m, trial, err.value};
  });

  std::vector<double> log_m;
  std::vector<double> log_err;
  for (std::size_t g = 0; g < options.m_grid.size(); ++g) {
    double mean = 0.0;
    for (int t = 0; t < options.trials; ++t) mean += result.raw[g * options.trials + t].spectral_error;
    mean /= options.trials;
    double var = 0.0;
    for (int t = 0; t < options.trials; ++t) {
      const double d = result.raw[g * options.trials + t].spectral_error - mean;
      var += d * d;
    }
    const double sd = options.trials > 1 ? std::sqrt(var / (options.trials - 1)) : 0.0;
    result.summary.push_back({options.m_grid[g], mean, sd});
    log_m.push_back(std::log(static_cast<double>(options.m_grid[g])));
    log_err.push_back(std::log(mean));
  }
  std::tie(result.slope, result.intercept) = fit_line(log_m, log_err);
  return result;
}

}  // namespace blindcd
