#include "blindcd/evaluation.hpp"

#include "blindcd/covariance.hpp"
#include "blindcd/filter.hpp"
#include "blindcd/io.hpp"
#include "blindcd/parallel.hpp"
#include "blindcd/rng.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <ostream>
#include <stdexcept>

namespace blindcd {
namespace {

// Minimum-cost assignment on a square cost matrix (Kuhn-Munkres with
// potentials). Returns row -> column.
std::vector<int> hungarian(const Eigen::MatrixXd& cost) {
  const int n = static_cast<int>(cost.rows());
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  std::vector<bool> used(n + 1);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::fill(used.begin(), used.end(), false);
    do {
      used[j0] = true;
      const int i0 = p[j0];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> assignment(n, -1);
  for (int j = 1; j <= n; ++j)
    if (p[j] > 0) assignment[p[j] - 1] = j - 1;
  return assignment;
}

}  // namespace

ErrorReport error_rate(const Partition& pred, const Partition& truth) {
  if (pred.size() != truth.size()) throw std::invalid_argument("error_rate: partitions have different lengths");
  if (pred.size() == 0) throw std::invalid_argument("error_rate: empty partitions");
  if (pred.k() > truth.k()) throw std::invalid_argument("error_rate: predicted k exceeds true k");
  const int kp = pred.k();
  const int kt = truth.k();

  ErrorReport report;
  report.confusion = Eigen::MatrixXi::Zero(kp, kt);
  for (int i = 0; i < pred.size(); ++i) ++report.confusion(pred[i], truth[i]);

  std::vector<int> best_perm(static_cast<std::size_t>(kp), -1);
  long matched = -1;
  if (kt <= 6) {
    std::vector<int> order(static_cast<std::size_t>(kt));
    std::iota(order.begin(), order.end(), 0);
    do {
      long hits = 0;
      for (int p = 0; p < kp; ++p) hits += report.confusion(p, order[p]);
      if (hits > matched) {
        matched = hits;
        best_perm.assign(order.begin(), order.begin() + kp);
      }
    } while (std::next_permutation(order.begin(), order.end()));
  } else {
    const double top = report.confusion.maxCoeff();
    Eigen::MatrixXd cost = Eigen::MatrixXd::Constant(kt, kt, top);
    cost.topRows(kp) = top - report.confusion.cast<double>().array();
    const auto assign = hungarian(cost);
    matched = 0;
    for (int p = 0; p < kp; ++p) {
      best_perm[p] = assign[p];
      matched += report.confusion(p, assign[p]);
    }
  }
  report.permutation = std::move(best_perm);
  report.misclassified = static_cast<std::size_t>(pred.size() - matched);
  report.error_rate = static_cast<double>(report.misclassified) / pred.size();
  return report;
}

ScResult sc_baseline(const AdjacencySample& adj, int k, const ScConfig& config, std::uint64_t seed) {
  const int n = adj.n();
  if (k < 1 || k > n) throw std::invalid_argument("sc_baseline: k outside [1, n]");
  Eigen::MatrixXd l = laplacian(adj).to_dense();
  if (config.normalized) {
    Eigen::VectorXd inv_sqrt(n);
    for (int i = 0; i < n; ++i) inv_sqrt[i] = adj.degree(i) > 0 ? 1.0 / std::sqrt(adj.degree(i)) : 0.0;
    l = inv_sqrt.asDiagonal() * l * inv_sqrt.asDiagonal();
    for (int i = 0; i < n; ++i)
      if (adj.degree(i) == 0) l(i, i) = 1.0;
  }
  EigenOptions eig;
  eig.dense_limit = std::max(eig.dense_limit, n);
  const EigenPairs pairs = extreme_eigenpairs(l, k, SpectrumEnd::bottom, eig);
  Eigen::MatrixXd rows = pairs.vectors;
  if (config.normalized) {
    for (Eigen::Index i = 0; i < rows.rows(); ++i) {
      const double norm = rows.row(i).norm();
      if (norm > 0.0) rows.row(i) /= norm;
    }
  }
  const ClusterResult clusters = kmeans(rows, k, config.kmeans, seed);
  ScResult result;
  result.partition = Partition(clusters.labels, k);
  result.eigenvalues = pairs.values;
  result.degenerate = adj.edge_count() == 0;
  return result;
}

const Fig1SummaryRow* Fig1Result::find(double gamma, int m, const std::string& method) const {
  for (const auto& row : summary)
    if (row.gamma == gamma && row.m == m && row.method == method) return &row;
  return nullptr;
}

std::uint64_t fig1_cell_seed(std::uint64_t master, double gamma, int m, int trial, const std::string& method) {
  const std::uint64_t tag = method == "sc" ? 2 : 1;
  return derive_seed(master, {seed_key(gamma), static_cast<std::uint64_t>(m), static_cast<std::uint64_t>(trial), tag});
}

namespace {

GraphFilter fig1_filter(const Fig1Config& cfg, double gamma) {
  const double alpha = cfg.fixed_alpha ? *cfg.fixed_alpha : diffusion_step(gamma, cfg.n);
  return lowpass_power_filter(alpha, cfg.filter_power);
}

}  // namespace

double fig1_blind_trial(const Fig1Config& cfg, double gamma, int m, int trial) {
  const SbmModel model = build_planted_partition(PlantedPartitionParams::from_gamma(cfg.n, gamma));
  const GraphFilter filter = fig1_filter(cfg, gamma);
  const std::uint64_t seed = fig1_cell_seed(cfg.master_seed, gamma, m, trial, "blind");
  const ObservationBatch batch = generate_batch(model, filter, cfg.excitation, m, derive_seed(seed, {0}));
  const PartitionResult part = blind_partition(batch, 2, cfg.pipeline, derive_seed(seed, {1}));
  return error_rate(part.partition, model.partition()).error_rate;
}

double fig1_sc_trial(const Fig1Config& cfg, double gamma, int trial) {
  const SbmModel model = build_planted_partition(PlantedPartitionParams::from_gamma(cfg.n, gamma));
  const std::uint64_t seed = fig1_cell_seed(cfg.master_seed, gamma, 1, trial, "sc");
  const AdjacencySample adj = sample_adjacency(model, derive_seed(seed, {0}));
  const ScResult sc = sc_baseline(adj, 2, cfg.sc, derive_seed(seed, {1}));
  return error_rate(sc.partition, model.partition()).error_rate;
}

Fig1Result run_fig1_experiment(const Fig1Config& cfg) {
  if (cfg.gammas.empty() || cfg.m_grid.empty()) throw std::invalid_argument("fig1: empty gamma list or m grid");
  if (cfg.trials < 1) throw std::invalid_argument("fig1: trials must be >= 1");
  if (cfg.include_sc && cfg.sc_trials < 1) throw std::invalid_argument("fig1: sc_trials must be >= 1");
  for (int m : cfg.m_grid)
    if (m < 1) throw std::invalid_argument("fig1: m values must be >= 1");

  std::vector<Fig1Row> rows;
  for (double gamma : cfg.gammas) {
    for (int m : cfg.m_grid)
      for (int t = 0; t < cfg.trials; ++t) rows.push_back({gamma, m, t, "blind", 0.0, {}});
    if (cfg.include_sc)
      for (int t = 0; t < cfg.sc_trials; ++t) rows.push_back({gamma, 1, t, "sc", 0.0, {}});
  }
  parallel_for(rows.size(), cfg.parallelism, [&](std::size_t i) {
    Fig1Row& row = rows[i];
    try {
      row.error = row.method == "sc" ? fig1_sc_trial(cfg, row.gamma, row.trial)
                                     : fig1_blind_trial(cfg, row.gamma, row.m, row.trial);
    } catch (const std::exception& e) {
      row.error = std::numeric_limits<double>::quiet_NaN();
      row.failure = e.what();
    }
  });
  Fig1Result result;
  result.raw = std::move(rows);
  result.summary = summarize(result.raw);
  return result;
}

std::vector<Fig1SummaryRow> summarize(const std::vector<Fig1Row>& raw) {
  std::vector<Fig1SummaryRow> out;
  std::vector<std::vector<double>> values;
  for (const auto& row : raw) {
    auto it = std::find_if(out.begin(), out.end(), [&](const Fig1SummaryRow& s) {
      return s.gamma == row.gamma && s.m == row.m && s.method == row.method;
    });
    std::size_t idx;
    if (it == out.end()) {
      out.push_back({row.gamma, row.m, row.method, 0.0, 0.0, 0});
      values.emplace_back();
      idx = out.size() - 1;
    } else {
      idx = static_cast<std::size_t>(it - out.begin());
    }
    if (std::isfinite(row.error)) values[idx].push_back(row.error);
  }
  for (std::size_t i = 0; i < out.size(); ++i) {
    const auto& v = values[i];
    out[i].count = static_cast<int>(v.size());
    if (v.empty()) {
      out[i].mean = out[i].std = std::numeric_limits<double>::quiet_NaN();
      continue;
    }
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    double var = 0.0;
    for (double x : v) var += (x - mean) * (x - mean);
    out[i].mean = mean;
    out[i].std = v.size() > 1 ? std::sqrt(var / static_cast<double>(v.size() - 1)) : 0.0;
  }
  return out;
}

void write_fig1_raw_csv(std::ostream& os, const Fig1Result& result) {
  os << "gamma,m,trial,method,error\n";
  for (const auto& r : result.raw) {
    os << format_double(r.gamma) << ',' << r.m << ',' << r.trial << ',' << r.method << ','
       << format_double(r.error) << '\n';
  }
}

void write_fig1_summary_csv(std::ostream& os, const Fig1Result& result) {
  os << "gamma,m,method,mean,std\n";
  for (const auto& s : result.summary) {
    os << format_double(s.gamma) << ',' << s.m << ',' << s.method << ',' << format_double(s.mean) << ','
       << format_double(s.std) << '\n';
  }
}

void write_fig1_svg(std::ostream& os, const Fig1Result& result) {
  constexpr double width = 720, height = 440, left = 70, right = 170, top = 30, bottom = 60;
  const double plot_w = width - left - right;
  const double plot_h = height - top - bottom;
  int m_min = std::numeric_limits<int>::max(), m_max = 0;
  double y_max = 0.5;
  for (const auto& s : result.summary) {
    if (std::isfinite(s.mean)) y_max = std::max(y_max, s.mean);
    if (s.method != "blind") continue;
    m_min = std::min(m_min, s.m);
    m_max = std::max(m_max, s.m);
  }
  if (m_max == 0) m_min = m_max = 1;
  const double lx0 = std::log10(static_cast<double>(m_min));
  const double lx1 = std::max(std::log10(static_cast<double>(m_max)), lx0 + 1e-9);
  auto px = [&](double m) { return left + plot_w * (std::log10(m) - lx0) / (lx1 - lx0); };
  auto py = [&](double e) { return top + plot_h * (1.0 - e / y_max); };
  static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf"};

  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
     << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<line x1=\"" << left << "\" y1=\"" << top + plot_h << "\" x2=\"" << left + plot_w << "\" y2=\""
     << top + plot_h << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << top + plot_h
     << "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 5; ++i) {
    const double e = y_max * i / 5.0;
    os << "<text x=\"" << left - 8 << "\" y=\"" << py(e) + 4 << "\" text-anchor=\"end\">" << format_double(
                                                                                                std::round(e * 1000) / 1000)
       << "</text>\n";
  }
  std::vector<int> ms;
  for (const auto& s : result.summary)
    if (s.method == "blind" && std::find(ms.begin(), ms.end(), s.m) == ms.end()) ms.push_back(s.m);
  for (int m : ms) {
    os << "<text x=\"" << px(m) << "\" y=\"" << top + plot_h + 18 << "\" text-anchor=\"middle\">" << m
       << "</text>\n";
  }
  os << "<text x=\"" << left + plot_w / 2 << "\" y=\"" << height - 15
     << "\" text-anchor=\"middle\">sample size m</text>\n";
  os << "<text x=\"18\" y=\"" << top + plot_h / 2 << "\" transform=\"rotate(-90 18 " << top + plot_h / 2
     << ")\" text-anchor=\"middle\">error rate</text>\n";

  std::vector<double> gammas;
  for (const auto& s : result.summary)
    if (std::find(gammas.begin(), gammas.end(), s.gamma) == gammas.end()) gammas.push_back(s.gamma);
  int legend = 0;
  for (std::size_t g = 0; g < gammas.size(); ++g) {
    const char* color = palette[g % std::size(palette)];
    std::string points;
    for (const auto& s : result.summary) {
      if (s.gamma != gammas[g] || s.method != "blind" || !std::isfinite(s.mean)) continue;
      points += format_double(px(s.m)) + "," + format_double(py(s.mean)) + " ";
      os << "<circle cx=\"" << px(s.m) << "\" cy=\"" << py(s.mean) << "\" r=\"3\" fill=\"" << color << "\"/>\n";
    }
    if (!points.empty()) {
      os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"" << points << "\"/>\n";
      os << "<text x=\"" << left + plot_w + 10 << "\" y=\"" << top + 16 * (legend++) + 10 << "\" fill=\"" << color
         << "\">blind, gamma=" << format_double(gammas[g]) << "</text>\n";
    }
    if (const auto* sc = result.find(gammas[g], 1, "sc"); sc && std::isfinite(sc->mean)) {
      os << "<line x1=\"" << left << "\" y1=\"" << py(sc->mean) << "\" x2=\"" << left + plot_w << "\" y2=\""
         << py(sc->mean) << "\" stroke=\"" << color << "\" stroke-dasharray=\"6,4\"/>\n";
      os << "<text x=\"" << left + plot_w + 10 << "\" y=\"" << top + 16 * (legend++) + 10 << "\" fill=\"" << color
         << "\">SC, gamma=" << format_double(gammas[g]) << "</text>\n";
    }
  }
  os << "</svg>\n";
}

}  // namespace blindcd
