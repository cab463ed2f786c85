#include <blindcd/blindcd.hpp>

#include <Eigen/Eigenvalues>

#ifdef BLINDCD_ACCEPTANCE_HAVE_APP
#include "app/commands.hpp"
#endif

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

using namespace blindcd;
namespace fs = std::filesystem;

namespace {

enum class Status { pass, fail, skip };

struct Outcome {
  Status status = Status::pass;
  std::string detail;
};

struct Check {
  std::ostringstream detail;
  bool ok = true;

  void require(bool condition, const std::string& what) {
    if (!condition) {
      ok = false;
      detail << "[violated] " << what << "; ";
    }
  }
  void note(const std::string& what) { detail << what << "; "; }
  Outcome done() const { return {ok ? Status::pass : Status::fail, detail.str()}; }
};

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

void budget(Check& c, std::chrono::steady_clock::time_point start, double limit) {
  const double t = seconds_since(start);
  c.note("runtime " + fmt(t) + " s (limit " + fmt(limit) + " s)");
  c.require(t < limit, "runtime within budget");
}

Eigen::VectorXd block_sign(int n) {
  Eigen::VectorXd s(n);
  for (int i = 0; i < n; ++i) s[i] = i < n / 2 ? 1.0 : -1.0;
  return s / std::sqrt(static_cast<double>(n));
}

// 1. Closed-form spectrum of the theoretical covariance.
Outcome closed_form_spectrum_oracle() {
  const auto start = std::chrono::steady_clock::now();
  Check c;
  Engine eng(0xacc1);
  double worst_rel = 0.0, worst_cos = 1.0;
  for (int draw = 0; draw < 100; ++draw) {
    const int n = 2 * (1 + static_cast<int>(uniform_index(eng, 100)));
    CConstants k;
    do {
      k.c1 = uniform(eng, 0.01, 2.0);
      k.c2 = uniform(eng, -2.0, 2.0);
    } while (!(k.c1 > std::abs(k.c2)));
    k.c3 = uniform(eng, 0.0, 5.0) + k.c1;
    const ClosedFormSpectrum s = closed_form_spectrum(k, n);
    const Eigen::MatrixXd cy = theoretical_covariance(k, n).matrix();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cy);
    const Eigen::VectorXd& values = solver.eigenvalues();

    std::vector<double> expected(static_cast<std::size_t>(n), s.mu_rest);
    expected[0] = s.mu1;
    expected[1] = s.mu2;
    std::sort(expected.begin(), expected.end());
    const double scale = values.cwiseAbs().maxCoeff();
    for (int i = 0; i < n; ++i)
      worst_rel = std::max(worst_rel, std::abs(values[i] - expected[static_cast<std::size_t>(i)]) / scale);

    // The block-sign vector is an exact eigenvector: compare with the
    // eigenvector the solver returns for mu2 when it is a simple eigenvalue,
    // and check the Rayleigh residual in every case.
    const Eigen::VectorXd sign = block_sign(n);
    const double residual = (cy * sign - s.mu2 * sign).norm() / scale;
    c.require(residual <= 1e-12 * n, "block-sign residual at draw " + std::to_string(draw));
    const double sep = std::min(std::abs(s.mu2 - s.mu1), std::abs(s.mu2 - s.mu_rest));
    if (sep > 1e-6 * scale) {
      int idx = 0;
      (values.array() - s.mu2).abs().minCoeff(&idx);
      worst_cos = std::min(worst_cos, std::abs(solver.eigenvectors().col(idx).dot(sign)));
    }
  }
  c.note("max relative eigenvalue deviation " + fmt(worst_rel) + ", min |cos| " + fmt(worst_cos));
  c.require(worst_rel <= 1e-9, "spectrum within 1e-9 relative");
  c.require(worst_cos >= 1.0 - 1e-9, "mu2 eigenvector |cos| >= 1 - 1e-9");
  budget(c, start, 10.0);
  return c.done();
}

// 2. Identity filter with Rademacher excitation recovers the identity.
Outcome identity_filter_end_to_end() {
  const auto start = std::chrono::steady_clock::now();
  Check c;
  const SbmModel model = build_planted_partition(PlantedPartitionParams::from_gamma(50, 0.5));
  const ObservationBatch batch =
      generate_batch(model, GraphFilter::identity(), ExcitationSpec::rademacher(), 5000, 0xacc2);
  const Eigen::MatrixXd cov = sample_covariance(batch.signals());
  const double err = (cov - Eigen::MatrixXd::Identity(50, 50)).cwiseAbs().maxCoeff();
  c.note("max-entry error " + fmt(err));
  c.require(err <= 0.06, "max-entry error <= 0.06");
  budget(c, start, 5.0);
  return c.done();
}

// 3. Spectral error of the sample covariance shrinks like m^{-1/2}.
Outcome concentration_rate() {
  const auto start = std::chrono::steady_clock::now();
  Check c;
  const PlantedPartitionParams params = PlantedPartitionParams::from_gamma(50, 0.5);
  const SbmModel model = build_planted_partition(params);
  const GraphFilter filter = lowpass_power_filter(diffusion_step(0.5, 50), 5);
  const ExcitationSpec spec = ExcitationSpec::uniform();

  PParamOptions popts;
  popts.trials = 4000;
  popts.sampling = TripleSampling::exhaustive;
  popts.seed = 0xacc3;
  const CConstants k = c_constants(estimate_p_params(params, filter, popts), params.n);
  const Eigen::MatrixXd reference = spec.variance() * theoretical_covariance(k, params.n).matrix();

  ProbeOptions opts;
  opts.m_grid = {250, 500, 1000, 2000, 4000};
  opts.trials = 10;
  opts.seed = 0xacc3;
  const ProbeResult r = concentration_probe(model, filter, spec, reference, opts);
  std::ostringstream means;
  for (const auto& s : r.summary) means << s.m << ':' << fmt(s.mean) << ' ';
  c.note("mean errors " + means.str());
  c.note("log-log slope " + fmt(r.slope));
  c.require(r.slope >= -0.65 && r.slope <= -0.35, "slope in [-0.65, -0.35]");
  budget(c, start, 600.0);
  return c.done();
}

struct Fig1Runs {
  Fig1Result result;
  std::vector<double> sc_easy;  // single-snapshot SC at gamma = 0.1
  double seconds = 0.0;
};

Fig1Config acceptance_fig1_config() {
  Fig1Config cfg;
  cfg.n = 100;
  cfg.gammas = {0.5, 0.9};
  cfg.m_grid = {250, 500, 1000, 2000, 3000};
  cfg.trials = 20;
  cfg.sc_trials = 20;
  cfg.filter_power = 5;
  cfg.include_sc = true;
  return cfg;
}

const Fig1Runs& fig1_runs() {
  static const Fig1Runs runs = [] {
    const auto start = std::chrono::steady_clock::now();
    Fig1Runs r;
    const Fig1Config cfg = acceptance_fig1_config();
    r.result = run_fig1_experiment(cfg);
    r.seconds = seconds_since(start);
    for (int t = 0; t < cfg.sc_trials; ++t) r.sc_easy.push_back(fig1_sc_trial(cfg, 0.1, t));
    return r;
  }();
  return runs;
}

// 4. Blind error decays over the m grid and is small at m = 3000.
Outcome fig1_decay() {
  Check c;
  const Fig1Runs& runs = fig1_runs();
  const Fig1Config cfg = acceptance_fig1_config();
  for (double gamma : cfg.gammas) {
    std::ostringstream seq;
    int inversions = 0;
    bool within_std = true;
    for (std::size_t i = 0; i < cfg.m_grid.size(); ++i) {
      const Fig1SummaryRow* cur = runs.result.find(gamma, cfg.m_grid[i], "blind");
      if (!cur) return {Status::fail, "missing summary row"};
      seq << cfg.m_grid[i] << ':' << fmt(cur->mean) << "(" << fmt(cur->std) << ") ";
      if (i == 0) continue;
      const Fig1SummaryRow* prev = runs.result.find(gamma, cfg.m_grid[i - 1], "blind");
      if (cur->mean > prev->mean) {
        ++inversions;
        within_std = within_std && cur->mean - prev->mean <= prev->std;
      }
    }
    const double last = runs.result.find(gamma, 3000, "blind")->mean;
    c.note("gamma=" + fmt(gamma) + " means " + seq.str());
    c.require(last <= 0.05, "gamma=" + fmt(gamma) + " mean error at m=3000 <= 0.05 (got " + fmt(last) + ")");
    c.require(inversions <= 1 && within_std,
              "gamma=" + fmt(gamma) + " non-increasing up to one inversion within one std");
  }
  c.note("runtime " + fmt(runs.seconds) + " s (limit 1800 s)");
  c.require(runs.seconds < 1800.0, "runtime within budget");
  return c.done();
}

// 5. Blind detection at gamma = 0.9 against single-snapshot spectral clustering.
Outcome blind_beats_sc() {
  Check c;
  const Fig1Runs& runs = fig1_runs();
  const double blind = runs.result.find(0.9, 3000, "blind")->mean;
  const double sc_hard = runs.result.find(0.9, 1, "sc")->mean;
  double sc_easy = 0.0;
  for (double e : runs.sc_easy) sc_easy += e;
  sc_easy /= static_cast<double>(runs.sc_easy.size());
  c.note("blind(0.9, m=3000) " + fmt(blind) + ", SC(0.9) " + fmt(sc_hard) + ", SC(0.1) " + fmt(sc_easy));
  c.require(blind < sc_hard, "blind(0.9) < SC(0.9)");
  c.require(blind < sc_easy + 0.02, "blind(0.9) < SC(0.1) + 0.02");
  return c.done();
}

// 6. Null model: no block structure is visible in the signals.
Outcome null_model() {
  Check c;
  const PlantedPartitionParams params = PlantedPartitionParams::from_gamma(20, 1.0);
  PParamOptions popts;
  popts.trials = 10000;
  popts.sampling = TripleSampling::exhaustive;
  popts.seed = 0xacc6;
  const CConstantsEstimate est = c_constants_with_error(
      estimate_p_params(params, lowpass_power_filter(diffusion_step(1.0, 20), 5), popts), params.n);
  const double diff = std::abs(est.value.c1 - est.value.c2);
  c.note("|c1-c2| " + fmt(diff) + ", combined SE " + fmt(est.combined12_stderr));
  c.require(diff <= 3.0 * est.combined12_stderr, "|c1-c2| within 3 combined SE");

  Fig1Config cfg = acceptance_fig1_config();
  cfg.gammas = {1.0};
  double total = 0.0;
  for (int t = 0; t < cfg.trials; ++t) total += fig1_blind_trial(cfg, 1.0, 3000, t);
  const double mean = total / cfg.trials;
  c.note("mean blind error at m=3000 " + fmt(mean));
  c.require(mean >= 0.40 && mean <= 0.50, "mean blind error in [0.40, 0.50]");
  return c.done();
}

// 7. Spectral norm of the diffusion filter on sampled graphs.
Outcome filter_norm_bound() {
  Check c;
  const int n = 100;
  // The norm is measured to this resolution; a value within it of 1 is not
  // distinguishable from 1.
  const double resolution = 1e-9;
  for (double gamma : {0.5, 0.9}) {
    const SbmModel model = build_planted_partition(PlantedPartitionParams::from_gamma(n, gamma));
    const GraphFilter filter = lowpass_power_filter(diffusion_step(gamma, n), 5);
    const double h0 = generating_polynomial_at(filter, 0.0);
    double max_norm = 0.0, max_dense = 0.0, max_nonzero = 0.0;
    int below_one = 0, lowpass_ok = 0;
    for (std::uint64_t g = 0; g < 100; ++g) {
      const LaplacianMatrix lap = laplacian(sample_adjacency(model, derive_seed(0xacc7, {seed_key(gamma), g})));
      const NormEstimate est = filter_spectral_norm(filter, lap, 1e-13, 100000, derive_seed(0xacc7, {g}));
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(lap.to_dense(), Eigen::EigenvaluesOnly);
      double dense = 0.0, nonzero = 0.0;
      for (int i = 0; i < n; ++i) {
        const double lambda = solver.eigenvalues()[i];
        const double h = std::abs(generating_polynomial_at(filter, lambda));
        dense = std::max(dense, h);
        if (lambda > 1e-8) nonzero = std::max(nonzero, h);
      }
      const double measured = std::max(est.value, dense);
      max_norm = std::max(max_norm, measured);
      max_dense = std::max(max_dense, dense);
      max_nonzero = std::max(max_nonzero, nonzero);
      if (measured < 1.0 - resolution) ++below_one;
      if (measured <= h0 + resolution) ++lowpass_ok;
    }
    c.note("gamma=" + fmt(gamma) + ": h(0)=" + fmt(h0) + ", max measured norm " + fmt(max_norm) +
           ", max |h(lambda)| over nonzero Laplacian eigenvalues " + fmt(max_nonzero) + ", draws with norm < 1: " +
           std::to_string(below_one) + "/100");
    c.require(below_one == 100, "gamma=" + fmt(gamma) + " measured norm < 1 in every draw");
    c.require(lowpass_ok == 100, "gamma=" + fmt(gamma) + " norm <= h(0) in every draw");
  }
  return c.done();
}

// 8. Senate rollcalls split along the expected lines.
Outcome senate_sanity() {
  const char* env = std::getenv("BLINDCD_SENATE_DATA");
  std::vector<fs::path> candidates;
  if (env && *env) candidates.emplace_back(env);
  candidates.emplace_back(fs::path(BLINDCD_SOURCE_DIR) / "data" / "senate");
  fs::path dir;
  for (const auto& cand : candidates)
    if (fs::exists(cand / "votes.csv") && fs::exists(cand / "members.csv")) {
      dir = cand;
      break;
    }
  if (dir.empty()) return {Status::skip, "no votes.csv/members.csv found (set BLINDCD_SENATE_DATA)"};

#ifdef BLINDCD_ACCEPTANCE_HAVE_APP
  Check c;
  const fs::path scratch = fs::temp_directory_path() / "blindcd_acceptance_senate";
  std::vector<std::map<std::string, int>> runs;
  for (int rep = 0; rep < 2; ++rep) {
    const fs::path out = scratch / std::to_string(rep);
    fs::remove_all(out);
    std::vector<std::string> args{"blindcd",
                                  "senate",
                                  "--votes",
                                  (dir / "votes.csv").string(),
                                  "--members",
                                  (dir / "members.csv").string(),
                                  "--k",
                                  "2",
                                  "--set",
                                  "senate.congress_min=110",
                                  "--set",
                                  "senate.congress_max=114",
                                  "--results-dir",
                                  out.string()};
    std::vector<char*> argv;
    for (auto& a : args) argv.push_back(a.data());
    std::ostringstream sink, err;
    if (app::run_cli(static_cast<int>(argv.size()), argv.data(), sink, err) != 0)
      return {Status::fail, "senate command failed: " + err.str()};
    std::ifstream labels(out / "labels_k2.csv");
    std::string line;
    std::getline(labels, line);
    std::map<std::string, int> by_state;
    while (std::getline(labels, line)) {
      const auto f = split_csv_line(line);
      if (f.size() == 2) by_state[f[0]] = std::stoi(f[1]);
    }
    runs.push_back(by_state);
  }
  auto& s = runs[0];
  for (const char* code : {"CA", "MA", "TX", "AZ"}) c.require(s.count(code) == 1, std::string(code) + " present");
  if (c.ok) {
    c.require(s["CA"] == s["MA"], "CA and MA share a group");
    c.require(s["TX"] == s["AZ"], "TX and AZ share a group");
    c.require(s["CA"] != s["TX"], "the two pairs are in different groups");
  }
  c.require(runs[0] == runs[1], "deterministic under a fixed seed");
  return c.done();
#else
  return {Status::skip, "built without the command line app"};
#endif
}

// 9. Property suites.
Outcome property_suites() {
  const auto start = std::chrono::steady_clock::now();
  Check c;
  Engine eng(0xacc9);

  // Accumulator: merge equals sequential accumulation, merge is associative.
  double worst_merge = 0.0;
  for (int rep = 0; rep < 50; ++rep) {
    const int n = 2 + static_cast<int>(uniform_index(eng, 30));
    const int m = 3 + static_cast<int>(uniform_index(eng, 300));
    Eigen::MatrixXd x(n, m);
    for (int j = 0; j < m; ++j)
      for (int i = 0; i < n; ++i) x(i, j) = uniform(eng, -1.0, 1.0);
    const int cut1 = 1 + static_cast<int>(uniform_index(eng, static_cast<std::uint64_t>(m - 2)));
    const int cut2 = cut1 + 1 + static_cast<int>(uniform_index(eng, static_cast<std::uint64_t>(m - cut1 - 1)));
    CovarianceAccumulator whole(n), a(n), b(n), d(n);
    whole.add_columns(x);
    a.add_columns(x.leftCols(cut1));
    b.add_columns(x.middleCols(cut1, cut2 - cut1));
    d.add_columns(x.rightCols(m - cut2));
    CovarianceAccumulator left = a;  // (a + b) + d
    left.merge(b);
    left.merge(d);
    CovarianceAccumulator bd = b;  // a + (b + d)
    bd.merge(d);
    CovarianceAccumulator right = a;
    right.merge(bd);
    const Eigen::MatrixXd w = whole.finalize();
    worst_merge = std::max({worst_merge, (left.finalize() - w).cwiseAbs().maxCoeff(),
                            (right.finalize() - w).cwiseAbs().maxCoeff(),
                            (left.finalize() - right.finalize()).cwiseAbs().maxCoeff()});
  }
  c.note("accumulator merge max deviation " + fmt(worst_merge));
  c.require(worst_merge <= 1e-12, "merge associativity and equivalence within 1e-12");

  // blind_partition: permutation equivariance and scaling invariance.
  const SbmModel model = build_planted_partition(PlantedPartitionParams::from_gamma(60, 0.3));
  const GraphFilter filter = lowpass_power_filter(diffusion_step(0.3, 60), 5);
  int equivariance_failures = 0, scaling_failures = 0;
  for (std::uint64_t rep = 0; rep < 10; ++rep) {
    const ObservationBatch batch = generate_batch(model, filter, ExcitationSpec::uniform(), 400, rep);
    const Eigen::MatrixXd cov = sample_covariance(batch.signals());
    PipelineConfig pc;
    const Partition base = blind_partition(cov, 2, pc, rep).partition;

    std::vector<int> perm(60);
    std::iota(perm.begin(), perm.end(), 0);
    for (int i = 59; i > 0; --i)
      std::swap(perm[static_cast<std::size_t>(i)],
                perm[uniform_index(eng, static_cast<std::uint64_t>(i + 1))]);
    Eigen::PermutationMatrix<Eigen::Dynamic> p(60);
    for (int i = 0; i < 60; ++i) p.indices()[i] = perm[static_cast<std::size_t>(i)];
    const Eigen::MatrixXd permuted = p * cov * p.transpose();
    const Partition moved = blind_partition(permuted, 2, pc, rep).partition;
    std::vector<int> pulled(60);
    for (int i = 0; i < 60; ++i) pulled[static_cast<std::size_t>(i)] = moved[perm[static_cast<std::size_t>(i)]];
    if (error_rate(Partition(pulled, 2), base).error_rate != 0.0) ++equivariance_failures;

    for (double s : {1e-6, 3.0, 1e5}) {
      const Partition scaled = blind_partition(Eigen::MatrixXd(s * cov), 2, pc, rep).partition;
      if (error_rate(scaled, base).error_rate != 0.0) ++scaling_failures;
    }
  }
  c.require(equivariance_failures == 0, "blind_partition permutation equivariance");
  c.require(scaling_failures == 0, "blind_partition scaling invariance");

  // error_rate invariance under simultaneous node permutation.
  int er_failures = 0;
  for (int rep = 0; rep < 200; ++rep) {
    const int k = 2 + static_cast<int>(uniform_index(eng, 4));
    const int n = k + static_cast<int>(uniform_index(eng, 60));
    std::vector<int> a(static_cast<std::size_t>(n)), b(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      a[static_cast<std::size_t>(i)] = static_cast<int>(uniform_index(eng, static_cast<std::uint64_t>(k)));
      b[static_cast<std::size_t>(i)] = static_cast<int>(uniform_index(eng, static_cast<std::uint64_t>(k)));
    }
    std::vector<int> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), 0);
    for (int i = n - 1; i > 0; --i)
      std::swap(perm[static_cast<std::size_t>(i)], perm[uniform_index(eng, static_cast<std::uint64_t>(i + 1))]);
    std::vector<int> pa(a.size()), pb(b.size());
    for (int i = 0; i < n; ++i) {
      pa[static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])] = a[static_cast<std::size_t>(i)];
      pb[static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])] = b[static_cast<std::size_t>(i)];
    }
    if (error_rate(Partition(a, k), Partition(b, k)).error_rate !=
        error_rate(Partition(pa, k), Partition(pb, k)).error_rate)
      ++er_failures;
  }
  c.require(er_failures == 0, "error_rate permutation invariance");
  budget(c, start, 120.0);
  return c.done();
}

}  // namespace

int main() {
  const std::vector<std::pair<int, std::function<Outcome()>>> criteria = {
      {1, closed_form_spectrum_oracle}, {2, identity_filter_end_to_end}, {3, concentration_rate},
      {4, fig1_decay},                  {5, blind_beats_sc},             {6, null_model},
      {7, filter_norm_bound},           {8, senate_sanity},              {9, property_suites},
  };
  int failures = 0;
  for (const auto& [id, run] : criteria) {
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {Status::fail, std::string("exception: ") + e.what()};
    }
    const char* tag = o.status == Status::pass ? "PASS" : (o.status == Status::fail ? "FAIL" : "SKIP");
    if (o.status == Status::fail) ++failures;
    std::cout << "criterion " << id << ": " << tag << "  " << o.detail << std::endl;
  }
  std::cout << (failures == 0 ? "all criteria passed or skipped" : std::to_string(failures) + " criteria failed")
            << std::endl;
  return failures == 0 ? 0 : 1;
}
