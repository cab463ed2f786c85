#include "app/commands.hpp"

#include <blindcd/covariance.hpp>
#include <blindcd/errors.hpp>
#include <blindcd/io.hpp>
#include <blindcd/rollcall.hpp>

#include <CLI11.hpp>
#include <Eigen/Eigenvalues>

#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <functional>
#include <iomanip>
#include <ostream>
#include <regex>
#include <sstream>

namespace blindcd::app {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Collects artifacts and input hashes for the run manifest.
class RunContext {
 public:
  RunContext(std::string command, Config& config, fs::path dir)
      : command_(std::move(command)), config_(config), dir_(std::move(dir)) {
    fs::create_directories(dir_);
  }

  Config& config() { return config_; }
  const fs::path& dir() const { return dir_; }
  std::uint64_t master_seed() const { return config_.get<std::uint64_t>("seeds.master", 2024); }
  unsigned parallelism() const { return config_.get<unsigned>("runtime.parallelism", 1); }

  void write(const std::string& name, const std::function<void(std::ostream&)>& body) {
    std::ofstream os(dir_ / name, std::ios::binary);
    if (!os) throw DataError("cannot write " + (dir_ / name).string());
    body(os);
    outputs_.push_back(name);
  }

  void write_json(const std::string& name, const json& value) {
    write(name, [&](std::ostream& os) { os << value.dump(2) << '\n'; });
  }

  fs::path input(const std::string& key) {
    const fs::path path = config_.require<std::string>(key);
    if (!fs::exists(path)) throw DataError("input file for '" + key + "' not found: " + path.string());
    inputs_[key] = {{"path", path.string()}, {"fnv1a64", hex64(hash_file(path))}};
    return path;
  }

  void write_manifest() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::ostringstream ts;
    ts << std::put_time(std::gmtime(&t), "%Y-%m-%dT%H:%M:%SZ");
    json manifest = {
        {"manifest_version", 1},
        {"tool_version", kToolVersion},
        {"command", command_},
        {"config", config_.raw()},
        {"resolved_config", config_.resolved()},
        {"master_seed", master_seed()},
        {"input_hashes", inputs_},
        {"outputs", outputs_},
        {"timestamp", ts.str()},
    };
    std::ofstream os(dir_ / "run_manifest.json");
    os << manifest.dump(2) << '\n';
  }

 private:
  std::string command_;
  Config& config_;
  fs::path dir_;
  std::vector<std::string> outputs_;
  json inputs_ = json::object();
};

json to_json(const Eigen::VectorXd& v) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

json partition_diagnostics(const PartitionResult& r, int k) {
  const std::vector<double> values(r.eigenvalues.data(), r.eigenvalues.data() + r.eigenvalues.size());
  return {
      {"k", k},
      {"eigenvalues", to_json(r.eigenvalues)},
      {"relative_eigengap", r.relative_eigengap},
      {"low_confidence", r.low_confidence},
      {"eigen_residual", r.eigen_residual},
      {"inertia", r.inertia},
      {"kmeans_restarts", r.restarts_used},
      {"seed", r.seed},
      {"samples", r.samples},
      {"estimated_num_groups", values.size() >= 2 ? estimate_num_groups(values, static_cast<int>(values.size()) - 1)
                                                  : 1},
  };
}

void cmd_simulate(RunContext& ctx, std::ostream& out) {
  Config& cfg = ctx.config();
  const PlantedPartitionParams params = planted_from_config(cfg);
  const SbmModel model = build_planted_partition(params);
  const GraphFilter filter = filter_from_config(cfg, params);
  const ExcitationSpec spec = excitation_from_config(cfg);
  const int m = cfg.get<int>("simulate.m", 1000);
  const ObservationBatch batch = generate_batch(model, filter, spec, m, ctx.master_seed(), ctx.parallelism());
  ctx.write("batch.csv", [&](std::ostream& os) { write_batch_csv(os, batch); });
  ctx.write("batch_manifest.json", [&](std::ostream& os) { write_batch_manifest(os, batch.manifest()); });
  ctx.write("truth.csv", [&](std::ostream& os) { write_partition_csv(os, model.partition()); });
  if (cfg.get<bool>("simulate.dump_adjacency", false)) {
    const std::uint64_t graph_seed = derive_seed(observation_seed(ctx.master_seed(), 0), {0});
    const AdjacencySample adj = sample_adjacency(model, graph_seed);
    ctx.write("adjacency_0.txt", [&](std::ostream& os) { adj.write_edge_list(os); });
  }
  out << "simulated " << m << " observations on n=" << model.n() << " nodes (a=" << params.a << ", b=" << params.b
      << ")\n";
}

void cmd_pparams(RunContext& ctx, std::ostream& out) {
  Config& cfg = ctx.config();
  const PlantedPartitionParams params = planted_from_config(cfg);
  const GraphFilter filter = filter_from_config(cfg, params);
  PParamOptions opts;
  opts.trials = cfg.get<int>("pparams.trials", 2000);
  opts.seed = ctx.master_seed();
  opts.random_tuples = cfg.get<int>("pparams.random_tuples", 16);
  opts.parallelism = ctx.parallelism();
  const std::string sampling = cfg.get<std::string>("pparams.sampling", "random");
  if (sampling == "representative") {
    opts.sampling = TripleSampling::representative;
  } else if (sampling == "random") {
    opts.sampling = TripleSampling::random;
  } else if (sampling == "exhaustive") {
    opts.sampling = TripleSampling::exhaustive;
  } else {
    throw ConfigError("pparams.sampling must be representative, random or exhaustive");
  }
  const PParams p = estimate_p_params(params, filter, opts);
  const CConstantsEstimate c = c_constants_with_error(p, params.n);
  const ClosedFormSpectrum s = closed_form_spectrum(c.value, params.n);
  ctx.write("pparams.csv", [&](std::ostream& os) {
    os << "param,value,stderr\n";
    for (int i = 0; i < 8; ++i)
      os << 'p' << (i + 1) << ',' << format_double(p.value[i]) << ',' << format_double(p.stderr_[i]) << '\n';
  });
  ctx.write_json("constants.json", {
                                       {"n", params.n},
                                       {"trials", p.trials},
                                       {"c1", c.value.c1},
                                       {"c2", c.value.c2},
                                       {"c3", c.value.c3},
                                       {"c1_stderr", c.stderr_.c1},
                                       {"c2_stderr", c.stderr_.c2},
                                       {"c3_stderr", c.stderr_.c3},
                                       {"c1_minus_c2_stderr", c.diff12_stderr},
                                       {"mu1", s.mu1},
                                       {"mu2", s.mu2},
                                       {"mu_rest", s.mu_rest},
                                       {"recoverable", s.recoverable},
                                   });
  out << "c1=" << c.value.c1 << " c2=" << c.value.c2 << " c3=" << c.value.c3
      << " recoverable=" << (s.recoverable ? "yes" : "no") << '\n';
}

void cmd_spectrum(RunContext& ctx, std::ostream& out) {
  Config& cfg = ctx.config();
  CConstants c;
  int n = 0;
  if (cfg.has("spectrum.c1")) {
    c = {cfg.require<double>("spectrum.c1"), cfg.require<double>("spectrum.c2"), cfg.require<double>("spectrum.c3")};
    n = cfg.require<int>("spectrum.n");
  } else {
    const PlantedPartitionParams params = planted_from_config(cfg);
    PParamOptions opts;
    opts.trials = cfg.get<int>("pparams.trials", 2000);
    opts.seed = ctx.master_seed();
    opts.parallelism = ctx.parallelism();
    c = c_constants(estimate_p_params(params, filter_from_config(cfg, params), opts), params.n);
    n = params.n;
  }
  if (n < 2 || n % 2 != 0) throw ConfigError("spectrum.n must be even and >= 2");
  const ClosedFormSpectrum s = closed_form_spectrum(c, n);
  const Eigen::MatrixXd cy = theoretical_covariance(c, n).matrix();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cy, Eigen::EigenvaluesOnly);
  Eigen::VectorXd numeric = solver.eigenvalues().reverse();

  // Closed-form multiset, sorted descending, for entrywise comparison.
  std::vector<double> closed(static_cast<std::size_t>(n), s.mu_rest);
  closed[0] = s.mu1;
  closed[1] = s.mu2;
  std::sort(closed.begin(), closed.end(), std::greater<>());
  const double scale = std::max(numeric.cwiseAbs().maxCoeff(), 1e-300);
  double max_rel = 0.0;
  for (int i = 0; i < n; ++i) max_rel = std::max(max_rel, std::abs(numeric[i] - closed[static_cast<std::size_t>(i)]) / scale);
  const bool match = max_rel <= 1e-9;
  ctx.write_json("spectrum.json", {
                                      {"n", n},
                                      {"c1", c.c1},
                                      {"c2", c.c2},
                                      {"c3", c.c3},
                                      {"closed_form", {{"mu1", s.mu1}, {"mu2", s.mu2}, {"mu_rest", s.mu_rest}}},
                                      {"numerical_eigenvalues", to_json(numeric)},
                                      {"max_relative_difference", max_rel},
                                      {"match", match},
                                      {"recoverable", s.recoverable},
                                  });
  out << "closed form: mu1=" << s.mu1 << " mu2=" << s.mu2 << " mu=" << s.mu_rest << " (multiplicity " << n - 2
      << ")\n";
  out << "numerical  : ";
  for (int i = 0; i < std::min(n, 6); ++i) out << numeric[i] << (i + 1 < std::min(n, 6) ? ", " : "");
  out << (n > 6 ? ", ..." : "") << '\n';
  out << "max relative difference " << max_rel << (match ? " (match)" : " (MISMATCH)") << '\n';
  out << "recovery condition c1 > |c2|: " << (s.recoverable ? "holds" : "fails") << '\n';
}

void cmd_partition(RunContext& ctx, std::ostream& out) {
  Config& cfg = ctx.config();
  const int k = cfg.get<int>("pipeline.k", 2);
  const PipelineConfig pipeline = pipeline_from_config(cfg, false);
  Eigen::MatrixXd signals;
  std::optional<Partition> truth;
  if (cfg.has("partition.batch")) {
    std::ifstream in(ctx.input("partition.batch"));
    signals = read_batch_csv(in);
    if (cfg.has("partition.truth")) {
      std::ifstream tin(ctx.input("partition.truth"));
      truth = read_partition_csv(tin);
    }
  } else {
    const PlantedPartitionParams params = planted_from_config(cfg);
    const SbmModel model = build_planted_partition(params);
    const ObservationBatch batch =
        generate_batch(model, filter_from_config(cfg, params), excitation_from_config(cfg),
                       cfg.get<int>("simulate.m", 2000), ctx.master_seed(), ctx.parallelism());
    signals = batch.signals();
    truth = model.partition();
  }
  const PartitionResult result =
      blind_partition_from_signals(signals, k, pipeline, derive_seed(ctx.master_seed(), {0x9a27}));
  json diag = partition_diagnostics(result, k);
  diag["center"] = pipeline.center;
  if (truth) {
    if (truth->size() != result.partition.size()) throw DataError("truth partition length does not match the batch");
    const ErrorReport err = error_rate(result.partition, *truth);
    diag["error_rate"] = err.error_rate;
    out << "error rate vs ground truth: " << err.error_rate << '\n';
  }
  ctx.write("labels.csv", [&](std::ostream& os) { write_partition_csv(os, result.partition); });
  ctx.write_json("diagnostics.json", diag);
  out << "partitioned n=" << signals.rows() << " nodes from m=" << signals.cols() << " samples into k=" << k
      << " groups" << (result.low_confidence ? " (low confidence: small eigengap)" : "") << '\n';
}

void cmd_fig1(RunContext& ctx, std::ostream& out) {
  const Fig1Config fc = fig1_from_config(ctx.config());
  const Fig1Result result = run_fig1_experiment(fc);
  ctx.write("raw.csv", [&](std::ostream& os) { write_fig1_raw_csv(os, result); });
  ctx.write("summary.csv", [&](std::ostream& os) { write_fig1_summary_csv(os, result); });
  if (ctx.config().get<bool>("fig1.svg", true)) {
    ctx.write("fig1.svg", [&](std::ostream& os) { write_fig1_svg(os, result); });
  }
  std::size_t failures = 0;
  for (const auto& r : result.raw)
    if (!r.failure.empty()) ++failures;
  for (const auto& s : result.summary) {
    out << "gamma=" << s.gamma << " m=" << s.m << ' ' << s.method << ": mean=" << s.mean << " std=" << s.std << '\n';
  }
  if (failures > 0) out << failures << " trial(s) failed; see raw.csv\n";
}

void cmd_probe(RunContext& ctx, std::ostream& out) {
  Config& cfg = ctx.config();
  const PlantedPartitionParams params = planted_from_config(cfg);
  const SbmModel model = build_planted_partition(params);
  const GraphFilter filter = filter_from_config(cfg, params);
  const ExcitationSpec spec = excitation_from_config(cfg);
  ProbeOptions opts;
  opts.m_grid = cfg.get<std::vector<int>>("probe.m_grid", {250, 500, 1000, 2000, 4000});
  opts.trials = cfg.get<int>("probe.trials", 10);
  opts.seed = ctx.master_seed();
  opts.parallelism = ctx.parallelism();

  Eigen::MatrixXd reference;
  const std::string ref = cfg.get<std::string>("probe.reference", "theory");
  if (ref == "theory") {
    PParamOptions popts;
    popts.trials = cfg.get<int>("probe.reference_trials", 4000);
    popts.sampling = TripleSampling::exhaustive;
    popts.seed = derive_seed(ctx.master_seed(), {0x7e0});
    popts.parallelism = ctx.parallelism();
    const CConstants c = c_constants(estimate_p_params(params, filter, popts), params.n);
    reference = spec.variance() * theoretical_covariance(c, params.n).matrix();
  } else if (ref == "heldout") {
    CovarianceAccumulator acc(model.n());
    const int big_m = cfg.get<int>("probe.heldout_m", 200000);
    const std::uint64_t seed = derive_seed(ctx.master_seed(), {0x4e1d});
    for (int l = 0; l < big_m; ++l) acc.add(generate_observation(model, filter, spec, observation_seed(seed, l)).y);
    reference = acc.finalize();
  } else {
    throw ConfigError("probe.reference must be 'theory' or 'heldout'");
  }
  const ProbeResult result = concentration_probe(model, filter, spec, reference, opts);
  ctx.write("probe.csv", [&](std::ostream& os) {
    os << "m,trial,spectral_error\n";
    for (const auto& r : result.raw) os << r.m << ',' << r.trial << ',' << format_double(r.spectral_error) << '\n';
  });
  ctx.write("probe_summary.csv", [&](std::ostream& os) {
    os << "m,mean,std\n";
    for (const auto& s : result.summary) os << s.m << ',' << format_double(s.mean) << ',' << format_double(s.std) << '\n';
    os << "slope_fit," << format_double(result.slope) << ',' << format_double(result.intercept) << '\n';
  });
  for (const auto& s : result.summary) out << "m=" << s.m << " mean error " << s.mean << " (std " << s.std << ")\n";
  out << "log-log slope " << result.slope << '\n';
}

void cmd_senate(RunContext& ctx, std::ostream& out) {
  Config& cfg = ctx.config();
  RollcallOptions ropts;
  if (cfg.has("senate.congress_min")) ropts.congress_min = cfg.require<int>("senate.congress_min");
  if (cfg.has("senate.congress_max")) ropts.congress_max = cfg.require<int>("senate.congress_max");
  const fs::path votes = ctx.input("senate.votes");
  const fs::path members = ctx.input("senate.members");
  const RollcallSignalSet data = ingest_rollcalls(votes, members, ropts);
  for (const auto& w : data.warnings) out << "warning: " << w << '\n';

  const PipelineConfig pipeline = pipeline_from_config(cfg, true);
  const auto ks = cfg.get<std::vector<int>>("pipeline.k_list", {2, 4});
  std::ostringstream report;
  report << "states: " << data.n() << ", rollcalls: " << data.m() << '\n';
  report << "covariance: "
         << (pipeline.center ? "centered (rollcall signals are not zero-mean; set pipeline.center=false for the "
                               "uncentered second moment)"
                             : "uncentered second moment")
         << '\n';
  for (int k : ks) {
    const PartitionResult result = blind_partition_from_signals(
        data.signals, k, pipeline, derive_seed(ctx.master_seed(), {0x5e, static_cast<std::uint64_t>(k)}));
    const std::string suffix = "_k" + std::to_string(k);
    ctx.write("labels" + suffix + ".csv",
              [&](std::ostream& os) { write_partition_csv(os, result.partition, data.states); });
    json diag = partition_diagnostics(result, k);
    diag["center"] = pipeline.center;
    diag["states"] = data.states;
    ctx.write_json("diagnostics" + suffix + ".json", diag);
    report << "k=" << k << ":";
    for (int g = 0; g < k; ++g) {
      report << "\n  group " << g << ":";
      for (int i = 0; i < data.n(); ++i)
        if (result.partition[i] == g) report << ' ' << data.states[static_cast<std::size_t>(i)];
    }
    report << '\n';
  }
  ctx.write("report.txt", [&](std::ostream& os) { os << report.str(); });
  out << report.str();
}

using Handler = void (*)(RunContext&, std::ostream&);

Handler find_handler(const std::string& command) {
  static const std::map<std::string, Handler> handlers = {
      {"simulate", cmd_simulate}, {"pparams", cmd_pparams}, {"spectrum", cmd_spectrum},
      {"partition", cmd_partition}, {"fig1", cmd_fig1},     {"probe", cmd_probe},
      {"senate", cmd_senate},
  };
  const auto it = handlers.find(command);
  if (it == handlers.end()) throw ConfigError("unknown command '" + command + "'");
  return it->second;
}

std::pair<std::string, double> parse_rule(const std::string& rule) {
  static const std::regex pattern(R"(^\s*([a-z_]+)\s*(?:\(\s*([-+0-9.eE]+)\s*\))?\s*$)");
  std::smatch match;
  if (!std::regex_match(rule, match, pattern)) throw ConfigError("cannot parse filter.alpha_rule '" + rule + "'");
  const double value = match[2].matched ? std::stod(match[2].str()) : std::nan("");
  return {match[1].str(), value};
}

fs::path make_results_dir(const fs::path& root, const std::string& command) {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::ostringstream name;
  name << command << '-' << std::put_time(std::gmtime(&t), "%Y%m%dT%H%M%SZ");
  fs::path dir = root / name.str();
  for (int i = 1; fs::exists(dir); ++i) dir = root / (name.str() + "-" + std::to_string(i));
  return dir;
}

}  // namespace

PlantedPartitionParams planted_from_config(const Config& config) {
  const int n = config.get<int>("model.n", 100);
  if (config.has("model.a") || config.has("model.b")) {
    PlantedPartitionParams p{n, config.require<double>("model.a"), config.require<double>("model.b"), std::nullopt};
    if (p.a > 0.0) p.gamma = p.b / p.a;
    return p;
  }
  const double gamma = config.get<double>("model.gamma", 0.5);
  if (n < 2) throw ConfigError("model.n must be >= 2");
  return PlantedPartitionParams::from_gamma(n, gamma);
}

GraphFilter filter_from_config(const Config& config, const PlantedPartitionParams& params) {
  if (config.has("filter.coeffs")) return GraphFilter(config.require<std::vector<double>>("filter.coeffs"));
  const int p = config.get<int>("filter.p", 5);
  const auto [rule, value] = parse_rule(config.get<std::string>("filter.alpha_rule", "paper"));
  if (rule == "fixed") {
    if (std::isnan(value)) throw ConfigError("filter.alpha_rule fixed(v) needs a value");
    return lowpass_power_filter(value, p);
  }
  if (rule == "paper") {
    const double gamma = std::isnan(value) ? params.gamma.value_or(std::nan("")) : value;
    if (std::isnan(gamma)) throw ConfigError("filter.alpha_rule paper needs gamma (model.gamma or paper(gamma))");
    return lowpass_power_filter(diffusion_step(gamma, params.n), p);
  }
  throw ConfigError("filter.alpha_rule must be fixed(v) or paper(gamma)");
}

ExcitationSpec excitation_from_config(const Config& config) {
  const std::string kind = config.get<std::string>("excitation.kind", "uniform");
  if (kind == "uniform") {
    return ExcitationSpec::uniform(config.get<double>("excitation.b", 1.0),
                                   config.get<bool>("excitation.unit_variance", false));
  }
  if (kind == "rademacher") return ExcitationSpec::rademacher();
  throw ConfigError("excitation.kind must be uniform or rademacher");
}

PipelineConfig pipeline_from_config(const Config& config, bool center_default) {
  PipelineConfig p;
  p.center = config.get<bool>("pipeline.center", center_default);
  p.normalize_rows = config.get<bool>("pipeline.normalize_rows", false);
  p.min_relative_gap = config.get<double>("pipeline.min_relative_gap", p.min_relative_gap);
  p.kmeans.restarts = config.get<int>("kmeans.restarts", p.kmeans.restarts);
  p.kmeans.max_iter = config.get<int>("kmeans.max_iter", p.kmeans.max_iter);
  p.kmeans.tol = config.get<double>("kmeans.tol", p.kmeans.tol);
  p.kmeans.parallelism = config.get<unsigned>("runtime.parallelism", 1);
  return p;
}

Fig1Config fig1_from_config(const Config& config) {
  Fig1Config fc;
  fc.n = config.get<int>("model.n", fc.n);
  fc.gammas = config.get<std::vector<double>>("fig1.gammas", fc.gammas);
  fc.m_grid = config.get<std::vector<int>>("fig1.m_grid", fc.m_grid);
  fc.trials = config.get<int>("fig1.trials", fc.trials);
  fc.sc_trials = config.get<int>("fig1.sc_trials", fc.sc_trials);
  fc.include_sc = config.get<bool>("fig1.include_sc", fc.include_sc);
  fc.filter_power = config.get<int>("filter.p", fc.filter_power);
  const auto [rule, value] = parse_rule(config.get<std::string>("filter.alpha_rule", "paper"));
  if (rule == "fixed") {
    fc.fixed_alpha = value;
  } else if (rule != "paper") {
    throw ConfigError("fig1 supports filter.alpha_rule paper or fixed(v)");
  }
  fc.excitation = excitation_from_config(config);
  fc.pipeline = pipeline_from_config(config, false);
  fc.pipeline.kmeans.parallelism = 1;
  fc.sc.kmeans = fc.pipeline.kmeans;
  fc.sc.normalized = config.get<bool>("fig1.sc_normalized", false);
  fc.master_seed = config.get<std::uint64_t>("seeds.master", 2024);
  fc.parallelism = config.get<unsigned>("runtime.parallelism", 1);
  return fc;
}

void run_command(const std::string& command, Config& config, const fs::path& results_dir, std::ostream& out) {
  const Handler handler = find_handler(command);
  RunContext ctx(command, config, results_dir);
  handler(ctx, out);
  ctx.write_manifest();
  out << "results: " << results_dir.string() << '\n';
}

int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App cli{"Blind community detection from filtered graph signals"};
  cli.require_subcommand(1);
  cli.set_version_flag("--version", kToolVersion);

  std::string config_path;
  std::vector<std::string> overrides;
  std::string out_root = "results";
  std::string results_dir;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("-c,--config", config_path, "JSON config file");
    sub->add_option("-s,--set", overrides, "Override a config key: key=value")->allow_extra_args(false);
    sub->add_option("-o,--out", out_root, "Root directory for timestamped results");
    sub->add_option("--results-dir", results_dir, "Exact results directory (overrides --out)");
  };

  std::map<std::string, CLI::App*> subs;
  const std::vector<std::pair<std::string, std::string>> commands = {
      {"simulate", "Generate an observation batch"},
      {"pparams", "Estimate the filter moments p1..p8 and constants c1..c3"},
      {"spectrum", "Compare the closed-form covariance spectrum with a numerical one"},
      {"partition", "Blind partition of a batch (file or simulated)"},
      {"fig1", "Error rate against sample size, with the single-graph baseline"},
      {"probe", "Concentration of the sample covariance against m"},
      {"senate", "Ingest Senate rollcalls and partition the states"},
  };
  for (const auto& [name, help] : commands) {
    subs[name] = cli.add_subcommand(name, help);
    add_common(subs[name]);
  }
  std::string batch_file, truth_file, votes_file, members_file;
  std::vector<int> senate_k;
  subs["partition"]->add_option("--batch", batch_file, "Batch CSV (m rows x n columns)");
  subs["partition"]->add_option("--truth", truth_file, "Ground-truth node_id,label CSV");
  subs["senate"]->add_option("--votes", votes_file, "Rollcall votes CSV");
  subs["senate"]->add_option("--members", members_file, "Members CSV");
  subs["senate"]->add_option("--k", senate_k, "Group counts (overrides pipeline.k_list)");

  std::string manifest_path;
  CLI::App* replay = cli.add_subcommand("replay", "Re-run the command recorded in a run manifest");
  replay->add_option("--manifest", manifest_path, "run_manifest.json")->required();
  replay->add_option("-o,--out", out_root, "Root directory for timestamped results");
  replay->add_option("--results-dir", results_dir, "Exact results directory");

  fs::path dir;
  auto fail = [&](int code, const std::string& kind, const std::string& message) {
    const json record = {{"error", kind}, {"message", message}, {"exit_code", code}};
    err << record.dump() << '\n';
    if (!dir.empty() && fs::exists(dir)) {
      std::ofstream os(dir / "error.json");
      os << record.dump(2) << '\n';
    }
    return code;
  };

  try {
    cli.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return cli.exit(e, out, err);
  } catch (const CLI::CallForVersion& e) {
    return cli.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    return fail(kConfigError, "usage", e.what());
  }

  try {
    std::string command;
    Config config;
    if (replay->parsed()) {
      std::ifstream in(manifest_path);
      if (!in) throw ConfigError("cannot open manifest " + manifest_path);
      const json manifest = json::parse(in, nullptr, false);
      if (manifest.is_discarded() || !manifest.contains("command") || !manifest.contains("config")) {
        throw ConfigError("not a run manifest: " + manifest_path);
      }
      command = manifest["command"].get<std::string>();
      config = Config(manifest["config"]);
      const json inputs = manifest.value("input_hashes", json::object());
      for (const auto& [key, entry] : inputs.items()) {
        const fs::path path = entry.at("path").get<std::string>();
        if (!fs::exists(path) || hex64(hash_file(path)) != entry.at("fnv1a64").get<std::string>()) {
          throw DataError("input '" + key + "' (" + path.string() + ") differs from the recorded run");
        }
      }
    } else {
      for (const auto& [name, sub] : subs)
        if (sub->parsed()) command = name;
      if (!config_path.empty()) config = Config::load(config_path);
      for (const auto& o : overrides) config.apply_override(o);
      if (!batch_file.empty()) config.set("partition.batch", batch_file);
      if (!truth_file.empty()) config.set("partition.truth", truth_file);
      if (!votes_file.empty()) config.set("senate.votes", votes_file);
      if (!members_file.empty()) config.set("senate.members", members_file);
      if (!senate_k.empty()) config.set("pipeline.k_list", senate_k);
    }
    dir = results_dir.empty() ? make_results_dir(out_root, command) : fs::path(results_dir);
    run_command(command, config, dir, out);
    return kOk;
  } catch (const ConfigError& e) {
    return fail(kConfigError, "config", e.what());
  } catch (const std::invalid_argument& e) {
    return fail(kConfigError, "invalid_argument", e.what());
  } catch (const DataError& e) {
    return fail(kDataError, "data", e.what());
  } catch (const NumericalError& e) {
    return fail(kNumericalError, "numerical", e.what());
  } catch (const nlohmann::json::exception& e) {
    return fail(kConfigError, "config", e.what());
  } catch (const fs::filesystem_error& e) {
    return fail(kDataError, "filesystem", e.what());
  } catch (const std::exception& e) {
    return fail(kInternalError, "internal", e.what());
  }
}

}  // namespace blindcd::app
