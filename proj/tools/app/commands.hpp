#pragma once

#include "app/config.hpp"

#include <blindcd/evaluation.hpp>
#include <blindcd/filter.hpp>
#include <blindcd/graph_model.hpp>
#include <blindcd/signal_sim.hpp>
#include <blindcd/spectral.hpp>

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

namespace blindcd::app {

enum ExitCode : int {
  kOk = 0,
  kInternalError = 1,
  kConfigError = 2,
  kDataError = 3,
  kNumericalError = 4,
};

inline constexpr const char* kToolVersion = "blindcd " BLINDCD_APP_VERSION;

PlantedPartitionParams planted_from_config(const Config& config);
GraphFilter filter_from_config(const Config& config, const PlantedPartitionParams& params);
ExcitationSpec excitation_from_config(const Config& config);
PipelineConfig pipeline_from_config(const Config& config, bool center_default);
Fig1Config fig1_from_config(const Config& config);

/// Runs one subcommand, writing its artifacts and run_manifest.json into
/// `results_dir` (created if needed). Throws on failure.
void run_command(const std::string& command, Config& config, const std::filesystem::path& results_dir,
                 std::ostream& out);

/// Full command line entry point; returns the process exit code. Failures
/// print a one-line JSON error record to `err` and, when a results directory
/// exists, write error.json into it.
int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace blindcd::app
