#pragma once

#include "blindcd/graph_model.hpp"
#include "blindcd/signal_sim.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace blindcd {

/// Shortest decimal form that parses back to the same double.
std::string format_double(double value);
double parse_double(std::string_view text);

/// Splits one CSV record; handles double-quoted fields with "" escapes.
std::vector<std::string> split_csv_line(std::string_view line);

std::uint64_t fnv1a(std::string_view bytes);
std::uint64_t hash_file(const std::filesystem::path& path);
std::string hex64(std::uint64_t value);

/// `node_id,label` rows. Node ids are 0-based indices unless `names` is given.
void write_partition_csv(std::ostream& os, const Partition& partition, const std::vector<std::string>& names = {});
Partition read_partition_csv(std::istream& is);

/// m rows x n columns, header node_0..node_{n-1}.
void write_batch_csv(std::ostream& os, const ObservationBatch& batch);
/// Reads the CSV back as an n x m matrix (one sample per column).
Eigen::MatrixXd read_batch_csv(std::istream& is);
/// JSON object with seeds and hashes of a batch.
void write_batch_manifest(std::ostream& os, const BatchManifest& manifest);

}  // namespace blindcd
