#include "blindcd/io.hpp"

#include "blindcd/errors.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>

namespace blindcd {

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  std::array<char, 32> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  return std::string(buf.data(), res.ptr);
}

double parse_double(std::string_view text) {
  while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
  while (!text.empty() && (text.back() == ' ' || text.back() == '\t' || text.back() == '\r')) text.remove_suffix(1);
  if (text == "nan") return std::nan("");
  double value = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    throw DataError("not a number: '" + std::string(text) + "'");
  }
  return value;
}

std::vector<std::string> split_csv_line(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += ch;
    }
  }
  fields.push_back(std::move(cur));
  return fields;
}

std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t hash_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return fnv1a(ss.str());
}

std::string hex64(std::uint64_t value) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << value;
  return os.str();
}

void write_partition_csv(std::ostream& os, const Partition& partition, const std::vector<std::string>& names) {
  if (!names.empty() && static_cast<int>(names.size()) != partition.size()) {
    throw std::invalid_argument("write_partition_csv: name list length does not match");
  }
  os << "node_id,label\n";
  for (int i = 0; i < partition.size(); ++i) {
    if (names.empty()) {
      os << i;
    } else {
      os << names[static_cast<std::size_t>(i)];
    }
    os << ',' << partition[i] << '\n';
  }
}

Partition read_partition_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw DataError("partition CSV is empty");
  std::vector<int> labels;
  int k = 0;
  while (std::getline(is, line)) {
    if (line.empty() || line == "\r") continue;
    const auto fields = split_csv_line(line);
    if (fields.size() < 2) throw DataError("partition CSV: expected node_id,label");
    const int label = static_cast<int>(parse_double(fields[1]));
    if (label < 0) throw DataError("partition CSV: negative label");
    labels.push_back(label);
    k = std::max(k, label + 1);
  }
  if (labels.empty()) throw DataError("partition CSV has no rows");
  return Partition(std::move(labels), k);
}

void write_batch_csv(std::ostream& os, const ObservationBatch& batch) {
  for (int i = 0; i < batch.n(); ++i) os << (i ? "," : "") << "node_" << i;
  os << '\n';
  for (int l = 0; l < batch.m(); ++l) {
    for (int i = 0; i < batch.n(); ++i) os << (i ? "," : "") << format_double(batch.signals()(i, l));
    os << '\n';
  }
}

Eigen::MatrixXd read_batch_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw DataError("batch CSV is empty");
  const std::size_t n = split_csv_line(line).size();
  std::vector<double> values;
  std::size_t m = 0;
  while (std::getline(is, line)) {
    if (line.empty() || line == "\r") continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != n) {
      throw DataError("batch CSV row " + std::to_string(m + 1) + " has " + std::to_string(fields.size()) +
                      " fields, expected " + std::to_string(n));
    }
    for (const auto& f : fields) values.push_back(parse_double(f));
    ++m;
  }
  if (m == 0) throw DataError("batch CSV has no samples");
  Eigen::MatrixXd signals(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(m));
  for (std::size_t l = 0; l < m; ++l)
    for (std::size_t i = 0; i < n; ++i) signals(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(l)) = values[l * n + i];
  return signals;
}

void write_batch_manifest(std::ostream& os, const BatchManifest& manifest) {
  os << "{\n"
     << "  \"n\": " << manifest.n << ",\n"
     << "  \"m\": " << manifest.m << ",\n"
     << "  \"master_seed\": " << manifest.master_seed << ",\n"
     << "  \"model_hash\": \"" << hex64(manifest.model_hash) << "\",\n"
     << "  \"filter_hash\": \"" << hex64(manifest.filter_hash) << "\",\n"
     << "  \"excitation\": \"" << manifest.excitation << "\",\n"
     << "  \"seed_scheme\": \"" << manifest.seed_scheme << "\"\n"
     << "}\n";
}

}  // namespace blindcd
