#include "blindcd/rollcall.hpp"

#include "blindcd/errors.hpp"
#include "blindcd/io.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <fstream>
#include <map>
#include <tuple>
#include <unordered_map>

namespace blindcd {
namespace {

constexpr std::array<std::string_view, 50> kStates = {
    "AK", "AL", "AR", "AZ", "CA", "CO", "CT", "DE", "FL", "GA", "HI", "IA", "ID", "IL", "IN", "KS", "KY",
    "LA", "MA", "MD", "ME", "MI", "MN", "MO", "MS", "MT", "NC", "ND", "NE", "NH", "NJ", "NM", "NV", "NY",
    "OH", "OK", "OR", "PA", "RI", "SC", "SD", "TN", "TX", "UT", "VA", "VT", "WA", "WI", "WV", "WY"};

std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return std::string(s);
}

class Header {
 public:
  Header(const std::string& line, const char* what) : what_(what) {
    const auto fields = split_csv_line(line);
    for (std::size_t i = 0; i < fields.size(); ++i) index_[lower(trim(fields[i]))] = static_cast<int>(i);
  }
  int find(std::initializer_list<const char*> names) const {
    for (const char* name : names) {
      auto it = index_.find(name);
      if (it != index_.end()) return it->second;
    }
    return -1;
  }
  int require(std::initializer_list<const char*> names) const {
    const int idx = find(names);
    if (idx < 0) throw DataError(std::string(what_) + ": missing column '" + *names.begin() + "'");
    return idx;
  }

 private:
  const char* what_;
  std::map<std::string, int> index_;
};

int to_int(const std::string& field, const char* what) {
  const double v = parse_double(field);
  if (v != static_cast<double>(static_cast<long long>(v))) {
    throw DataError(std::string(what) + ": expected an integer, got '" + field + "'");
  }
  return static_cast<int>(v);
}

const std::string& field_at(const std::vector<std::string>& fields, int idx, std::size_t line_no, const char* what) {
  if (idx < 0 || static_cast<std::size_t>(idx) >= fields.size()) {
    throw DataError(std::string(what) + ": line " + std::to_string(line_no) + " is too short");
  }
  return fields[static_cast<std::size_t>(idx)];
}

bool in_range(const RollcallOptions& o, int congress) {
  return (!o.congress_min || congress >= *o.congress_min) && (!o.congress_max || congress <= *o.congress_max);
}

}  // namespace

int vote_value(int cast_code) {
  if (cast_code >= 1 && cast_code <= 3) return 1;
  if (cast_code >= 4 && cast_code <= 6) return -1;
  return 0;
}

std::span<const std::string_view> us_state_codes() { return kStates; }

int RollcallSignalSet::state_index(std::string_view code) const {
  for (std::size_t i = 0; i < states.size(); ++i)
    if (states[i] == code) return static_cast<int>(i);
  return -1;
}

RollcallSignalSet ingest_rollcalls(std::istream& votes, std::istream& members, const RollcallOptions& options) {
  std::string line;
  if (!std::getline(members, line)) throw DataError("members file is empty");
  const Header mh(line, "members");
  const int m_id = mh.require({"member_id", "icpsr"});
  const int m_state = mh.require({"state_code", "state_abbrev"});
  const int m_chamber = mh.require({"chamber"});
  const int m_congress = mh.find({"congress"});

  if (!std::getline(votes, line)) throw DataError("votes file is empty");
  const Header vh(line, "votes");
  const int v_member = vh.require({"member_id", "icpsr"});
  const int v_cast = vh.require({"cast_code"});
  const int v_rollcall = vh.find({"rollcall_id"});
  const int v_congress = vh.find({"congress"});
  const int v_number = vh.find({"rollnumber"});
  const int v_chamber = vh.find({"chamber"});
  if (v_rollcall < 0 && (v_congress < 0 || v_number < 0)) {
    throw DataError("votes: need a rollcall_id column or congress + rollnumber columns");
  }
  const bool keyed_by_congress = m_congress >= 0 && v_congress >= 0;

  std::unordered_map<std::string, int> member_state;
  std::size_t line_no = 1;
  while (std::getline(members, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto f = split_csv_line(line);
    if (lower(trim(field_at(f, m_chamber, line_no, "members"))) != "senate") continue;
    if (m_congress >= 0 && !in_range(options, to_int(field_at(f, m_congress, line_no, "members"), "members"))) {
      continue;
    }
    const std::string state = trim(field_at(f, m_state, line_no, "members"));
    const auto it = std::lower_bound(kStates.begin(), kStates.end(), state);
    if (it == kStates.end() || *it != state) {
      throw DataError("members: unknown state code '" + state + "' on line " + std::to_string(line_no));
    }
    std::string key = trim(field_at(f, m_id, line_no, "members"));
    if (keyed_by_congress) key = trim(f[static_cast<std::size_t>(m_congress)]) + ":" + key;
    member_state[key] = static_cast<int>(it - kStates.begin());
  }

  struct RollcallKey {
    int congress;
    int number;
    std::string id;
    auto operator<=>(const RollcallKey&) const = default;
  };
  std::map<RollcallKey, std::vector<std::pair<int, int>>> cast;  // rollcall -> (state, value)
  std::size_t skipped = 0;
  line_no = 1;
  while (std::getline(votes, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto f = split_csv_line(line);
    if (v_chamber >= 0 && lower(trim(field_at(f, v_chamber, line_no, "votes"))) != "senate") continue;
    RollcallKey key{0, 0, {}};
    if (v_congress >= 0) key.congress = to_int(field_at(f, v_congress, line_no, "votes"), "votes");
    if (v_congress >= 0 && !in_range(options, key.congress)) continue;
    if (v_rollcall >= 0) {
      key.id = trim(field_at(f, v_rollcall, line_no, "votes"));
    } else {
      key.number = to_int(field_at(f, v_number, line_no, "votes"), "votes");
      key.id = std::to_string(key.congress) + "-" + std::to_string(key.number);
    }
    std::string member = trim(field_at(f, v_member, line_no, "votes"));
    if (keyed_by_congress) member = trim(f[static_cast<std::size_t>(v_congress)]) + ":" + member;
    const auto ms = member_state.find(member);
    if (ms == member_state.end()) {
      ++skipped;
      continue;
    }
    const int code = to_int(field_at(f, v_cast, line_no, "votes"), "votes");
    cast[key].emplace_back(ms->second, vote_value(code));
  }

  RollcallSignalSet out;
  if (skipped > 0) {
    out.warnings.push_back(std::to_string(skipped) + " vote rows reference members that are not senators; skipped");
  }
  const int all_states = static_cast<int>(kStates.size());
  const int m = static_cast<int>(cast.size());
  if (m == 0) throw DataError("no Senate rollcalls found in the votes file");
  Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(all_states, m);
  Eigen::MatrixXi count = Eigen::MatrixXi::Zero(all_states, m);
  int col = 0;
  for (const auto& [key, entries] : cast) {
    out.rollcalls.push_back(key.id);
    for (const auto& [state, value] : entries) {
      sum(state, col) += value;
      ++count(state, col);
    }
    ++col;
  }
  // Every state has two seats: a vacant seat or a missing record counts as 0.
  std::vector<int> keep;
  for (int s = 0; s < all_states; ++s) {
    if (count.row(s).sum() == 0) {
      out.warnings.push_back("state " + std::string(kStates[static_cast<std::size_t>(s)]) +
                             " has no senators in the data; dropped");
      continue;
    }
    keep.push_back(s);
  }
  out.signals.resize(static_cast<Eigen::Index>(keep.size()), m);
  for (std::size_t r = 0; r < keep.size(); ++r) {
    const int s = keep[r];
    out.states.emplace_back(kStates[static_cast<std::size_t>(s)]);
    for (int c = 0; c < m; ++c) out.signals(static_cast<Eigen::Index>(r), c) = sum(s, c) / std::max(2, count(s, c));
  }
  return out;
}

RollcallSignalSet ingest_rollcalls(const std::filesystem::path& votes, const std::filesystem::path& members,
                                   const RollcallOptions& options) {
  std::ifstream v(votes);
  if (!v) throw DataError("cannot open votes file " + votes.string());
  std::ifstream mem(members);
  if (!mem) throw DataError("cannot open members file " + members.string());
  return ingest_rollcalls(v, mem, options);
}

}  // namespace blindcd
