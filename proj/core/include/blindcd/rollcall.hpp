#pragma once

#include <Eigen/Dense>

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace blindcd {

/// Senate rollcalls mapped to one graph signal per rollcall: the entry of a
/// state is the mean vote value of its senators (Yea +1, Nay -1, anything
/// else 0). States are ordered alphabetically by postal code.
struct RollcallSignalSet {
  std::vector<std::string> states;
  std::vector<std::string> rollcalls;
  Eigen::MatrixXd signals;  // states x rollcalls, entries in [-1, 1]
  std::vector<std::string> warnings;

  int n() const { return static_cast<int>(states.size()); }
  int m() const { return static_cast<int>(rollcalls.size()); }
  int state_index(std::string_view code) const;
};

struct RollcallOptions {
  std::optional<int> congress_min;
  std::optional<int> congress_max;
};

/// 1-3 (Yea, paired yea, announced yea) -> +1; 4-6 (announced nay, paired nay,
/// Nay) -> -1; every other code (present, not voting, absent) -> 0.
int vote_value(int cast_code);

/// The 50 state postal codes, sorted.
std::span<const std::string_view> us_state_codes();

/// Votes CSV needs member and cast-code columns plus either `rollcall_id` or
/// `congress` + `rollnumber`; members CSV needs member, state and chamber
/// columns. Both `member_id`/`icpsr` and `state_code`/`state_abbrev` header
/// spellings are accepted. Only chamber == Senate rows are used.
RollcallSignalSet ingest_rollcalls(std::istream& votes, std::istream& members, const RollcallOptions& options = {});
RollcallSignalSet ingest_rollcalls(const std::filesystem::path& votes, const std::filesystem::path& members,
                                   const RollcallOptions& options = {});

}  // namespace blindcd
