#include <blindcd/errors.hpp>
#include <blindcd/io.hpp>
#include <blindcd/rollcall.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

using namespace blindcd;

namespace {

const char* kMembers =
    "congress,chamber,icpsr,state_abbrev,party_code\n"
    "110,Senate,1,CA,100\n"
    "110,Senate,2,CA,100\n"
    "110,Senate,3,TX,200\n"
    "110,Senate,4,TX,200\n"
    "110,Senate,5,MA,100\n"
    "110,Senate,6,MA,100\n"
    "110,House,7,CA,100\n";

RollcallSignalSet ingest(const std::string& votes, const std::string& members = kMembers) {
  std::istringstream v(votes), m(members);
  return ingest_rollcalls(v, m);
}

}  // namespace

TEST(FormatDouble, RoundTripsShortest) {
  for (double v : {0.1, -2.5e-17, 1.0 / 3.0, 12345.678, 0.0}) EXPECT_EQ(parse_double(format_double(v)), v);
  EXPECT_EQ(format_double(0.5), "0.5");
  EXPECT_EQ(format_double(std::nan("")), "nan");
  EXPECT_THROW(parse_double("abc"), DataError);
  EXPECT_THROW(parse_double("1.5x"), DataError);
}

TEST(SplitCsvLine, Quotes) {
  EXPECT_EQ(split_csv_line("a,\"b,c\",d"), (std::vector<std::string>{"a", "b,c", "d"}));
  EXPECT_EQ(split_csv_line("x,,\"he said \"\"hi\"\"\""), (std::vector<std::string>{"x", "", "he said \"hi\""}));
}

TEST(PartitionCsv, RoundTrip) {
  const Partition p({1, 0, 0, 2, 1}, 3);
  std::ostringstream os;
  write_partition_csv(os, p);
  EXPECT_EQ(os.str().substr(0, os.str().find('\n')), "node_id,label");
  std::istringstream is(os.str());
  EXPECT_EQ(read_partition_csv(is), p);

  std::ostringstream named;
  write_partition_csv(named, Partition({0, 1}, 2), {"AK", "AL"});
  EXPECT_EQ(named.str(), "node_id,label\nAK,0\nAL,1\n");
}

TEST(BatchCsv, RoundTripIsExact) {
  const SbmModel m = build_planted_partition(PlantedPartitionParams::from_gamma(12, 0.5));
  const ObservationBatch batch = generate_batch(m, lowpass_power_filter(0.05, 5), ExcitationSpec::uniform(), 9, 3);
  std::ostringstream os;
  write_batch_csv(os, batch);
  std::istringstream is(os.str());
  const Eigen::MatrixXd back = read_batch_csv(is);
  EXPECT_TRUE(back == batch.signals());
  EXPECT_EQ(os.str().substr(0, 14), "node_0,node_1,");
}

TEST(BatchCsv, RaggedRowsRejected) {
  std::istringstream is("node_0,node_1\n1,2\n3\n");
  EXPECT_THROW(read_batch_csv(is), DataError);
}

TEST(Hashing, Fnv1aKnownValues) {
  EXPECT_EQ(fnv1a(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(fnv1a("a"), 0xaf63dc4c8601ec8cULL);
  EXPECT_EQ(hex64(0xabcULL), "0000000000000abc");
}

TEST(VoteValue, CodeMapping) {
  for (int c : {1, 2, 3}) EXPECT_EQ(vote_value(c), 1);
  for (int c : {4, 5, 6}) EXPECT_EQ(vote_value(c), -1);
  for (int c : {0, 7, 8, 9}) EXPECT_EQ(vote_value(c), 0);
}

TEST(Rollcall, StateAverages) {
  const RollcallSignalSet s = ingest(
      "congress,chamber,rollnumber,icpsr,cast_code\n"
      "110,Senate,1,1,1\n"
      "110,Senate,1,2,1\n"    // CA both Yea
      "110,Senate,1,3,1\n"
      "110,Senate,1,4,6\n"    // TX Yea + Nay
      "110,Senate,1,5,1\n"
      "110,Senate,1,6,9\n");  // MA Yea + absent
  ASSERT_EQ(s.m(), 1);
  EXPECT_EQ(s.states, (std::vector<std::string>{"CA", "MA", "TX"}));
  EXPECT_EQ(s.signals(s.state_index("CA"), 0), 1.0);
  EXPECT_EQ(s.signals(s.state_index("TX"), 0), 0.0);
  EXPECT_EQ(s.signals(s.state_index("MA"), 0), 0.5);
}

TEST(Rollcall, MissingRecordCountsAsZero) {
  const RollcallSignalSet s = ingest(
      "congress,chamber,rollnumber,icpsr,cast_code\n"
      "110,Senate,1,1,1\n"
      "110,Senate,1,3,6\n"
      "110,Senate,1,4,6\n"
      "110,Senate,2,5,1\n"
      "110,Senate,2,6,1\n");
  ASSERT_EQ(s.m(), 2);
  EXPECT_EQ(s.signals(s.state_index("CA"), 0), 0.5);
  EXPECT_EQ(s.signals(s.state_index("TX"), 0), -1.0);
  EXPECT_EQ(s.signals(s.state_index("MA"), 0), 0.0);
  EXPECT_EQ(s.signals(s.state_index("MA"), 1), 1.0);
  EXPECT_EQ(s.signals(s.state_index("CA"), 1), 0.0);
  EXPECT_EQ(s.rollcalls, (std::vector<std::string>{"110-1", "110-2"}));
}

TEST(Rollcall, EntriesBounded) {
  std::ostringstream votes;
  votes << "rollcall_id,member_id,cast_code\n";
  std::mt19937_64 eng(1);
  for (int r = 0; r < 40; ++r)
    for (int mbr = 1; mbr <= 6; ++mbr) votes << "r" << r << ',' << mbr << ',' << eng() % 10 << '\n';
  const std::string members =
      "member_id,state_code,chamber\n1,CA,senate\n2,CA,senate\n3,TX,senate\n4,TX,senate\n5,MA,senate\n6,MA,senate\n";
  const RollcallSignalSet s = ingest(votes.str(), members);
  EXPECT_EQ(s.m(), 40);
  EXPECT_LE(s.signals.cwiseAbs().maxCoeff(), 1.0);
  // Every entry is a multiple of 1/2.
  EXPECT_TRUE(((2.0 * s.signals).array() == (2.0 * s.signals).array().round()).all());
}

TEST(Rollcall, StatesWithoutSenatorsDropped) {
  const RollcallSignalSet s = ingest("congress,chamber,rollnumber,icpsr,cast_code\n110,Senate,1,1,1\n");
  EXPECT_EQ(s.states, (std::vector<std::string>{"CA"}));
  bool warned = false;
  for (const auto& w : s.warnings) warned = warned || w.find("AK") != std::string::npos;
  EXPECT_TRUE(warned);
  EXPECT_EQ(s.state_index("AK"), -1);
}

TEST(Rollcall, NonSenatorVotesSkippedWithWarning) {
  const RollcallSignalSet s = ingest(
      "congress,chamber,rollnumber,icpsr,cast_code\n110,Senate,1,1,1\n110,Senate,1,7,1\n");
  bool warned = false;
  for (const auto& w : s.warnings) warned = warned || w.find("skipped") != std::string::npos;
  EXPECT_TRUE(warned);
}

TEST(Rollcall, UnknownStateIsDataError) {
  EXPECT_THROW(ingest("congress,chamber,rollnumber,icpsr,cast_code\n110,Senate,1,1,1\n",
                      "congress,chamber,icpsr,state_abbrev\n110,Senate,1,XX\n"),
               DataError);
}

TEST(Rollcall, MissingColumnIsDataError) {
  EXPECT_THROW(ingest("congress,rollnumber,icpsr\n110,1,1\n"), DataError);
}

TEST(Rollcall, CongressRange) {
  const std::string members = std::string(kMembers) + "111,Senate,1,CA,100\n";
  std::istringstream v(
      "congress,chamber,rollnumber,icpsr,cast_code\n110,Senate,1,1,1\n111,Senate,1,1,6\n"),
      m(members);
  RollcallOptions opts;
  opts.congress_min = 111;
  const RollcallSignalSet s = ingest_rollcalls(v, m, opts);
  ASSERT_EQ(s.m(), 1);
  EXPECT_EQ(s.signals(s.state_index("CA"), 0), -0.5);
}

TEST(Rollcall, FiftyStateCodes) {
  const auto codes = us_state_codes();
  EXPECT_EQ(codes.size(), 50u);
  EXPECT_TRUE(std::is_sorted(codes.begin(), codes.end()));
}
