#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "ptlab/io.hpp"

using namespace ptlab;

namespace {

fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / ("ptlab_io_" + name);
  fs::remove_all(p);
  return p;
}

std::vector<std::string> lines_of(const fs::path& p) {
  std::ifstream in(p);
  std::vector<std::string> out;
  for (std::string s; std::getline(in, s);) out.push_back(s);
  return out;
}

}  // namespace

TEST(Io, Fnv1aKnownValues) {
  EXPECT_EQ(fnv1a64(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
  EXPECT_EQ(hex64(0xabcULL), "0000000000000abc");
}

TEST(Io, DoubleFormattingRoundTrips) {
  for (double x : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, 0.0})
    EXPECT_EQ(std::strtod(fmt_double(x).c_str(), nullptr), x);
  EXPECT_EQ(fmt_double(0.1), "0.1");
}

TEST(Io, ManifestHashIgnoresOutputs) {
  RunManifest a;
  a.subcommand = "sd";
  a.params = {{"n", 12}};
  a.seed = 7;
  RunManifest b = a;
  b.outputs = {"x.csv"};
  EXPECT_EQ(a.hash(), b.hash());
  b.seed = 8;
  EXPECT_NE(a.hash(), b.hash());
  const auto back = RunManifest::from_json(a.to_json());
  EXPECT_EQ(back.hash(), a.hash());
  EXPECT_THROW(RunManifest::from_json(json{{"version", 1}}), InputError);
}

TEST(Io, ManifestDetectsChangedInput) {
  const auto dir = scratch("inputs");
  fs::create_directories(dir);
  const auto file = (dir / "in.json").string();
  std::ofstream(file) << "{\"a\": 1}";
  RunManifest m;
  m.subcommand = "x";
  m.add_input(file);
  EXPECT_NO_THROW(m.verify_inputs());
  std::ofstream(file) << "{\"a\": 2}";
  EXPECT_THROW(m.verify_inputs(), Error);
}

TEST(Io, CsvHeaderAndRowChecks) {
  const auto dir = scratch("csv");
  OutputSink sink(dir, "00000000deadbeef");
  {
    CsvWriter csv(sink, "t.csv", {"a", "b_meV"});
    csv.row(1, 0.5);
    csv.cell(2);
    EXPECT_THROW(csv.end_row(), Error);
    csv.cell(3.0);
    EXPECT_THROW(csv.cell(4), Error);
    csv.end_row();
  }
  const auto lines = lines_of(dir / "t.csv");
  ASSERT_EQ(lines.size(), 4u);
  EXPECT_EQ(lines[0], "# version=1 manifest=00000000deadbeef");
  EXPECT_EQ(lines[1], "a,b_meV");
  EXPECT_EQ(lines[2], "1,0.5");
  EXPECT_EQ(lines[3], "2,3");
  EXPECT_EQ(sink.written(), std::vector<std::string>{"t.csv"});
}

TEST(Io, HistogramWeightsSumToOne) {
  const auto dir = scratch("hist");
  OutputSink sink(dir, "h");
  write_histogram_csv(sink, "e.csv", {0.0, 1.0, 2.0, 3.0}, {2.0, 5.0, 1.0}, "energy");
  const auto lines = lines_of(dir / "e.csv");
  ASSERT_EQ(lines.size(), 5u);
  EXPECT_EQ(lines[1], "bin_lo_energy,bin_hi_energy,weight");
  double total = 0.0;
  for (std::size_t k = 2; k < lines.size(); ++k) total += std::stod(lines[k].substr(lines[k].rfind(',') + 1));
  EXPECT_NEAR(total, 1.0, 1e-15);
  EXPECT_THROW(write_histogram_csv(sink, "bad.csv", {0.0, 1.0}, {1.0, 2.0}, "x"), Error);
}

TEST(Io, JsonStampedWithManifestHash) {
  const auto dir = scratch("json");
  OutputSink sink(dir, "abc");
  sink.write_json("r.json", {{"x", 1.5}});
  const auto j = read_json_file((dir / "r.json").string());
  EXPECT_EQ(j.at("manifest_hash"), "abc");
  EXPECT_EQ(j.at("version"), 1);
  EXPECT_EQ(j.at("x"), 1.5);
}

TEST(Io, DownfoldedBinaryRoundTrip) {
  const auto dir = scratch("bin");
  OutputSink sink(dir, "m");
  DownfoldedMatrix m;
  m.H = Eigen::MatrixXd::Random(5, 5);
  m.H = (m.H + m.H.transpose()).eval();
  m.n = 12;
  m.amplitude_mode = "unit_A";
  write_downfolded(sink, "df", m);
  EXPECT_EQ(read_downfolded_bin((dir / "df.bin").string()), m.H);
  EXPECT_TRUE(fs::exists(dir / "df.csv"));
  EXPECT_EQ(read_json_file((dir / "df.json").string()).at("rows"), 5);
  write_downfolded(sink, "big", m, 4);
  EXPECT_FALSE(fs::exists(dir / "big.csv"));
  std::ofstream(dir / "junk.bin") << "not a matrix at all, definitely";
  EXPECT_THROW(read_downfolded_bin((dir / "junk.bin").string()), InputError);
}
