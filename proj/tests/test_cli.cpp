#include "commands.hpp"

#include <gtest/gtest.h>

#include <cstdio>
#include <fstream>
#include <sstream>

using hl::cli::run;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result call(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> v;
  std::istringstream in(s);
  for (std::string line; std::getline(in, line);) v.push_back(line);
  return v;
}

std::vector<std::string> split(const std::string& s) {
  std::vector<std::string> v;
  std::istringstream in(s);
  for (std::string f; std::getline(in, f, ',');) v.push_back(f);
  return v;
}

}  // namespace

TEST(Cli, GridParsing) {
  EXPECT_TRUE(hl::cli::parse_grid("").empty());
  EXPECT_EQ(hl::cli::parse_grid("0.5,1"), (std::vector<double>{0.5, 1.0}));
  const auto g = hl::cli::parse_grid("0.01:0.99:99");
  ASSERT_EQ(g.size(), 99u);
  EXPECT_DOUBLE_EQ(g.front(), 0.01);
  EXPECT_DOUBLE_EQ(g.back(), 0.99);
  EXPECT_THROW(hl::cli::parse_grid("0.1:0.2"), std::invalid_argument);
  EXPECT_THROW(hl::cli::parse_grid("a,b"), std::invalid_argument);
}

TEST(Cli, BoundsRows) {
  const auto r = call({"bounds", "--grid", "1.0,0.5"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto ls = lines(r.out);
  ASSERT_EQ(ls.size(), 4u);
  EXPECT_EQ(ls[0].front(), '#');
  EXPECT_EQ(nlohmann::json::parse(ls[0].substr(1)).at("command"), "bounds");
  EXPECT_EQ(ls[1], "alpha,lower,upper,trivial");
  const auto row1 = split(ls[2]);
  EXPECT_NEAR(std::stod(row1[1]), 0.08295, 5e-5);
  EXPECT_EQ(std::stod(row1[2]), 0.5);
  EXPECT_NEAR(std::stod(row1[3]), 0.58496, 5e-6);
  const auto row2 = split(ls[3]);
  EXPECT_NEAR(std::stod(row2[1]), 0.02769, 5e-6);
  EXPECT_NEAR(std::stod(row2[2]), 0.29289, 5e-6);
}

TEST(Cli, BoundsEmptyGridIsHeaderOnly) {
  const auto r = call({"bounds", "--grid", ""});
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(lines(r.out).size(), 2u);
}

TEST(Cli, BoundsBigPrecision) {
  const auto r = call({"bounds", "--grid", "1", "--precision", "big"});
  ASSERT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("0.0829509633797873375784450327"), std::string::npos);
}

TEST(Cli, BoundsRejectsGridOutsideRange) {
  EXPECT_EQ(call({"bounds", "--grid", "1.5"}).code, 2);
  EXPECT_EQ(call({"bounds", "--grid", "0"}).code, 2);
}

TEST(Cli, UsageErrors) {
  EXPECT_EQ(call({}).code, 2);
  EXPECT_EQ(call({"nonsense"}).code, 2);
  EXPECT_EQ(call({"bounds", "--precision", "quad"}).code, 2);
  EXPECT_EQ(call({"bounds", "--help"}).code, 0);
}

TEST(Cli, OutputPathErrorNamesThePath) {
  const auto r = call({"cantor", "--out", "/nonexistent-dir/x.csv"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("/nonexistent-dir/x.csv"), std::string::npos);
}

TEST(Cli, OutFileMatchesStdout) {
  const std::string path = ::testing::TempDir() + "hl_cli_out.csv";
  ASSERT_EQ(call({"cantor", "--depth", "5", "--out", path}).code, 0);
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  const auto direct = call({"cantor", "--depth", "5"});
  EXPECT_EQ(lines(ss.str()).size(), lines(direct.out).size());
  EXPECT_EQ(lines(ss.str()).back(), lines(direct.out).back());
  std::remove(path.c_str());
}

TEST(Cli, LevelsetSeed42AllChecksPass) {
  const auto r = call({"levelset", "--seed", "42", "--depth", "5", "--l", "1", "--r-count", "20"});
  EXPECT_EQ(r.code, 0) << r.err;
  const auto ls = lines(r.out);
  ASSERT_EQ(ls.size(), 2u + 20 * 6);
  for (std::size_t i = 2; i < ls.size(); ++i) {
    const auto f = split(ls[i]);
    ASSERT_EQ(f.size(), 9u);
    EXPECT_GE(std::stod(f[4]), 1.0) << ls[i];   // kappa sum
    EXPECT_EQ(std::stod(f[6]), 1.0) << ls[i];   // mu sum
    EXPECT_EQ(f[8], "0") << ls[i];              // conservation failures
  }
}

TEST(Cli, LevelsetIsDeterministic) {
  const std::vector<std::string> args{"levelset", "--seed", "7", "--depth", "4", "--l", "2", "--r-count", "3"};
  const auto a = call(args), b = call(args);
  EXPECT_EQ(a.out, b.out);
  EXPECT_NE(a.out, call({"levelset", "--seed", "8", "--depth", "4", "--l", "2", "--r-count", "3"}).out);
}

TEST(Cli, LevelsetConstantFunctionIsEmpty) {
  const auto r = call({"levelset", "--function", "constant"});
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(lines(r.out).size(), 2u);
}

TEST(Cli, LevelsetCollidingLevelIsResampled) {
  const auto r = call({"levelset", "--function", "ramp", "--r", "1/2", "--depth", "3"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.err.find("resampling"), std::string::npos);
  EXPECT_EQ(lines(r.out).size(), 2u + 4);
}

TEST(Cli, LevelsetJsonArtifact) {
  const std::string path = ::testing::TempDir() + "hl_cli_levelset.json";
  ASSERT_EQ(call({"levelset", "--depth", "3", "--r-count", "2", "--json", path}).code, 0);
  std::ifstream in(path);
  const auto doc = nlohmann::json::parse(in);
  EXPECT_EQ(doc.at("level_sets").size(), 2u);
  EXPECT_EQ(doc.at("level_sets")[0].at("n"), 3);
  EXPECT_TRUE(doc.contains("function"));
  std::remove(path.c_str());
}

TEST(Cli, ConductivityHistogramMassAtLeastOne) {
  const auto r = call({"conductivity-hist", "--depth", "5", "--r-count", "4"});
  ASSERT_EQ(r.code, 0) << r.err;
  std::map<std::string, double> mass;
  for (const auto& line : lines(r.out))
    if (line[0] != '#' && line[0] != 'r') mass[split(line)[0]] += std::stod(split(line)[4]);
  EXPECT_EQ(mass.size(), 4u);
  for (const auto& [i, m] : mass) EXPECT_GE(m, 1.0) << i;
}

TEST(Cli, CensusWithinBound) {
  const auto r = call({"conductivity-hist", "--census", "--alpha", "1", "--d1", "1/2", "--depth", "6", "--l", "2"});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(lines(r.out).size(), 2u + 3);  // n = 2, 4, 6
  EXPECT_EQ(call({"conductivity-hist", "--census", "--depth", "6", "--l", "6"}).code, 2);
}

TEST(Cli, WitnessSlope) {
  const auto r = call({"witness", "--alpha", "0.5", "--digits", "1000", "--trials", "20"});
  ASSERT_EQ(r.code, 0);
  double sum = 0;
  int finals = 0;
  for (const auto& line : lines(r.out)) {
    const auto f = split(line);
    if (f.size() == 4 && f[1] == "1000") {
      sum += std::stod(f[3]);
      ++finals;
    }
  }
  ASSERT_EQ(finals, 20);
  EXPECT_NEAR(sum / 20, 1 - std::exp2(-0.5), 0.02);
}

TEST(Cli, WitnessZeroTrialsAndBadAlpha) {
  const auto r = call({"witness", "--trials", "0"});
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(lines(r.out).size(), 2u);
  EXPECT_EQ(call({"witness", "--alpha", "1"}).code, 2);
}

TEST(Cli, CantorMeasureColumn) {
  const auto r = call({"cantor", "--depth", "20"});
  ASSERT_EQ(r.code, 0);
  const auto last = split(lines(r.out).back());
  EXPECT_EQ(last[0], "20");
  EXPECT_NEAR(std::stod(last[2]), 0.5, 1e-6);
  EXPECT_EQ(last[3], "1048576/2097151");
}

TEST(Cli, CantorCapacityTable) {
  const auto r = call({"cantor", "--capacity", "--alpha", "0.75", "--depth", "12"});
  ASSERT_EQ(r.code, 0);
  const auto ls = lines(r.out);
  EXPECT_EQ(ls[1], "k,alpha,direct,bound,ratio");
  EXPECT_EQ(ls.size(), 2u + 13);
  EXPECT_NEAR(std::stod(split(ls.back())[4]), 0.0224283, 1e-6);
  const auto div = call({"cantor", "--capacity", "--alpha", "0.4", "--depth", "2"});
  EXPECT_EQ(div.code, 0);
  EXPECT_NE(div.err.find("diverges"), std::string::npos);
}

TEST(Cli, CantorStructureJson) {
  const std::string path = ::testing::TempDir() + "hl_cli_structure.json";
  ASSERT_EQ(call({"cantor", "--depth", "10", "--json", path}).code, 0);
  std::ifstream in(path);
  const auto doc = nlohmann::json::parse(in);
  EXPECT_TRUE(doc.at("structure").at("certified").get<bool>());
  EXPECT_EQ(doc.at("intervals").size(), 64u);
  std::remove(path.c_str());
}

TEST(Cli, PhaseBelowAndAboveHalf) {
  const auto lo = call({"phase", "--alpha", "0.4"});
  EXPECT_EQ(lo.code, 0);
  EXPECT_NE(lo.out.find("feasible piecewise-constant approximation at k=17"), std::string::npos);
  const auto hi = call({"phase", "--alpha", "0.6"});
  EXPECT_EQ(hi.code, 0) << hi.out;
  EXPECT_NE(hi.out.find("infeasible; perturbation certificate holds"), std::string::npos);
  const auto mid = call({"phase", "--alpha", "0.5"});
  EXPECT_EQ(mid.code, 0);
  EXPECT_NE(mid.out.find("no claim"), std::string::npos);
}

TEST(Cli, Selftest) {
  const auto r = call({"selftest"});
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out.find("FAIL"), std::string::npos);
}
