// Copyright 2026 The sparse-detect Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "sparse_detect/cli.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "sparse_detect/calibration.hpp"
#include "sparse_detect/statistics.hpp"

namespace sparse_detect::cli {
namespace {

namespace fs = std::filesystem;
using Json = nlohmann::json;

struct CliRun {
  int code = 0;
  std::string out;
  std::string err;
};

CliRun run(const std::vector<std::string>& args, const std::string& stdin_text = "") {
  std::istringstream in(stdin_text);
  std::ostringstream out;
  std::ostringstream err;
  CliRun r;
  r.code = run_cli(args, in, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

class TempDir {
 public:
  TempDir() : path_(fs::temp_directory_path() / ("sparse_detect_cli_" +
                                                 std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()))) {
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  fs::path path_;
};

void write_file(const std::string& path, const std::string& text) { std::ofstream(path) << text; }

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::size_t count_lines(const std::string& text) { return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n')); }

TEST(CliTest, WorkedExampleRoundTripsBitExact) {
  TempDir dir;
  const std::string input = dir.file("p.txt");
  write_file(input, "# four p-values\n0.01\n0.2\n\n0.3\n0.4\n");
  const CliRun r = run({"test", input, "--stats", "hc_star,hc_plus", "--critical", "mc:2000", "--seed", "3"});
  ASSERT_EQ(r.code, 0) << r.err;
  const Json report = Json::parse(r.out);
  EXPECT_EQ(report["n"], 4);
  const double value = report["statistics"]["hc_star"]["value"].get<double>();
  EXPECT_NEAR(value, 4.8242, 5e-5);
  const PValueVector p({0.01, 0.2, 0.3, 0.4});
  EXPECT_EQ(value, hc_star(p).value);
  EXPECT_EQ(report["statistics"]["hc_plus"]["reject"], false);
  EXPECT_TRUE(report.contains("manifest"));
  EXPECT_EQ(report["manifest"]["seed"], 3);
}

TEST(CliTest, ReadsStdin) {
  const CliRun r = run({"test", "--stats", "fisher", "--critical", "mc:500"}, "0.5\n0.5\n");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NEAR(Json::parse(r.out)["statistics"]["fisher"]["value"].get<double>(), -4.0 * std::log(0.5), 1e-12);
}

TEST(CliTest, EmptyInputIsInputError) {
  TempDir dir;
  const std::string input = dir.file("empty.txt");
  write_file(input, "# nothing\n\n");
  EXPECT_EQ(run({"test", input}).code, kExitInput);
}

TEST(CliTest, BadPValueNamesLine) {
  TempDir dir;
  const std::string input = dir.file("bad.txt");
  write_file(input, "0.1\n0.2\n1.5\n");
  const CliRun r = run({"test", input});
  EXPECT_EQ(r.code, kExitInput);
  EXPECT_NE(r.err.find("line 3"), std::string::npos) << r.err;
  write_file(input, "0.1\nabc\n");
  EXPECT_EQ(run({"test", input}).code, kExitInput);
}

TEST(CliTest, ZScoreInput) {
  const CliRun r = run({"test", "--input-kind", "zscores", "--family", "gaussian", "--stats", "hc_star",
                     "--critical", "mc:200"},
                    "0\n");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NEAR(Json::parse(r.out)["statistics"]["hc_star"]["value"].get<double>(), 1.0, 1e-12);
  EXPECT_EQ(run({"test", "--input-kind", "zscores"}, "0\n").code, kExitConfig);
}

TEST(CliTest, AsymptoticOnlyForHcPlus) {
  EXPECT_EQ(run({"test", "--stats", "hc_star", "--critical", "asymptotic"}, "0.1\n0.2\n").code, kExitConfig);
  EXPECT_EQ(run({"test", "--stats", "nonsense"}, "0.1\n").code, kExitConfig);
}

TEST(CliTest, CalibrateIsIdempotent) {
  TempDir dir;
  const std::string table = dir.file("cal.csv");
  const std::vector<std::string> args{"calibrate", "--stat", "hc_plus", "--n", "1e3", "--alpha", "0.05,0.01",
                                      "--reps", "2000", "--seed", "5", "--out", table};
  ASSERT_EQ(run(args).code, 0);
  const std::string first = read_file(table);
  ASSERT_EQ(run(args).code, 0);
  EXPECT_EQ(read_file(table), first);
  const CriticalTable loaded = load_table(table);
  EXPECT_EQ(loaded.size(), 2u);
  EXPECT_TRUE(fs::exists(table + ".manifest.json"));
  EXPECT_GT(loaded.at({"hc_plus", 1000, 0.5, 0.01}).critical, loaded.at({"hc_plus", 1000, 0.5, 0.05}).critical);
}

TEST(CliTest, CalibrateRejectsTooFewReplicates) {
  TempDir dir;
  EXPECT_EQ(run({"calibrate", "--stat", "hc_plus", "--n", "1000", "--alpha", "0.001", "--reps", "2000", "--out",
                 dir.file("t.csv")})
                .code,
            kExitConfig);
  EXPECT_EQ(run({"calibrate", "--stat", "hc_star", "--n", "1000", "--alpha", "0.05", "--source", "asymptotic",
                 "--out", dir.file("t.csv")})
                .code,
            kExitConfig);
}

TEST(CliTest, BoundaryCurve) {
  const CliRun r = run({"boundary", "--curves", "optimal,max", "--beta-grid", "5"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(count_lines(r.out), 11u);
  std::istringstream lines(r.out);
  std::string line;
  std::getline(lines, line);
  EXPECT_EQ(line, "beta,curve,rho");
  bool found = false;
  while (std::getline(lines, line)) {
    std::istringstream fields(line);
    std::string beta, curve, rho;
    std::getline(fields, beta, ',');
    std::getline(fields, curve, ',');
    std::getline(fields, rho, ',');
    if (curve == "optimal" && std::abs(std::stod(beta) - 0.75) < 1e-12) {
      EXPECT_NEAR(std::stod(rho), 0.25, 1e-9);
      found = true;
    }
  }
  EXPECT_TRUE(found);
}

TEST(CliTest, BoundarySubbotinLinear) {
  const CliRun r = run({"boundary", "--family", "subbotin", "--gamma", "1", "--beta-grid", "11"});
  ASSERT_EQ(r.code, 0) << r.err;
  std::istringstream lines(r.out);
  std::string line;
  std::getline(lines, line);
  int rows = 0;
  while (std::getline(lines, line)) {
    const auto c1 = line.find(',');
    const auto c2 = line.rfind(',');
    const double beta = std::stod(line.substr(0, c1));
    EXPECT_NEAR(std::stod(line.substr(c2 + 1)), 2.0 * beta - 1.0, 1e-12);
    ++rows;
  }
  EXPECT_EQ(rows, 11);
  EXPECT_EQ(run({"boundary", "--family", "subbotin", "--gamma", "2", "--curves", "bonferroni_subbotin"}).code,
            kExitConfig);
  EXPECT_EQ(run({"boundary", "--curves", "wiggly"}).code, kExitConfig);
}

TEST(CliTest, PowerGrid) {
  TempDir dir;
  const std::string table = dir.file("cal.csv");
  for (const char* stat : {"hc_plus", "max"}) {
    ASSERT_EQ(run({"calibrate", "--stat", stat, "--n", "1000", "--alpha", "0.05", "--reps", "400", "--out", table})
                  .code,
              0);
  }
  const std::string out = dir.file("power.csv");
  const CliRun r = run({"power", "--n", "1000", "--beta", "0.55:0.75:3", "--r", "0.2:0.6:2", "--stats", "hc_plus,max",
                     "--reps", "20", "--table", table, "--out", out});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(count_lines(read_file(out)), 1u + 3u * 2u * 2u);
  EXPECT_TRUE(fs::exists(out + ".manifest.json"));
  EXPECT_EQ(run({"power", "--n", "2000", "--beta", "0.6:0.6:1", "--r", "0.3:0.3:1", "--table", table}).code,
            kExitConfig);
}

TEST(CliTest, SimulateDeterministic) {
  const std::vector<std::string> args{"simulate", "--n", "1000", "--beta", "0.6", "--r", "0.4", "--reps", "7",
                                      "--stats", "hc_star,hc_plus,fisher", "--seed", "11"};
  const CliRun a = run(args);
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_EQ(count_lines(a.out), 1u + 7u * 2u * 3u);
  EXPECT_EQ(run(args).out, a.out);
  EXPECT_EQ(run({"simulate", "--family", "exp2", "--n", "1000", "--eps", "0.01", "--amplitude", "3", "--tail",
                 "0.05"})
                .code,
            kExitConfig);
  EXPECT_EQ(run({"simulate", "--n", "1000", "--beta", "0.6", "--eps", "0.1", "--r", "0.3"}).code, kExitConfig);
}

TEST(CliTest, Table1) {
  const CliRun r = run({"table1"});
  ASSERT_EQ(r.code, 0);
  for (const char* cell : {"2.2916", "6.0976", "1.6439", "2.2931"}) {
    EXPECT_NE(r.out.find(cell), std::string::npos) << cell;
  }
}

TEST(CliTest, HelpAndUnknownOption) {
  EXPECT_EQ(run({"--help"}).code, kExitOk);
  EXPECT_EQ(run({"test", "--bogus"}).code, kExitConfig);
}

}  // namespace
}  // namespace sparse_detect::cli
