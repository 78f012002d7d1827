#ifdef CBH_HAVE_CLI

#include "cli.hpp"

#include "cbh/thermo.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace {

struct CliRun {
  int code;
  std::string out;
  std::string err;
};

CliRun run(std::vector<std::string> args) {
  args.insert(args.begin(), "cbh");
  std::vector<const char*> argv;
  for (const std::string& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cbh::cli::cli_main(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::filesystem::path temp_path(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("cbh_cli_test_" + name);
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Value of `column` in the first data row of a two-line CSV.
double csv_value(const std::string& text, const std::string& column) {
  std::istringstream is(text);
  std::string header, row;
  std::getline(is, header);
  std::getline(is, row);
  std::istringstream hs(header), rs(row);
  for (std::string h, v; std::getline(hs, h, ',') && std::getline(rs, v, ',');) {
    if (h == column) return std::stod(v);
  }
  throw std::runtime_error("missing column " + column);
}

}  // namespace

TEST(Cli, BadArgumentsExitTwo) {
  for (const std::vector<std::string>& args :
       std::vector<std::vector<std::string>>{{},
                                             {"frobnicate"},
                                             {"steady", "--k", "3"},
                                             {"steady", "--bogus", "1"},
                                             {"steady", "--g", "abc"},
                                             {"sweep", "--grid", "1:2"},
                                             {"preset", "fig9"},
                                             {"sweep", "--format", "xml"}}) {
    const CliRun r = run(args);
    EXPECT_EQ(r.code, 2) << (args.empty() ? "<none>" : args[0]);
    EXPECT_NE(r.err.find("Usage"), std::string::npos);
  }
}

TEST(Cli, HelpExitsZero) {
  const CliRun r = run({"--help"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("scan-kappa"), std::string::npos);
}

TEST(Cli, SteadyCarrierMatchesOracle) {
  const CliRun r = run({"steady", "--k", "0", "--g", "1", "--kappa", "0", "--mth", "1", "--nth", "0"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NEAR(csv_value(r.out, "ea_over_omega0"), cbh::carrier_excited_population_oracle(1.0, 1.0), 1e-10);
}

TEST(Cli, SweepWritesCsvAndPlot) {
  const auto csv = temp_path("sweep.csv");
  const auto plot = temp_path("sweep.gp");
  const CliRun r = run({"sweep", "--k", "1", "--g", "1", "--kappa", "0.1", "--grid", "0.5:1:0.5", "--no-richardson",
                     "--no-timestamp", "--out", csv.string(), "--plot", plot.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const std::string text = slurp(csv);
  EXPECT_EQ(text.rfind("m_th,n_th,ea_over_omega0", 0), 0u);
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 3);
  EXPECT_NE(slurp(plot).find(csv.string()), std::string::npos);
  std::filesystem::remove(csv);
  std::filesystem::remove(plot);
}

TEST(Cli, ConfigFileWithOverrides) {
  const auto cfg = temp_path("cfg.json");
  const CliRun saved = run({"sweep", "--g", "0", "--grid", "0.5:0.5:1", "--no-richardson", "--format", "json",
                         "--save-config", cfg.string()});
  ASSERT_EQ(saved.code, 0) << saved.err;
  const CliRun loaded = run({"sweep", "--config", cfg.string()});
  ASSERT_EQ(loaded.code, 0) << loaded.err;
  EXPECT_EQ(loaded.out, saved.out);
  const CliRun overridden = run({"sweep", "--config", cfg.string(), "--format", "csv", "--no-timestamp"});
  EXPECT_EQ(overridden.out.rfind("m_th,", 0), 0u);
  std::filesystem::remove(cfg);
}

TEST(Cli, RunLevelErrorExitsOne) {
  const CliRun r = run({"sweep", "--g", "0", "--grid", "6:7:1", "--max-fock", "30", "--no-richardson"});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("every grid point failed"), std::string::npos);
}

TEST(Cli, OracleTable) {
  const CliRun r = run({"oracle", "--g", "1", "--grid", "0.5:1:0.5"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out.rfind("m_th,rho_ee_numeric,rho_ee_oracle", 0), 0u);
  EXPECT_EQ(std::count(r.out.begin(), r.out.end(), '\n'), 3);
}

#endif
