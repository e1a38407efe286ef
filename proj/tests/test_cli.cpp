#include <gtest/gtest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "bresse/config.hpp"
#include "bresse/scenario.hpp"

using namespace bresse;
namespace fs = std::filesystem;

namespace {

std::string g_cli;

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("bresse_cli_test_" + name);
  fs::remove_all(p);
  return p;
}

struct Cmd {
  int status;
  std::string out;
};

Cmd run_cli(const std::string& args) {
  const std::string cmd = "\"" + g_cli + "\" " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  std::string out;
  char buf[4096];
  while (size_t n = fread(buf, 1, sizeof buf, pipe)) out.append(buf, n);
  const int st = pclose(pipe);
  return {WIFEXITED(st) ? WEXITSTATUS(st) : -1, out};
}

std::vector<std::vector<double>> read_csv(const fs::path& p, std::string* header = nullptr) {
  std::ifstream in(p);
  std::string line;
  std::getline(in, line);
  if (header) *header = line;
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    std::vector<double> r;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) r.push_back(std::stod(cell));
    rows.push_back(r);
  }
  return rows;
}

ErrorKind kind_of(const std::string& yaml) {
  try {
    parse_config(yaml);
  } catch (const Error& e) {
    return e.kind();
  }
  return ErrorKind::InvalidArgument;
}

}  // namespace

TEST(Config, MinimalDefaults) {
  const auto c = parse_config("scenario: simulate\n");
  EXPECT_EQ(c.n, 100);
  const auto ic = c.integrator();
  EXPECT_DOUBLE_EQ(ic.dt, 0.5 * c.grid().h);
  EXPECT_DOUBLE_EQ(c.grid().h, 1.0 / 101);
  EXPECT_EQ(c.scenario, "simulate");
}

TEST(Config, Errors) {
  EXPECT_EQ(kind_of("model:\n  damping:\n    law: friction\n"), ErrorKind::ValidationError);
  EXPECT_EQ(kind_of("model:\n  source:\n    name: spline\n"), ErrorKind::ValidationError);
  EXPECT_EQ(kind_of("scenario: dance\n"), ErrorKind::ValidationError);
  EXPECT_EQ(kind_of("grid: {n: [1, 2}\n"), ErrorKind::ParseError);
  EXPECT_EQ(kind_of("grid:\n  nn: 4\n"), ErrorKind::ParseError);
  EXPECT_EQ(kind_of("grid:\n  n: many\n"), ErrorKind::ParseError);
  try {
    parse_config("scenario: simulate\ngrid:\n  n: many\n");
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
  }
  try {
    parse_config("model:\n  damping:\n    phi: {interval: [0.0, 0.3]}\n    psi: {interval: [0.6, 1.0]}\n");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::ValidationError);
    EXPECT_NE(std::string(e.what()).find("(a.1)"), std::string::npos) << e.what();
  }
}

TEST(Config, TimoshenkoLabelAndEffectiveConfigRoundTrip) {
  const auto c = parse_config("model:\n  beam: {ell: 0.0}\n");
  EXPECT_EQ(c.beam.label(), "timoshenko-degenerate");
  const auto again = parse_config(effective_config_yaml(c));
  EXPECT_EQ(effective_config_yaml(again), effective_config_yaml(c));
}

TEST(Scenario, DecayOnDefaultConfig) {
  auto c = parse_config("scenario: decay\n");
  const fs::path out = scratch("decay");
  const auto res = run_scenario(c, out.string());
  ASSERT_EQ(res.exit_code, 0);
  ASSERT_TRUE(fs::exists(out / "energy.csv"));
  ASSERT_TRUE(fs::exists(out / "decay_fit.csv"));
  ASSERT_TRUE(fs::exists(out / "manifest.json"));
  ASSERT_TRUE(fs::exists(out / "effective_config.yaml"));
  std::string header;
  const auto rows = read_csv(out / "energy.csv", &header);
  EXPECT_NE(header.find("E_Z = ||Z||_H^2"), std::string::npos);
  EXPECT_NE(header.find("energy = E_Z + 2 int_F"), std::string::npos);
  ASSERT_GT(rows.size(), 20u);
  for (size_t k = 1; k < rows.size(); ++k) EXPECT_LE(rows[k][3], rows[k - 1][3] + 1e-12);
  const auto manifest = nlohmann::json::parse(slurp(out / "manifest.json"));
  EXPECT_EQ(manifest["label"], c.beam.label());
  bool listed = false;
  for (const auto& f : manifest["files"]) listed = listed || f["name"] == "decay_fit.csv";
  EXPECT_TRUE(listed);
  EXPECT_GT(manifest["summary"]["omega"].get<double>(), 0.0);
}

TEST(Scenario, DeterministicOutputs) {
  const std::string yaml = "scenario: quasi-stability\nseed: 9\nmodel:\n  source: {name: power}\n"
                           "grid: {n: 30, t_end: 8}\nquasi: {pairs: 2}\n";
  const auto c = parse_config(yaml);
  const fs::path a = scratch("det_a"), b = scratch("det_b");
  ASSERT_EQ(run_scenario(c, a.string()).exit_code, 0);
  ASSERT_EQ(run_scenario(c, b.string()).exit_code, 0);
  for (const auto& entry : fs::directory_iterator(a)) {
    const auto name = entry.path().filename();
    EXPECT_EQ(slurp(a / name), slurp(b / name)) << name;
  }
}

TEST(Scenario, FailureWritesErrorRecord) {
  // L0 = 0.5 is no grid node for n = 100
  const fs::path out = scratch("fail");
  const auto res = run_scenario(parse_config("scenario: carleman\n"), out.string());
  EXPECT_NE(res.exit_code, 0);
  ASSERT_TRUE(fs::exists(out / "error.json"));
  const auto err = nlohmann::json::parse(slurp(out / "error.json"));
  EXPECT_EQ(err["kind"], "InvalidArgument");
  EXPECT_FALSE(fs::exists(out / "manifest.json"));
}

TEST(Cli, Catalog) {
  const auto r = run_cli("catalog");
  EXPECT_EQ(r.status, 0);
  for (const char* name : {"linear", "linear_tanh", "power", "double_well", "quasi-stability"})
    EXPECT_NE(r.out.find(name), std::string::npos) << name;
}

TEST(Cli, ValidateSampleConfigs) {
  for (const auto& entry : fs::directory_iterator(BRESSE_CONFIG_DIR)) {
    const auto r = run_cli("validate \"" + entry.path().string() + "\"");
    EXPECT_EQ(r.status, 0) << entry.path() << "\n" << r.out;
  }
  const fs::path bad = scratch("bad.yaml");
  std::ofstream(bad) << "model:\n  damping:\n    law: friction\n";
  const auto r = run_cli("validate \"" + bad.string() + "\"");
  EXPECT_NE(r.status, 0);
  EXPECT_NE(r.out.find("ValidationError"), std::string::npos) << r.out;
}

TEST(Cli, UcpRunWithOverrides) {
  const fs::path out = scratch("ucp");
  const auto r = run_cli("run \"" + std::string(BRESSE_CONFIG_DIR) + "/ucp.yaml\" --seed 17 --out \"" + out.string() + "\"");
  ASSERT_EQ(r.status, 0) << r.out;
  const auto rows = read_csv(out / "ucp_report.csv");
  EXPECT_EQ(rows.size(), 50u);
  for (const auto& row : rows) EXPECT_GT(row[1], 0.0);
  const auto manifest = nlohmann::json::parse(slurp(out / "manifest.json"));
  EXPECT_EQ(manifest["seed"], 17);
  EXPECT_GT(manifest["summary"]["min_observability_ratio"].get<double>(), 0.0);
}

int main(int argc, char** argv) {
  ::testing::InitGoogleTest(&argc, argv);
  if (argc < 2) {
    std::fprintf(stderr, "usage: test_cli <path to bresse-lab>\n");
    return 2;
  }
  g_cli = argv[1];
  return RUN_ALL_TESTS();
}
