#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "oar/lattice_oracle.hpp"
#include "run_config.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Fresh scratch directory per test.
fs::path scratch(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("oar_cli_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

int run(const fs::path& dir, const std::string& args, const std::string& env = "") {
  const std::string cmd =
      "cd '" + dir.string() + "' && " + env + " '" OAR_CLI "' " + args + " >cli.out 2>cli.err";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

// Data lines of a CSV, skipping the preamble and header.
std::vector<std::vector<std::string>> rows(const fs::path& p) {
  std::istringstream is(slurp(p));
  std::vector<std::vector<std::string>> out;
  std::string line;
  bool header = true;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (header) {
      header = false;
      continue;
    }
    std::vector<std::string> cells;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    out.push_back(cells);
  }
  return out;
}

json config_line(const fs::path& p) {
  std::istringstream is(slurp(p));
  std::string line;
  while (std::getline(is, line))
    if (line.rfind("# config ", 0) == 0) return json::parse(line.substr(9));
  return {};
}

}  // namespace

TEST(Cli, MalformedFlagExitsTwoWithoutWriting) {
  const auto d = scratch("malformed");
  EXPECT_EQ(run(d, "kernel --kmax notanumber -o k.csv"), 2);
  EXPECT_EQ(run(d, "kernel --no-such-flag -o k.csv"), 2);
  EXPECT_EQ(run(d, "flow --filter d7 -o f.csv"), 2);
  EXPECT_EQ(run(d, "spincorr --format xml -o s.csv"), 2);
  EXPECT_EQ(run(d, ""), 2);
  for (const auto& e : fs::directory_iterator(d)) {
    const auto name = e.path().filename().string();
    EXPECT_TRUE(name == "cli.out" || name == "cli.err") << name;
  }
}

TEST(Cli, CriticalLimitKernelFlipsAtZero) {
  const auto d = scratch("kernel");
  ASSERT_EQ(run(d, "kernel --kind critical-limit --kmax 10 --points 40 -o k.csv"), 0);
  const auto r = rows(d / "k.csv");
  ASSERT_EQ(r.size(), 40u);
  for (const auto& row : r) {
    const double k = std::stod(row[0]), k12 = std::stod(row[3]);
    EXPECT_EQ(k12, k > 0 ? -1.0 : 1.0) << k;
  }
}

TEST(Cli, OutputsCarryVersionAndConfig) {
  const auto d = scratch("config");
  ASSERT_EQ(run(d, "kernel --kind lattice --t1 1 --t3 0.5 --beta 2 --points 5 -o k.csv"), 0);
  const std::string body = slurp(d / "k.csv");
  EXPECT_EQ(body.rfind("# oar " OAR_VERSION "\n", 0), 0u);
  const json cfg = config_line(d / "k.csv");
  ASSERT_FALSE(cfg.is_null());
  EXPECT_EQ(cfg.at("command"), "kernel");
  EXPECT_EQ(cfg.at("t3"), 0.5);
  // The embedded config survives a trip through the struct.
  EXPECT_EQ(json(cfg.get<oar::cli::RunConfig>()), cfg);

  ASSERT_EQ(run(d, "oracle -o o.json"), 0);
  const json o = json::parse(slurp(d / "o.json"));
  EXPECT_EQ(o.at("version"), OAR_VERSION);
  EXPECT_EQ(o.at("config").at("command"), "oracle");
}

TEST(Cli, RunConfigRoundTrip) {
  oar::cli::RunConfig c;
  c.command = "flow";
  c.beta = std::numeric_limits<double>::infinity();
  c.t3 = 0.1 + 0.2;
  c.sites = {0, 3, 5};
  c.filter_coeffs = {0.1, 1.0 / 3};
  const json j = c;
  const auto back = json::parse(j.dump()).get<oar::cli::RunConfig>();
  EXPECT_EQ(json(back), j);
  EXPECT_TRUE(std::isinf(back.beta));
  EXPECT_EQ(back.t3, c.t3);
  EXPECT_EQ(back.filter_coeffs[1], 1.0 / 3);
}

TEST(Cli, Deterministic) {
  const auto d = scratch("determinism");
  ASSERT_EQ(run(d, "spincorr --dmax 3 --state lattice -o a.csv"), 0);
  ASSERT_EQ(run(d, "spincorr --dmax 3 --state lattice -o a2.csv"), 0);
  auto strip = [](std::string s) { return s.substr(s.find('\n', s.find("# config"))); };
  EXPECT_EQ(strip(slurp(d / "a.csv")), strip(slurp(d / "a2.csv")));
  // Same config, same bytes.
  const std::string first = slurp(d / "a.csv");
  ASSERT_EQ(run(d, "spincorr --dmax 3 --state lattice -o a.csv"), 0);
  EXPECT_EQ(slurp(d / "a.csv"), first);
}

TEST(Cli, EnvironmentOverridesDirectoryOnly) {
  const auto d = scratch("env");
  const auto out = d / "elsewhere";
  ASSERT_EQ(run(d, "kernel --points 3 -o sub/k.csv", "OAR_OUTPUT_DIR='" + out.string() + "'"), 0);
  EXPECT_TRUE(fs::exists(out / "k.csv"));
  EXPECT_FALSE(fs::exists(d / "sub"));
}

TEST(Cli, SpincorrNearestNeighbourAndOddRows) {
  const auto d = scratch("spincorr");
  ASSERT_EQ(run(d, "spincorr --filter d8 --dmax 1 --sites 0,1,3 -o s.csv"), 0);
  const auto r = rows(d / "s.csv");
  ASSERT_EQ(r.size(), 2u);
  EXPECT_NEAR(std::stod(r[0][2]), 0.568401, 1e-6);
  EXPECT_EQ(r[1][0], "0;1;3");
  EXPECT_EQ(std::stod(r[1][2]), 0);
}

TEST(Cli, SpincorrExponentRecord) {
  const auto d = scratch("exponent");
  ASSERT_EQ(run(d, "spincorr --dmax 4 --check-exponent --format json -o s.json"), 0);
  const json j = json::parse(slurp(d / "s.json"));
  EXPECT_EQ(j.at("rows").size(), 4u);
  EXPECT_LT(j.at("fitted_exponent").at("slope").get<double>(), -1);
}

TEST(Cli, FlowApproachesLimit) {
  const auto d = scratch("flow");
  ASSERT_EQ(run(d, "flow --filter d4 --m 8 --critical --jmax 2 -o f.csv"), 0);
  for (const auto& row : rows(d / "f.csv")) EXPECT_LT(std::stod(row[5]), 2e-3);
}

TEST(Cli, VerifyPassesAndNamesCorruptFilter) {
  const auto d = scratch("verify");
  EXPECT_EQ(run(d, "verify --suite filters -o ok.json"), 0);
  EXPECT_TRUE(json::parse(slurp(d / "ok.json")).at("passed").get<bool>());
  EXPECT_EQ(run(d, "verify --filter-coeffs 0.5,0.5,0.1,0.1 -o bad.json"), 1);
  const json bad = json::parse(slurp(d / "bad.json"));
  EXPECT_FALSE(bad.at("passed").get<bool>());
  ASSERT_FALSE(bad.at("failed").empty());
  EXPECT_NE(bad.at("failed")[0].at("name").get<std::string>().find("Filter"), std::string::npos);
  EXPECT_NE(slurp(d / "cli.err").find("Filter"), std::string::npos);
  EXPECT_EQ(run(d, "verify --suite nonsense -o x.json"), 2);
  EXPECT_FALSE(fs::exists(d / "x.json"));
}

TEST(Cli, OracleMatchesGoldenFile) {
  const auto d = scratch("oracle");
  ASSERT_EQ(run(d, "oracle -o o.json"), 0);
  std::ifstream fresh(d / "o.json"), golden(OAR_FIXTURE_DIR "/oracle.json");
  const auto a = oar::read_fixtures_json(fresh), b = oar::read_fixtures_json(golden);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].spec, b[i].spec);
    EXPECT_NEAR(a[i].value, b[i].value, b[i].tolerance);
  }
}
