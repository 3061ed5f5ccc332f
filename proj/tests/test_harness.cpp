#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "json.hpp"

#include "geotomo/errors.hpp"
#include "geotomo/harness.hpp"

using namespace geotomo;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("geotomo_harness_" + name);
  fs::remove_all(p);
  return p;
}

int cli(const std::string& args) {
  const int status = std::system((std::string(GEOTOMO_CLI) + " " + args + " > /dev/null 2>&1").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST(Config, DefaultFileParsesToDefaults) {
  const ExperimentConfig c = load_config(GEOTOMO_DEFAULT_CONFIG);
  const ExperimentConfig d;
  EXPECT_EQ(c.seed, d.seed);
  EXPECT_EQ(c.lambdas, d.lambdas);
  EXPECT_EQ(c.grids.fem_n, d.grids.fem_n);
  EXPECT_EQ(c.cgo_ladder.values(), d.cgo_ladder.values());
  EXPECT_DOUBLE_EQ(c.tol.probe_slack, 0.2);
}

TEST(Config, OverridesAndIntegerPromotion) {
  const ExperimentConfig c = parse_config(
      "seed = 7\neta = 0.2\n[chart]\nkind = \"cap\"\nradius = 0.6\n[tau]\ncgo = { start = 4, ratio = 2, count = 6 }\n");
  EXPECT_EQ(c.seed, 7u);
  EXPECT_DOUBLE_EQ(c.eta, 0.2);
  EXPECT_EQ(c.chart.kind, "cap");
  EXPECT_EQ(c.cgo_ladder.values().size(), 6u);
  EXPECT_DOUBLE_EQ(c.cgo_ladder.values().back(), 128.0);
}

TEST(Config, LadderRulesAndSyntaxErrors) {
  EXPECT_THROW(parse_config("[tau]\ncgo = { start = 4.0, ratio = 1.2, count = 5 }\n"), ConfigError);
  EXPECT_THROW(parse_config("[tau]\ncgo = { start = 4.0, ratio = 2.0, count = 4 }\n"), ConfigError);
  EXPECT_THROW(parse_config("seed = = 3\n"), ConfigError);
  EXPECT_THROW(parse_config("eta = \"big\"\n"), ConfigError);
  EXPECT_THROW(parse_config("[chart]\nkind = \"torus\"\n"), ConfigError);
  EXPECT_THROW(load_config("/nonexistent/geotomo.toml"), ConfigError);
}

TEST(FitSlope, ExactPowerLawAndConstant) {
  std::vector<std::pair<double, double>> inv, flat;
  for (double t : geometric_ladder(4.0, 2.0, 6)) {
    inv.emplace_back(t, 1.0 / t);
    flat.emplace_back(t, 3.0);
  }
  EXPECT_NEAR(fit_slope(inv).slope, -1.0, 1e-12);
  EXPECT_NEAR(fit_slope(flat).slope, 0.0, 1e-12);
}

TEST(FitSlope, NoisySyntheticPowerLaw) {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> noise(-1.0, 1.0);
  std::vector<std::pair<double, double>> s;
  for (double t : geometric_ladder(8.0, std::sqrt(2.0), 8)) s.emplace_back(t, std::pow(t, -1.5) * (1.0 + 0.01 * noise(rng)));
  const double slope = fit_slope(s).slope;
  EXPECT_GE(slope, -1.55);
  EXPECT_LE(slope, -1.45);
}

TEST(FitSlope, CsvFiltersNonpositiveAndNeedsFour) {
  const fs::path dir = scratch("fit");
  fs::create_directories(dir);
  {
    std::ofstream out(dir / "a.csv");
    out << "tau,value\n4,0.25\n8,0.125\n16,-1\n32,0.03125\n64,0.015625\n";
  }
  const SlopeFit f = fit_csv((dir / "a.csv").string());
  EXPECT_NEAR(f.slope, -1.0, 1e-12);
  EXPECT_EQ(f.used, 4);
  EXPECT_EQ(f.dropped, 1);
  {
    std::ofstream out(dir / "b.csv");
    out << "4,0.25\n8,0\n16,0.1\n32,0.05\n";
  }
  EXPECT_THROW(fit_csv((dir / "b.csv").string()), Error);
}

TEST(RunSuite, UnknownSuiteIsConfigError) {
  ExperimentConfig c;
  c.out_dir = scratch("unknown").string();
  EXPECT_THROW(run_suite(c, "nonsense"), ConfigError);
}

TEST(RunSuite, ReportSchemaAndDeterministicBytes) {
  ExperimentConfig c;
  c.record_wallclock = false;
  const fs::path first = scratch("det1");
  c.out_dir = first.string();
  const SuiteReport a = run_suite(c, "geometry");
  EXPECT_TRUE(a.pass());
  const SuiteReport b2 = run_suite(c, "theorem2");
  EXPECT_TRUE(b2.pass());
  c.out_dir = scratch("det2").string();
  run_suite(c, "geometry");
  run_suite(c, "theorem2");
  int compared = 0;
  for (const auto& e : fs::directory_iterator(first)) {
    const fs::path other = fs::path(c.out_dir) / e.path().filename();
    ASSERT_TRUE(fs::exists(other)) << other;
    EXPECT_EQ(slurp(e.path()), slurp(other)) << e.path().filename();
    ++compared;
  }
  EXPECT_GE(compared, 4);

  const auto j = nlohmann::json::parse(slurp(fs::path(c.out_dir) / "geometry.json"));
  EXPECT_EQ(j["suite"], "geometry");
  EXPECT_EQ(j["wallclock_s"], 0.0);
  ASSERT_FALSE(j["checks"].empty());
  for (const auto& ch : j["checks"])
    for (const char* key : {"name", "value", "target", "tol", "pass"}) EXPECT_TRUE(ch.contains(key)) << key;

  const std::string csv = slurp(fs::path(c.out_dir) / "theorem2_logpolar.csv");
  ASSERT_EQ(csv.rfind("# {", 0), 0u);
  const auto header = nlohmann::json::parse(csv.substr(2, csv.find('\n') - 2));
  EXPECT_EQ(header["chart"], "logpolar");
  EXPECT_TRUE(fs::exists(fs::path(c.out_dir) / "geometry_traces.gp"));
}

TEST(Cli, ExitCodes) {
  const fs::path dir = scratch("cli");
  EXPECT_EQ(cli(std::string("run --config ") + GEOTOMO_DEFAULT_CONFIG + " --suite nonsense --out " + dir.string()), 2);
  EXPECT_EQ(cli("run --config /nonexistent.toml --suite geometry"), 2);
  EXPECT_EQ(cli("run --suite geometry"), 2);
  EXPECT_EQ(cli(std::string("run --config ") + GEOTOMO_DEFAULT_CONFIG + " --suite theorem2 --out " + dir.string()), 0);
  EXPECT_TRUE(fs::exists(dir / "theorem2.json"));

  fs::create_directories(dir);
  {
    std::ofstream bad(dir / "bad.toml");
    bad << "[tolerances]\nsantalo = 1e-30\n";
  }
  EXPECT_EQ(cli("run --config " + (dir / "bad.toml").string() + " --suite santalo --out " + dir.string()), 1);
  {
    std::ofstream rows(dir / "rows.csv");
    rows << "1,1\n2,0.5\n4,0.25\n8,0.125\n";
  }
  EXPECT_EQ(cli("fit --csv " + (dir / "rows.csv").string()), 0);
}
