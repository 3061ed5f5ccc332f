#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "geotomo/geometry.hpp"
#include "geotomo/rates.hpp"

namespace geotomo {

/// A geometric tau ladder start * ratio^k, k < count.
struct LadderSpec {
  double start = 8.0;
  double ratio = 1.4142135623730951;
  int count = 5;

  std::vector<double> values() const { return geometric_ladder(start, ratio, count); }
};

struct ChartSpec {
  /// "disc", "cap" or "curved" (constant curvature disc).
  std::string kind = "disc";
  double radius = 1.0;
  double curvature = 0.0;
};

struct GridSpecs {
  int santalo_boundary = 64;
  int santalo_angles = 96;
  int ray_m = 24;
  int ray_rays = 72;
  std::vector<int> ray_refinement{16, 24, 32};
  std::vector<int> carleman_n{16, 24, 32, 48};
  int dn_n = 10;
  std::vector<int> fem_n{16, 24, 32, 48};
  int conformal_n = 16;
  int log_quotient_n = 12;
  int logpolar_boundary = 400;
};

struct Tolerances {
  double santalo = 1e-3;
  double adjoint = 1e-3;
  double inversion = 2e-2;
  double rate_slack = 0.1;
  double g0_slack = 0.15;
  double carleman_identity = 1e-4;
  double refinement_order = 1.8;
  double dn_symmetry = 1e-8;
  double alessandrini = 1e-3;
  double log_quotient = 1e-6;
  double conformal = 1e-5;
  double probe_slack = 0.2;
};

struct ExperimentConfig {
  ChartSpec chart;
  GridSpecs grids;
  LadderSpec mollify_ladder{8.0, 1.4142135623730951, 5};
  LadderSpec g0_ladder{8.0, 2.0, 5};
  LadderSpec cgo_ladder{4.0, 1.4142135623730951, 5};
  LadderSpec carleman_ladder{4.0, 2.0, 5};
  LadderSpec probe_ladder{4.0, 1.4142135623730951, 5};
  std::vector<double> lambdas{0.0, 0.05, -0.05, 0.1, -0.1};
  double epsilon = 0.05;
  double eta = 0.25;
  /// Cusp exponent beta = 3/2 + eta_prime.
  double eta_prime = 0.3;
  Tolerances tol;
  unsigned seed = 2024;
  std::string out_dir = "geotomo_out";
  /// When false, wallclock_s is written as 0 so reports are byte-identical.
  bool record_wallclock = true;
};

/// Throws ConfigError on parse failures, unknown chart kinds, or ladders
/// that are not geometric with ratio >= sqrt(2) and at least five points.
ExperimentConfig parse_config(const std::string& toml_text);
ExperimentConfig load_config(const std::string& path);
void validate(const ExperimentConfig& config);
MetricChart make_chart(const ChartSpec& spec);

struct Check {
  std::string name;
  double value = 0.0;
  double target = 0.0;
  double tol = 0.0;
  bool pass = false;
};

struct SuiteReport {
  std::string suite;
  std::vector<Check> checks;
  std::vector<RateReport> rates;
  double wallclock_s = 0.0;

  bool pass() const;
  std::vector<std::string> failing() const;
};

const std::vector<std::string>& suite_names();

/// Runs one suite (or "all") and writes <out>/<suite>.json plus CSV
/// artifacts and gnuplot scripts.  Throws ConfigError on an unknown name.
SuiteReport run_suite(const ExperimentConfig& config, const std::string& suite);

/// {suite, checks: [{name, value, target, tol, pass}], rates: [...], wallclock_s}.
std::string report_json(const SuiteReport& report);

/// Reads "tau,value" rows (header optional) and fits the log-log slope.
SlopeFit fit_csv(const std::string& path);

}  // namespace geotomo
