#include <cstdio>
#include <iostream>

#include "CLI11.hpp"

#include "geotomo/errors.hpp"
#include "geotomo/harness.hpp"

namespace {

int run(const std::string& config_path, const std::string& suite, const std::string& out) {
  geotomo::ExperimentConfig cfg;
  try {
    cfg = geotomo::load_config(config_path);
    if (!out.empty()) cfg.out_dir = out;
    const auto& names = geotomo::suite_names();
    if (std::find(names.begin(), names.end(), suite) == names.end())
      throw geotomo::ConfigError("unknown suite '" + suite + "'");
  } catch (const geotomo::Error& e) {
    std::cerr << e.what() << "\n";
    return 2;
  }
  geotomo::SuiteReport rep;
  try {
    rep = geotomo::run_suite(cfg, suite);
  } catch (const geotomo::ConfigError& e) {
    std::cerr << e.what() << "\n";
    return 2;
  }
  for (const auto& ch : rep.checks) {
    std::printf("%-4s %-70s value=%.6g target=%.6g tol=%.3g\n", ch.pass ? "PASS" : "FAIL", ch.name.c_str(), ch.value,
                ch.target, ch.tol);
  }
  std::printf("suite %s: %s (%.1f s), report in %s\n", rep.suite.c_str(), rep.pass() ? "pass" : "FAIL",
              rep.wallclock_s, cfg.out_dir.c_str());
  if (rep.pass()) return 0;
  std::cerr << "failing checks:\n";
  for (const auto& name : rep.failing()) std::cerr << "  " << name << "\n";
  return 1;
}

int fit(const std::string& csv) {
  try {
    const geotomo::SlopeFit f = geotomo::fit_csv(csv);
    if (f.dropped) std::cerr << "warning: dropped " << f.dropped << " nonpositive values\n";
    std::printf("slope %.6f band %.6f intercept %.6f used %d\n", f.slope, f.band, f.intercept, f.used);
    return 0;
  } catch (const geotomo::Error& e) {
    std::cerr << e.what() << "\n";
    return 2;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"geotomo: numerical checks for partial-data conductivity uniqueness"};
  app.require_subcommand(1);

  std::string config_path, suite, out, csv;
  auto* run_cmd = app.add_subcommand("run", "Run an experiment suite");
  run_cmd->add_option("--config", config_path, "TOML configuration")->required();
  run_cmd->add_option("--suite", suite, "Suite name or 'all'")->required();
  run_cmd->add_option("--out", out, "Output directory (overrides the config)");

  auto* fit_cmd = app.add_subcommand("fit", "Fit a log-log slope to tau,value rows");
  fit_cmd->add_option("--csv", csv, "CSV file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }
  if (*run_cmd) return run(config_path, suite, out);
  return fit(csv);
}
