#include "geotomo/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include "json.hpp"

#include "geotomo/artifacts.hpp"
#include "geotomo/errors.hpp"
#include "suites.hpp"

namespace geotomo {

namespace suites {

void check_below(Context& c, const std::string& name, double value, double tol) {
  c.rep.checks.push_back({name, value, 0.0, tol, value <= tol});
}

void check_above(Context& c, const std::string& name, double value, double bound) {
  c.rep.checks.push_back({name, value, bound, 0.0, value >= bound});
}

void check_near(Context& c, const std::string& name, double value, double target, double tol) {
  c.rep.checks.push_back({name, value, target, tol, std::abs(value - target) <= tol});
}

void add_rate(Context& c, const RateReport& r) {
  c.rep.rates.push_back(r);
  c.rep.checks.push_back({"slope: " + r.quantity, r.slope, r.target, r.slack, r.pass});
}

}  // namespace suites

bool SuiteReport::pass() const {
  for (const auto& ch : checks)
    if (!ch.pass) return false;
  return true;
}

std::vector<std::string> SuiteReport::failing() const {
  std::vector<std::string> out;
  for (const auto& ch : checks)
    if (!ch.pass) out.push_back(ch.name);
  return out;
}

const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names{"geometry", "santalo", "raytransform", "mollify", "g0",
                                              "cgo",      "carleman", "forward",     "theorem2", "all"};
  return names;
}

std::string report_json(const SuiteReport& report) {
  nlohmann::ordered_json checks = nlohmann::ordered_json::array();
  for (const auto& ch : report.checks) {
    nlohmann::ordered_json j;
    j["name"] = ch.name;
    j["value"] = ch.value;
    j["target"] = ch.target;
    j["tol"] = ch.tol;
    j["pass"] = ch.pass;
    checks.push_back(j);
  }
  nlohmann::ordered_json rates = nlohmann::ordered_json::array();
  for (const auto& r : report.rates) rates.push_back(nlohmann::ordered_json(rate_json(r)));
  nlohmann::ordered_json root;
  root["suite"] = report.suite;
  root["checks"] = checks;
  root["rates"] = rates;
  root["wallclock_s"] = report.wallclock_s;
  return root.dump(2) + "\n";
}

namespace {

using Runner = void (*)(suites::Context&);

Runner runner_for(const std::string& name) {
  if (name == "geometry") return suites::geometry;
  if (name == "santalo") return suites::santalo;
  if (name == "raytransform") return suites::raytransform;
  if (name == "mollify") return suites::mollify;
  if (name == "g0") return suites::g0;
  if (name == "cgo") return suites::cgo;
  if (name == "carleman") return suites::carleman;
  if (name == "forward") return suites::forward;
  if (name == "theorem2") return suites::theorem2;
  return nullptr;
}

SuiteReport run_one(const ExperimentConfig& cfg, const std::string& name, const std::string& dir) {
  SuiteReport rep;
  rep.suite = name;
  suites::Context ctx{cfg, dir, rep};
  const auto t0 = std::chrono::steady_clock::now();
  try {
    runner_for(name)(ctx);
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    rep.checks.push_back({std::string("error: ") + e.what(), 1.0, 0.0, 0.0, false});
  }
  const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  rep.wallclock_s = cfg.record_wallclock ? dt : 0.0;
  write_text(dir + name + ".json", report_json(rep));
  return rep;
}

}  // namespace

SuiteReport run_suite(const ExperimentConfig& cfg, const std::string& suite) {
  validate(cfg);
  if (suite != "all" && !runner_for(suite)) throw ConfigError("unknown suite '" + suite + "'");
  std::filesystem::create_directories(cfg.out_dir);
  std::string dir = cfg.out_dir;
  if (dir.back() != '/') dir += '/';
  if (suite != "all") return run_one(cfg, suite, dir);

  SuiteReport all;
  all.suite = "all";
  for (const auto& name : suite_names()) {
    if (name == "all") continue;
    const SuiteReport rep = run_one(cfg, name, dir);
    for (auto ch : rep.checks) {
      ch.name = name + "/" + ch.name;
      all.checks.push_back(ch);
    }
    for (const auto& r : rep.rates) all.rates.push_back(r);
    all.wallclock_s += rep.wallclock_s;
  }
  std::set<std::string> seen;
  for (const auto& r : all.rates) {
    if (!seen.insert(r.quantity).second)
      all.checks.push_back({"duplicate rate row: " + r.quantity, 1.0, 0.0, 0.0, false});
  }
  write_text(dir + "all.json", report_json(all));
  write_rate_json(dir + "all_rates.json", all.rates);
  return all;
}

SlopeFit fit_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  std::vector<std::pair<double, double>> pairs;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ss(line);
    double tau = 0.0, value = 0.0;
    if (!(ss >> tau >> value)) {
      if (pairs.empty()) continue;
      throw ConfigError("malformed row in '" + path + "': " + line);
    }
    pairs.emplace_back(tau, value);
  }
  return fit_slope(pairs);
}

}  // namespace geotomo
