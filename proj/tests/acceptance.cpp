// Runs every suite with the default configuration and prints one line per
// acceptance criterion.  Exit status is nonzero when any criterion fails.

#include <cstdio>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "geotomo/harness.hpp"

using namespace geotomo;

namespace {

struct Criterion {
  int id;
  std::string title;
  std::string suite;
  std::function<bool(const std::string&)> selects;
};

bool has(const std::string& s, const std::string& part) { return s.find(part) != std::string::npos; }

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string describe(const Check& c) {
  std::string s = c.name + " = " + num(c.value);
  if (c.tol != 0.0 || c.target != 0.0) s += " (target " + num(c.target) + ", tol " + num(c.tol) + ")";
  return s;
}

}  // namespace

int main(int argc, char** argv) {
  ExperimentConfig cfg = load_config(GEOTOMO_DEFAULT_CONFIG);
  cfg.out_dir = argc > 1 ? argv[1] : "acceptance_out";

  const std::vector<Criterion> criteria{
      {1, "Santalo formula within 1e-3", "santalo", [](const std::string&) { return true; }},
      {2, "adjointness gap <= 1e-3 ||f|| ||h||", "raytransform", [](const std::string& n) { return has(n, "adjoint"); }},
      {3, "normal-operator inversion <= 2e-2, improving under refinement", "raytransform",
       [](const std::string& n) { return has(n, "inversion"); }},
      {4, "mollification rates within 0.1 slack", "mollify", [](const std::string&) { return true; }},
      {5, "G0 norm slopes at s = 0, 2 within 0.15", "g0",
       [](const std::string& n) { return has(n, "H^0") || has(n, "H^2"); }},
      {6, "CGO remainder rate and weak residual", "cgo", [](const std::string&) { return true; }},
      {7, "Carleman identity 1e-4 / order 1.8 and estimate with zero violations", "carleman",
       [](const std::string&) { return true; }},
      {8, "forward: DN symmetry, integral identity, log quotient, conformal flux", "forward",
       [](const std::string& n) { return !has(n, "slope:"); }},
      {8, "Theorem 2 mask equality", "theorem2", [](const std::string& n) { return has(n, "masks"); }},
      {9, "boundary-term probe: integral slope < 0, Claim 1 rates within 0.2", "forward",
       [](const std::string& n) { return has(n, "slope:"); }},
  };

  std::map<std::string, SuiteReport> reports;
  for (const auto& c : criteria)
    if (!reports.count(c.suite)) reports[c.suite] = run_suite(cfg, c.suite);

  std::map<int, bool> verdict;
  std::map<int, std::vector<std::string>> lines;
  for (const auto& c : criteria) {
    bool ok = verdict.count(c.id) ? verdict[c.id] : true;
    int count = 0;
    for (const auto& ch : reports[c.suite].checks) {
      if (!c.selects(ch.name)) continue;
      ++count;
      ok = ok && ch.pass;
      lines[c.id].push_back(std::string(ch.pass ? "    ok   " : "    FAIL ") + describe(ch));
    }
    if (count == 0) {
      ok = false;
      lines[c.id].push_back("    FAIL no checks found for " + c.title);
    }
    verdict[c.id] = ok;
  }

  int failed = 0;
  std::map<int, std::string> titles;
  for (const auto& c : criteria) titles[c.id] += (titles[c.id].empty() ? "" : "; ") + c.title;
  for (const auto& [id, ok] : verdict) {
    std::printf("criterion %d %s: %s\n", id, ok ? "PASS" : "FAIL", titles[id].c_str());
    for (const auto& l : lines[id]) std::printf("%s\n", l.c_str());
    failed += !ok;
  }
  std::printf("%d of %zu criteria pass\n", static_cast<int>(verdict.size()) - failed, verdict.size());
  return failed == 0 ? 0 : 1;
}
