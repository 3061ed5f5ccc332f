#pragma once

#include <string>

#include "geotomo/harness.hpp"

namespace geotomo::suites {

struct Context {
  const ExperimentConfig& cfg;
  /// Output directory, with a trailing slash.
  std::string dir;
  SuiteReport& rep;

  std::string path(const std::string& name) const { return dir + rep.suite + "_" + name; }
};

/// value <= tol.
void check_below(Context& c, const std::string& name, double value, double tol);
/// value >= bound.
void check_above(Context& c, const std::string& name, double value, double bound);
/// |value - target| <= tol.
void check_near(Context& c, const std::string& name, double value, double target, double tol);
/// Adds the rate row and a check on its slope.
void add_rate(Context& c, const RateReport& r);

void geometry(Context& c);
void santalo(Context& c);
void raytransform(Context& c);
void mollify(Context& c);
void g0(Context& c);
void cgo(Context& c);
void carleman(Context& c);
void forward(Context& c);
void theorem2(Context& c);

}  // namespace geotomo::suites
