#include "geotomo/rates.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <boost/math/distributions/students_t.hpp>

#include "geotomo/errors.hpp"

namespace geotomo {

SlopeFit fit_slope(const std::vector<std::pair<double, double>>& pairs) {
  std::vector<double> xs, ys;
  SlopeFit fit;
  for (const auto& [tau, value] : pairs) {
    if (!(value > 0.0) || !std::isfinite(value) || !(tau > 0.0)) {
      ++fit.dropped;
      continue;
    }
    xs.push_back(std::log(tau));
    ys.push_back(std::log(value));
  }
  const int n = static_cast<int>(xs.size());
  fit.used = n;
  if (n < 4) {
    throw Error("fit_slope: fewer than 4 positive values (" + std::to_string(n) + ")");
  }
  double mx = 0.0, my = 0.0;
  for (int i = 0; i < n; ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (int i = 0; i < n; ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  if (sxx <= 0.0) throw Error("fit_slope: degenerate tau ladder");
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double sse = 0.0;
  for (int i = 0; i < n; ++i) {
    const double r = ys[i] - (fit.intercept + fit.slope * xs[i]);
    sse += r * r;
  }
  const double se = std::sqrt(sse / (n - 2) / sxx);
  boost::math::students_t dist(n - 2);
  fit.band = boost::math::quantile(boost::math::complement(dist, 0.025)) * se;
  return fit;
}

RateReport make_rate_report(std::string quantity,
                            std::vector<std::pair<double, double>> samples,
                            double target, double slack, double zero_floor,
                            bool require_monotone) {
  RateReport rep;
  rep.quantity = std::move(quantity);
  rep.samples = std::move(samples);
  rep.target = target;
  rep.slack = slack;
  std::sort(rep.samples.begin(), rep.samples.end());

  const bool all_zero = std::all_of(rep.samples.begin(), rep.samples.end(),
                                    [&](const auto& p) { return std::abs(p.second) <= zero_floor; });
  if (all_zero) {
    rep.vanishing = true;
    rep.pass = true;
    rep.slope = 0.0;
    rep.note = "all values vanish";
    return rep;
  }

  bool nonincreasing = true, nondecreasing = true;
  for (std::size_t i = 1; i < rep.samples.size(); ++i) {
    if (rep.samples[i].second > rep.samples[i - 1].second) nonincreasing = false;
    if (rep.samples[i].second < rep.samples[i - 1].second) nondecreasing = false;
  }
  rep.monotone = nonincreasing || nondecreasing;

  try {
    const SlopeFit fit = fit_slope(rep.samples);
    rep.slope = fit.slope;
    rep.band = fit.band;
    rep.pass = fit.slope <= target + slack;
    if (fit.dropped > 0) rep.note = std::to_string(fit.dropped) + " nonpositive values dropped";
  } catch (const Error& e) {
    rep.pass = false;
    rep.note = e.what();
    return rep;
  }
  if (require_monotone && !rep.monotone) {
    rep.pass = false;
    rep.note = rep.note.empty() ? "nonmonotone norms" : rep.note + "; nonmonotone norms";
  }
  return rep;
}

std::vector<double> geometric_ladder(double start, double ratio, int count) {
  std::vector<double> out;
  out.reserve(count);
  double t = start;
  for (int i = 0; i < count; ++i) {
    out.push_back(t);
    t *= ratio;
  }
  return out;
}

}  // namespace geotomo
