#pragma once

#include <string>
#include <utility>
#include <vector>

namespace geotomo {

struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  /// Half-width of the 95% confidence band on the slope.
  double band = 0.0;
  /// Number of pairs that survived the positivity filter.
  int used = 0;
  int dropped = 0;
};

/// Least-squares slope of log(value) against log(tau).  Nonpositive or
/// non-finite values are dropped; fewer than four survivors is an error.
SlopeFit fit_slope(const std::vector<std::pair<double, double>>& pairs);

/// One o(.)/O(.) claim realized as a log-log regression over a tau ladder.
struct RateReport {
  std::string quantity;
  std::vector<std::pair<double, double>> samples;
  double slope = 0.0;
  double band = 0.0;
  double target = 0.0;
  double slack = 0.0;
  bool monotone = true;
  /// All samples were (numerically) zero; the claim holds trivially.
  bool vanishing = false;
  bool pass = false;
  std::string note;
};

/// Fits the samples and sets pass iff slope <= target + slack (and, when
/// required, the values are monotone in tau).  Vanishing
/// data passes trivially; a failed fit yields pass = false with a note.
RateReport make_rate_report(std::string quantity,
                            std::vector<std::pair<double, double>> samples,
                            double target, double slack,
                            double zero_floor = 1e-14,
                            bool require_monotone = true);

/// Geometric ladder start * ratio^k, k = 0..count-1.
std::vector<double> geometric_ladder(double start, double ratio, int count);

}  // namespace geotomo
