#include "geotomo/rates.hpp"

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "geotomo/errors.hpp"

namespace geotomo {
namespace {

TEST(FitSlope, ExactPowerLaw) {
  std::vector<std::pair<double, double>> pairs;
  for (double tau : geometric_ladder(4.0, 2.0, 6)) pairs.emplace_back(tau, 1.0 / tau);
  const SlopeFit fit = fit_slope(pairs);
  EXPECT_NEAR(fit.slope, -1.0, 1e-12);
  EXPECT_NEAR(fit.band, 0.0, 1e-10);
}

TEST(FitSlope, Constant) {
  std::vector<std::pair<double, double>> pairs;
  for (double tau : geometric_ladder(1.0, std::sqrt(2.0), 5)) pairs.emplace_back(tau, 3.7);
  EXPECT_NEAR(fit_slope(pairs).slope, 0.0, 1e-12);
}

TEST(FitSlope, NoisySyntheticPowerLaw) {
  std::mt19937_64 rng(20241015);
  std::uniform_real_distribution<double> noise(-1.0, 1.0);
  std::vector<std::pair<double, double>> pairs;
  for (double tau : geometric_ladder(8.0, std::sqrt(2.0), 9)) {
    pairs.emplace_back(tau, std::pow(tau, -1.5) * (1.0 + 0.01 * noise(rng)));
  }
  const SlopeFit fit = fit_slope(pairs);
  EXPECT_GE(fit.slope, -1.55);
  EXPECT_LE(fit.slope, -1.45);
  EXPECT_GT(fit.band, 0.0);
}

TEST(FitSlope, FiltersNonpositiveAndRejectsShortLadders) {
  std::vector<std::pair<double, double>> pairs = {{1, 1}, {2, 0.5}, {4, 0.0}, {8, -1}, {16, 1.0 / 16}};
  EXPECT_THROW(fit_slope(pairs), Error);
  pairs.emplace_back(32, 1.0 / 32);
  const SlopeFit fit = fit_slope(pairs);
  EXPECT_EQ(fit.used, 4);
  EXPECT_EQ(fit.dropped, 2);
  EXPECT_NEAR(fit.slope, -1.0, 1e-12);
}

TEST(RateReport, VanishingPassesTrivially) {
  const RateReport rep = make_rate_report("zero", {{8, 0}, {16, 0}, {32, 0}, {64, 0}, {128, 0}}, -1.0, 0.1);
  EXPECT_TRUE(rep.vanishing);
  EXPECT_TRUE(rep.pass);
}

TEST(RateReport, SlackAndMonotonicity) {
  std::vector<std::pair<double, double>> s;
  for (double tau : geometric_ladder(8, 2, 5)) s.emplace_back(tau, std::pow(tau, -0.95));
  EXPECT_TRUE(make_rate_report("q", s, -1.0, 0.1).pass);
  EXPECT_FALSE(make_rate_report("q", s, -1.0, 0.01).pass);
  s[2].second *= 10.0;
  const RateReport rep = make_rate_report("q", s, 5.0, 0.1);
  EXPECT_FALSE(rep.monotone);
  EXPECT_FALSE(rep.pass);
}

}  // namespace
}  // namespace geotomo
