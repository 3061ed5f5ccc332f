#include "geotomo/geometry.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "geotomo/errors.hpp"

namespace geotomo {
namespace {

constexpr double kPi = std::numbers::pi;

// Closed-form symbols of a conformal metric e^{2 sigma} e:
// Gamma^k_ij = delta_ik s_j + delta_jk s_i - delta_ij s_k, s = grad sigma.
double conformal_gamma(const Vec& s, int k, int i, int j) {
  return (i == k ? s(j) : 0.0) + (j == k ? s(i) : 0.0) - (i == j ? s(k) : 0.0);
}

TEST(Christoffel, FlatDiscVanishes) {
  const MetricChart disc = euclidean_disc();
  const Christoffel g = christoffel(disc, vec2(0.3, -0.4));
  for (int k = 0; k < 2; ++k)
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) EXPECT_NEAR(g(k, i, j), 0.0, 1e-12);
}

TEST(Christoffel, CapMatchesSymbolicDerivative) {
  const double K = 1.0;
  const MetricChart cap = spherical_cap(0.6);
  const Vec x = vec2(0.21, -0.35);
  const Christoffel g = christoffel(cap, x);
  // sigma = log 2 - log(1 + K |x|^2)
  const Vec s = -2.0 * K * x / (1.0 + K * x.squaredNorm());
  for (int k = 0; k < 2; ++k)
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) {
        EXPECT_NEAR(g(k, i, j), conformal_gamma(s, k, i, j), 1e-6);
        EXPECT_DOUBLE_EQ(g(k, i, j), g(k, j, i));
      }
}

TEST(Christoffel, ConformalCylinderMatchesClosedForm) {
  const MetricChart cyl = conformal_cylinder(vec3(0, -0.5, -0.5), vec3(1, 0.5, 0.5));
  const Vec x = vec3(0.4, 0.1, -0.2);
  const Christoffel g = christoffel(cyl, x);
  const Vec s = vec3(1.0, 0.0, 0.0);
  for (int k = 0; k < 3; ++k)
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) EXPECT_NEAR(g(k, i, j), conformal_gamma(s, k, i, j), 1e-6);
}

TEST(Christoffel, OutsideChartIsDomainError) {
  EXPECT_THROW(christoffel(euclidean_disc(1.0, 0.25), vec2(2.0, 0.0)), DomainError);
}

TEST(GeodesicTrace, EuclideanChord) {
  const MetricChart disc = euclidean_disc();
  const GeodesicTrace tr = geodesic_trace(disc, {vec2(-1, 0), vec2(1, 0)});
  EXPECT_NEAR(tr.exit_time, 2.0, 1e-8);
  EXPECT_NEAR(tr.exit_point(0), 1.0, 1e-8);
  EXPECT_NEAR(tr.exit_point(1), 0.0, 1e-8);
  const GeodesicTrace dia = geodesic_trace(disc, {vec2(0, -1), vec2(0, 1)});
  EXPECT_NEAR(dia.exit_time, 2.0, 1e-8);
  for (std::size_t i = 0; i + 1 < tr.samples.size(); ++i) {
    EXPECT_LE(disc.sdf(tr.samples[i].x), 0.0);
  }
  EXPECT_LE(std::abs(disc.sdf(tr.exit_point)), 1e-10);
}

TEST(GeodesicTrace, CapRichardsonSelfConsistency) {
  const MetricChart cap = spherical_cap(0.7);
  const PhaseState start{vec2(0.1, -0.2), vec2(0.6, 0.8)};
  TraceOptions coarse;
  coarse.step = 0.02;
  TraceOptions fine = coarse;
  fine.step = 0.01;
  const GeodesicTrace a = geodesic_trace(cap, start, coarse);
  const GeodesicTrace b = geodesic_trace(cap, start, fine);
  EXPECT_LE((a.exit_point - b.exit_point).norm(), 1e-7);
  EXPECT_NEAR(a.exit_time, b.exit_time, 1e-7);
}

TEST(GeodesicTrace, UnitSpeedDriftPerUnitTime) {
  const MetricChart cap = spherical_cap(0.7);
  PhaseState s = normalized(cap, {vec2(0.0, -0.3), vec2(1.0, 1.0)});
  const double h = 0.02;
  double drift = 0.0;
  for (int i = 0; i < 50; ++i) {
    s = rk4_step(cap, s, h);
    drift = std::max(drift, std::abs(inner_g(cap, s.x, s.xi, s.xi) - 1.0));
  }
  EXPECT_LE(drift, 1e-8);
}

TEST(GeodesicTrace, TimeReversal) {
  const MetricChart cap = spherical_cap(0.7);
  const double psi = 0.4;
  const Vec p = vec2(0.7 * std::cos(psi), 0.7 * std::sin(psi));
  const Vec nu = outward_normal(cap, p);
  const Vec tangent = vec2(-nu(1), nu(0));
  const GeodesicTrace fwd = geodesic_trace(cap, {p, Vec(-0.8 * nu + 0.6 * tangent / tangent.norm() * norm_g(cap, p, nu))});
  const GeodesicTrace back = geodesic_trace(cap, {fwd.exit_point, Vec(-fwd.exit_direction)});
  EXPECT_NEAR(back.exit_time, fwd.exit_time, 1e-7);
  EXPECT_LE((back.exit_point - p).norm(), 1e-7);
}

TEST(GeodesicTrace, StepHalvingOrderIsFour) {
  const MetricChart cap = spherical_cap(0.7);
  const Vec omega = vec2(-0.3, 0.1);
  const Vec dir = vec2(0.7, 0.4);
  const double r = 1.0;
  const Vec ref = exp_map(cap, omega, r, dir, 0.1 / 64);
  std::vector<double> errors;
  for (double h : {0.2, 0.1, 0.05}) errors.push_back((exp_map(cap, omega, r, dir, h) - ref).norm());
  for (std::size_t i = 1; i < errors.size(); ++i) {
    const double order = std::log2(errors[i - 1] / errors[i]);
    EXPECT_GE(order, 3.5);
    EXPECT_LE(order, 4.5);
  }
}

TEST(GeodesicTrace, TrappedGeodesicReported) {
  // A huge curvature-free "disc" with a tiny time budget.
  const MetricChart disc = euclidean_disc(10.0);
  TraceOptions opts;
  opts.max_time = 1.0;
  opts.step = 0.1;
  EXPECT_THROW(geodesic_trace(disc, {vec2(0, 0), vec2(1, 0)}, opts), TrappedGeodesicError);
}

TEST(ExpMap, EuclideanIsStraight) {
  const MetricChart disc = euclidean_disc();
  const Vec omega = vec2(-1.1, 0.05);
  const Vec theta = vec2(0.8, -0.6);
  EXPECT_LE((exp_map(disc, omega, 0.9, theta) - (omega + 0.9 * theta)).norm(), 1e-9);
  EXPECT_EQ(exp_map(disc, omega, 0.0, theta), omega);
}

TEST(ExpMap, LeavingEnlargedChartIsRangeError) {
  const MetricChart disc = euclidean_disc(1.0, 0.25);
  EXPECT_THROW(exp_map(disc, vec2(0, 0), 2.0, vec2(1, 0)), RangeError);
}

TEST(PolarCoords, EuclideanClosedForm) {
  const MetricChart disc = euclidean_disc();
  const Vec omega = vec2(-1.15, 0.0);
  const Vec x = vec2(0.2, 0.3);
  const PolarPoint p = polar_coords(disc, omega, x);
  const Vec d = x - omega;
  EXPECT_NEAR(p.r, d.norm(), 1e-9);
  EXPECT_NEAR(p.theta, std::atan2(d(1), d(0)), 1e-9);
  EXPECT_NEAR(p.det_g0, d.squaredNorm(), 1e-6);
}

TEST(PolarCoords, CapRoundTripOnRandomPoints) {
  const MetricChart cap = spherical_cap(0.6, 0.4);
  const Vec omega = vec2(-0.7, 0.0);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  int done = 0;
  while (done < 100) {
    const Vec x = vec2(0.6 * u(rng), 0.6 * u(rng));
    if (x.norm() > 0.6) continue;
    const PolarPoint p = polar_coords(cap, omega, x);
    EXPECT_LE((exp_map(cap, omega, p.r, p.theta) - x).norm(), 1e-6);
    ++done;
  }
}

TEST(PolarCoords, GaussLemma) {
  const MetricChart cap = spherical_cap(0.6, 0.4);
  const Vec omega = vec2(-0.7, 0.0);
  for (double r : {0.3, 0.7, 1.0}) {
    for (double theta : {-0.4, 0.0, 0.3}) {
      const double d = 1e-5;
      const Vec x = exp_map(cap, omega, r, theta);
      const Vec dr = (exp_map(cap, omega, r + d, theta) - exp_map(cap, omega, r - d, theta)) / (2 * d);
      const Vec dt = (exp_map(cap, omega, r, theta + d) - exp_map(cap, omega, r, theta - d)) / (2 * d);
      EXPECT_LE(std::abs(inner_g(cap, x, dr, dt)), 1e-6);
    }
  }
}

TEST(Simplicity, EuclideanDiscPasses) {
  const SimplicityReport rep = simplicity_check(euclidean_disc(), 16);
  EXPECT_NEAR(rep.min_second_fundamental_form, 1.0, 1e-6);
  EXPECT_FALSE(rep.conjugate_points);
  EXPECT_TRUE(rep.pass);
  EXPECT_NEAR(rep.max_exit_time, 2.0, 0.05);
}

TEST(Simplicity, HighCurvatureDiscFailsWithConjugatePoints) {
  const SimplicityReport rep = simplicity_check(constant_curvature_disc(3.0, 1.0, 0.1), 12);
  EXPECT_TRUE(rep.conjugate_points);
  EXPECT_FALSE(rep.pass);
}

TEST(Simplicity, CapInsideHemispherePasses) {
  const SimplicityReport rep = simplicity_check(spherical_cap(0.5), 12);
  EXPECT_GT(rep.min_second_fundamental_form, 0.0);
  EXPECT_TRUE(rep.pass);
}

}  // namespace
}  // namespace geotomo
