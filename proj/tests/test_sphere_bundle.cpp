#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "geotomo/errors.hpp"
#include "geotomo/sphere_bundle.hpp"

using namespace geotomo;

namespace {
constexpr double kPi = std::numbers::pi;
}

TEST(Influx, NormalAndTangentialLimits) {
  const MetricChart chart = spherical_cap(0.6, 0.4);
  const InfluxGrid grid = build_influx(chart, 16, 64);
  for (int i = 0; i < grid.n_boundary; ++i) {
    const auto& first = grid.at(i, 0);
    const auto& mid_lo = grid.at(i, 31);
    const Vec nu = outward_normal(chart, first.base);
    EXPECT_NEAR(norm_g(chart, first.base, first.xi), 1.0, 1e-12);
    EXPECT_NEAR(-inner_g(chart, first.base, first.xi, nu), first.mu, 1e-12);
    EXPECT_LT(first.mu, 0.03);
    EXPECT_GT(mid_lo.mu, 0.999);
  }
}

TEST(Influx, MuIntegratesToTwiceBoundaryLength) {
  const InfluxGrid grid = build_influx(euclidean_disc(), 32, 2000);
  double total = 0.0;
  for (const auto& s : grid.samples) total += s.mu * s.weight;
  EXPECT_NEAR(total, 4.0 * kPi, 4.0 * kPi * 1e-6);
}

TEST(Influx, CoordinatesRoundTrip) {
  const MetricChart chart = constant_curvature_disc(-0.5, 1.0);
  const InfluxGrid grid = build_influx(chart, 8, 10);
  for (const auto& s : grid.samples) {
    const auto [psi, alpha] = influx_coordinates(chart, s.base, s.xi);
    EXPECT_NEAR(psi, s.psi, 1e-12);
    EXPECT_NEAR(alpha, s.alpha, 1e-12);
  }
}

TEST(Influx, RejectsBoxCharts) {
  const MetricChart box = conformal_cylinder(vec3(0, -0.5, -0.5), vec3(1, 0.5, 0.5));
  EXPECT_THROW(build_influx(box, 4, 4), DomainError);
}

TEST(RayNodes, EuclideanChordIsExact) {
  const MetricChart chart = euclidean_disc();
  TraceOptions opts;
  opts.step = 0.05;
  const GeodesicTrace tr = geodesic_trace(chart, {vec2(-1, 0), vec2(1, 0)}, opts);
  const RayNodes nodes = ray_nodes(tr, 0.05);
  ASSERT_EQ(nodes.t.size() % 2, 1u);
  double length = 0.0, moment = 0.0;
  for (std::size_t j = 0; j < nodes.t.size(); ++j) {
    length += nodes.w[j];
    moment += nodes.w[j] * nodes.x[j](0);
    EXPECT_NEAR(nodes.x[j](0), -1.0 + nodes.t[j], 1e-9);
    EXPECT_NEAR(nodes.xi[j](0), 1.0, 1e-9);
  }
  EXPECT_NEAR(length, 2.0, 1e-9);
  EXPECT_NEAR(moment, 0.0, 1e-9);
}

TEST(Santalo, ConstantGivesSphereBundleVolume) {
  const MetricChart chart = euclidean_disc();
  const BundleQuadrature quad = build_bundle_quadrature(chart, 64, 64, 16, 32, 16);
  const auto res = santalo_check(chart, [](const Vec&, const Vec&) { return 1.0; }, quad, 0.02);
  EXPECT_NEAR(res.lhs, 2.0 * kPi * kPi, 1e-10);
  EXPECT_NEAR(res.rhs, 2.0 * kPi * kPi, 2e-3);
}

TEST(Santalo, RadialBumpMatchesClosedForm) {
  const MetricChart chart = euclidean_disc();
  const BundleQuadrature quad = build_bundle_quadrature(chart, 64, 96, 24, 32, 8);
  const auto F = [](const Vec& x, const Vec&) { return std::exp(-4.0 * x.squaredNorm()); };
  const double exact = 2.0 * kPi * kPi / 4.0 * (1.0 - std::exp(-4.0));
  const auto res = santalo_check(chart, F, quad, 0.02);
  EXPECT_NEAR(res.lhs, exact, 1e-8 * exact);
  EXPECT_LT(std::abs(res.rhs - exact) / exact, 1e-3);
}

TEST(Santalo, CurvedCapAgreesWithProductQuadrature) {
  const MetricChart chart = spherical_cap(0.6, 0.4);
  const BundleQuadrature quad = build_bundle_quadrature(chart, 64, 96, 24, 48, 24);
  const auto F = [](const Vec& x, const Vec& xi) {
    return std::exp(-3.0 * (x - vec2(0.1, -0.2)).squaredNorm()) * (1.0 + 0.5 * xi(0) * xi(0));
  };
  const auto res = santalo_check(chart, F, quad, 0.02);
  EXPECT_LT(res.rel_err, 1e-3);
}

TEST(Santalo, OddFieldVanishes) {
  const MetricChart chart = euclidean_disc();
  const BundleQuadrature quad = build_bundle_quadrature(chart, 32, 32, 12, 24, 16);
  const auto F = [](const Vec& x, const Vec& xi) { return xi(0) * std::exp(-x.squaredNorm()); };
  const auto res = santalo_check(chart, F, quad, 0.02);
  EXPECT_LT(std::abs(res.lhs), 1e-10);
  EXPECT_LT(std::abs(res.rhs), 1e-6);
}
