#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "geotomo/errors.hpp"
#include "geotomo/mollify.hpp"

using namespace geotomo;

namespace {

constexpr double kPi = std::numbers::pi;

const std::vector<double> kLadder = geometric_ladder(8.0, std::sqrt(2.0), 5);

Conductivity reference_cusp() { return cusp_conductivity(vec3(0.02, -0.03, 0.01), 0.5, 1.8, 0.45); }

const RateReport& find(const std::vector<RateReport>& reps, const std::string& name) {
  for (const auto& r : reps) {
    if (r.quantity == name) return r;
  }
  throw std::runtime_error("missing report " + name);
}

}  // namespace

TEST(Mollifier, UnitMassAndDerivatives) {
  // Composite Simpson on the radial profile, independent of the Gauss rule.
  const int n = 20000;
  double mass = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double s = static_cast<double>(i) / n;
    const double w = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    mass += w * 4.0 * kPi * s * s * Mollifier::value(s);
  }
  EXPECT_NEAR(mass / (3.0 * n), 1.0, 1e-10);
  for (double s : {0.1, 0.4, 0.8, 0.95}) {
    const double d = 1e-5;
    EXPECT_NEAR(Mollifier::first(s), (Mollifier::value(s + d) - Mollifier::value(s - d)) / (2 * d), 1e-5);
    EXPECT_NEAR(Mollifier::second(s),
                (Mollifier::value(s + d) - 2 * Mollifier::value(s) + Mollifier::value(s - d)) / (d * d), 1e-3);
  }
  EXPECT_EQ(Mollifier::value(1.0), 0.0);
}

TEST(Mollify, UnitConductivityIsExactlyZero) {
  const MollifiedFamily family(constant_conductivity(1.0), 0.25);
  const auto field = family.at(16.0);
  const MollifiedPoint p = field->evaluate(vec3(0.1, 0.2, 0.3));
  EXPECT_EQ(p.phi_tau, 0.0);
  EXPECT_EQ(p.grad_tau.norm(), 0.0);
  EXPECT_EQ(p.lap_tau, 0.0);
  for (const auto& r : mollifier_rate_reports(family, kLadder)) {
    EXPECT_TRUE(r.vanishing) << r.quantity;
    EXPECT_TRUE(r.pass) << r.quantity;
  }
}

TEST(Mollify, NonpositiveConductivityIsDomainError) {
  const Conductivity bad = bump_conductivity(vec3(0, 0, 0), 0.3, -2.0);
  EXPECT_THROW(MollifiedField(bad, 8.0, 0.125), DomainError);
}

TEST(Mollify, UnknownSupportIsRejected) {
  EXPECT_THROW(MollifiedField(constant_conductivity(2.0), 8.0, 0.125), PreconditionError);
}

TEST(Mollify, PointwiseQuadratureMatchesFftSnapshot) {
  const MollifiedField field(reference_cusp(), 11.3, 1.0 / 11.3);
  const auto snap = field.snapshot();
  double worst = 0.0;
  for (std::size_t i = 0; i < snap.phi_tau.size(); i += 211) {
    const Eigen::Vector3d x = snap.grid.point(i);
    const MollifiedPoint p = field.evaluate(vec3(x(0), x(1), x(2)));
    worst = std::max({worst, std::abs(p.phi_tau - snap.phi_tau[i]), (p.grad_tau - snap.grad_tau[i]).norm(),
                      std::abs(p.lap_tau - snap.lap_tau[i])});
  }
  EXPECT_LT(worst, 1e-10);
}

TEST(Mollify, GradientAndLaplacianAreDerivativesOfPhiTau) {
  const MollifiedField field(bump_conductivity(vec3(0, 0, 0), 0.4, 0.6), 10.0, 0.1);
  const Vec x = vec3(0.11, -0.07, 0.05);
  const double d = 1e-4;
  const MollifiedPoint p = field.evaluate(x);
  double lap = -6.0 * p.phi_tau;
  for (int a = 0; a < 3; ++a) {
    Vec xp = x, xm = x;
    xp(a) += d;
    xm(a) -= d;
    const double fp = field.evaluate(xp).phi_tau, fm = field.evaluate(xm).phi_tau;
    EXPECT_NEAR(p.grad_tau(a), (fp - fm) / (2 * d), 1e-6);
    lap += fp + fm;
  }
  EXPECT_NEAR(p.lap_tau, lap / (d * d), 1e-3);
}

TEST(Mollify, SmoothConductivityApproachesSecondOrder) {
  const MollifiedFamily family(bump_conductivity(vec3(0, 0, 0), 0.4, 0.6), 0.5);
  const auto reps = mollifier_rate_reports(family, kLadder);
  const RateReport& r = find(reps, "gamma-exp(phi_tau) Linf");
  EXPECT_LE(r.slope, -1.7);
  // Local slope over the last ladder step, approaching -2 from above.
  const auto& a = r.samples[r.samples.size() - 2];
  const auto& b = r.samples.back();
  EXPECT_LE(std::log(b.second / a.second) / std::log(b.first / a.first), -1.85);
  EXPECT_TRUE(find(reps, "A-A_tau L2").pass);
  EXPECT_TRUE(find(reps, "grad(gamma-exp(phi_tau)) Linf").pass);
}

TEST(Mollify, CuspFamilyMeetsAllRates) {
  const MollifiedFamily family(reference_cusp(), 0.25);
  const auto reps = mollifier_rate_reports(family, kLadder);
  ASSERT_EQ(reps.size(), 8u);
  for (const auto& r : reps) {
    EXPECT_TRUE(r.pass) << r.quantity << " slope " << r.slope << " target " << r.target;
    EXPECT_TRUE(r.monotone) << r.quantity;
  }
  EXPECT_LE(find(reps, "gamma-exp(phi_tau) Linf").slope, -1.0 - 0.25 + 0.1);
  EXPECT_LE(find(reps, "A-A_tau L2").slope, -0.5 - 0.25 + 0.1);
  EXPECT_LE(find(reps, "div A_tau Linf").slope, 1.0 + 0.1);
}

TEST(Mollify, LadderMustBeGeometricWithFivePoints) {
  const MollifiedFamily family(reference_cusp(), 0.25);
  EXPECT_THROW(mollifier_rate_reports(family, {8, 16, 32, 64}), PreconditionError);
  EXPECT_THROW(mollifier_rate_reports(family, {8, 9, 16, 32, 64}), PreconditionError);
}
