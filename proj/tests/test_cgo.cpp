#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <string>

#include "geotomo/cgo.hpp"
#include "geotomo/conductivity.hpp"
#include "geotomo/errors.hpp"

using namespace geotomo;

namespace {

constexpr double kPi = 3.14159265358979323846;
const Complex kI(0.0, 1.0);

Vec vec3(double a, double b, double c) {
  Vec v(3);
  v << a, b, c;
  return v;
}

MollifiedFamily cusp_family() {
  return MollifiedFamily(cusp_conductivity(vec3(0.02, -0.03, 0.01), 0.5, 1.8, 0.45), 0.25);
}

MollifiedFamily smooth_family() {
  return MollifiedFamily(bump_conductivity(vec3(0.05, 0.0, -0.05), 0.4, 0.6), 0.25);
}

MollifiedFamily flat_family() { return MollifiedFamily(constant_conductivity(1.0), 0.25); }

CField random_field(const SpectralBox& box, unsigned seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> nd;
  CField v(static_cast<Eigen::Index>(box.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = Complex(nd(rng), nd(rng));
  return v;
}

/// Sum of three narrow Gaussians with random centers and complex weights.
CField smooth_test_field(const SpectralBox& box, unsigned seed, double width = 0.02) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> ud(-0.2, 0.2);
  CField v = CField::Zero(static_cast<Eigen::Index>(box.size()));
  for (int g = 0; g < 3; ++g) {
    const Eigen::Vector3d c(ud(rng), ud(rng), ud(rng));
    const Complex w(ud(rng) * 5.0, ud(rng) * 5.0);
    for (std::size_t i = 0; i < box.size(); ++i)
      v(static_cast<Eigen::Index>(i)) += w * std::exp(-(box.point(i) - c).squaredNorm() / width);
  }
  return v;
}

}  // namespace

TEST(Spectral, TransformsRoundTrip) {
  const SpectralOperators ops{SpectralBox{}};
  const CField u = random_field(ops.box(), 1);
  EXPECT_LE((ops.from_modes(ops.to_modes(u)) - u).norm(), 1e-11 * u.norm());
  EXPECT_NEAR(ops.to_modes(u).norm(), u.norm(), 1e-10 * u.norm());
}

TEST(Spectral, DerivativesOfSingleModesAreExact) {
  const SpectralBox box;
  const SpectralOperators ops(box);
  const double L = box.half_length, a = box.half_width;
  const double xi = kPi * 3.5 / L, k2 = 4 * kPi / (2 * a), k3 = 7 * kPi / (2 * a);
  CField u(static_cast<Eigen::Index>(box.size())), d1(u.size()), d2(u.size()), lap(u.size());
  for (std::size_t i = 0; i < box.size(); ++i) {
    const Eigen::Vector3d x = box.point(i);
    const Complex e = std::exp(kI * xi * (x(0) + L));
    const double s2 = std::sin(k2 * (x(1) + a)), s3 = std::sin(k3 * (x(2) + a));
    const auto j = static_cast<Eigen::Index>(i);
    u(j) = e * s2 * s3;
    d1(j) = kI * xi * u(j);
    d2(j) = e * k2 * std::cos(k2 * (x(1) + a)) * s3;
    lap(j) = -(xi * xi + k2 * k2 + k3 * k3) * u(j);
  }
  EXPECT_LE((ops.derivative(u, 0) - d1).norm(), 1e-10 * d1.norm());
  EXPECT_LE((ops.derivative(u, 1) - d2).norm(), 1e-10 * d2.norm());
  const CField l = ops.second_derivative(u, 0) + ops.second_derivative(u, 1) + ops.second_derivative(u, 2);
  EXPECT_LE((l - lap).norm(), 1e-10 * lap.norm());
}

TEST(Spectral, DerivativeAdjointPairing) {
  const SpectralOperators ops{SpectralBox{}};
  const CField u = random_field(ops.box(), 2), v = random_field(ops.box(), 3);
  for (int a = 0; a < 3; ++a) {
    const Complex lhs = ops.inner(ops.derivative(u, a), v);
    const Complex rhs = ops.inner(u, ops.derivative_adjoint(v, a));
    EXPECT_LE(std::abs(lhs - rhs), 1e-10 * std::abs(lhs)) << "axis " << a;
  }
}

TEST(ShiftedLaplacian, ResidualOnRandomRhs) {
  const SpectralOperators ops{SpectralBox{}};
  for (double sigma : {-8.0, 16.0, -32.0}) {
    const ShiftedLaplacian g0(ops, sigma);
    const CField f = random_field(ops.box(), 4);
    EXPECT_LE((g0.apply(g0.solve(f)) - f).norm(), 1e-6 * f.norm()) << sigma;
  }
}

TEST(ShiftedLaplacian, TransversalModeStaysPure) {
  const SpectralBox box;
  const SpectralOperators ops(box);
  const ShiftedLaplacian g0(ops, -12.0);
  const double a = box.half_width, k2 = 3 * kPi / (2 * a), k3 = 2 * kPi / (2 * a);
  CField f(static_cast<Eigen::Index>(box.size()));
  for (std::size_t i = 0; i < box.size(); ++i) {
    const Eigen::Vector3d x = box.point(i);
    f(static_cast<Eigen::Index>(i)) = std::exp(-x(0) * x(0) / 0.02) * std::sin(k2 * (x(1) + a)) *
                                      std::sin(k3 * (x(2) + a));
  }
  const CField c = ops.to_modes(g0.solve(f));
  double inside = 0.0, leak = 0.0;
  for (int l = 0; l < box.nt; ++l)
    for (int k = 0; k < box.nt; ++k)
      for (int m = 0; m < box.n1; ++m) {
        const double v = std::norm(c(static_cast<Eigen::Index>(box.index(m, k, l))));
        (k == 2 && l == 1 ? inside : leak) += v;
      }
  EXPECT_LE(std::sqrt(leak / inside), 1e-8);
}

TEST(ShiftedLaplacian, NormLadderSlopes) {
  const SpectralBox box;
  const double targets[3] = {-1.0, 0.0, 1.0};
  for (int s = 0; s <= 2; ++s) {
    std::vector<std::pair<double, double>> samples;
    for (double tau : geometric_ladder(8.0, 2.0, 5)) samples.emplace_back(tau, g0_operator_norm(box, tau, s));
    EXPECT_NEAR(fit_slope(samples).slope, targets[s], 0.15) << "s = " << s;
  }
}

TEST(ShiftedLaplacian, DiscreteNormMatchesSymbolBound) {
  const SpectralOperators ops{SpectralBox{}};
  const double tau = 16.0;
  const ShiftedLaplacian g0(ops, -tau);
  const double measured = power_norm(
      ops, [&](const CField& v) { return g0.solve(v); },
      [&](const CField& v) { return g0.solve_adjoint(v); }, 40);
  const double bound = g0_operator_norm(ops.box(), tau, 0);
  EXPECT_LE(measured, bound * (1 + 1e-9));
  EXPECT_GE(measured, 0.9 * bound);
}

TEST(ShiftedLaplacian, ExceptionalTauDetectedAndRetried) {
  SpectralBox box;
  box.twisted = false;
  const SpectralOperators ops(box);
  const double tau = std::sqrt(2.0) * kPi / (2.0 * box.half_width);
  EXPECT_THROW(ShiftedLaplacian(ops, -tau), ExceptionalTauError);
  EXPECT_NO_THROW(ShiftedLaplacian(ops, -tau * (1 + 1e-3)));

  CGOOptions opt;
  opt.box = box;
  opt.box.n1 = 24;
  opt.box.nt = 25;
  CGOParams p;
  p.tau = tau;
  const CGOSolution sol = build_cgo(p, flat_family(), opt);
  EXPECT_EQ(sol.retries, 1);
  EXPECT_NEAR(sol.tau, tau * (1 + 1e-3), 1e-12);
}

TEST(ShiftedLaplacian, TwistedModesNeverExceptional) {
  const SpectralOperators ops{SpectralBox{}};
  for (double tau = 4.0; tau <= 40.0; tau += 0.37) EXPECT_NO_THROW(ShiftedLaplacian(ops, tau));
}

TEST(Conjugation, FirstConjugationIdentity) {
  const SpectralBox box;
  const SpectralOperators ops(box);
  const auto field = smooth_family().at(4.0);
  const ConjugatedOperator c = conjugated_operator(box, *field, 0.0);
  for (unsigned seed : {11u, 12u, 13u}) {
    const CField w = smooth_test_field(box, seed);
    const CField e_minus = (-0.5 * c.phi_tau).array().exp().matrix().cast<Complex>();
    const CField z = e_minus.cwiseProduct(w);
    CField lhs = -(ops.second_derivative(z, 0) + ops.second_derivative(z, 1) + ops.second_derivative(z, 2));
    CField rhs = -(ops.second_derivative(w, 0) + ops.second_derivative(w, 1) + ops.second_derivative(w, 2));
    for (int a = 0; a < 3; ++a) {
      const Eigen::VectorXd A = c.A_diff[a] - c.grad_tau[a];
      lhs += A.cast<Complex>().cwiseProduct(ops.derivative(z, a));
      rhs += c.A_diff[a].cast<Complex>().cwiseProduct(ops.derivative(w, a));
    }
    lhs = lhs.cwiseQuotient(e_minus);
    rhs += c.q_tau.cast<Complex>().cwiseProduct(w);
    EXPECT_LE((lhs - rhs).norm(), 1e-6 * rhs.norm()) << seed << " " << (lhs - rhs).norm() / rhs.norm();
  }
}

TEST(Conjugation, SecondConjugationIdentity) {
  const SpectralBox box;
  const SpectralOperators ops(box);
  const auto field = smooth_family().at(8.0);
  for (double sigma : {-8.0, 8.0}) {
    const ConjugatedOperator c0 = conjugated_operator(box, *field, 0.0);
    const ConjugatedOperator cs = conjugated_operator(box, *field, sigma);
    const ShiftedLaplacian lap0(ops, 0.0), lap_s(ops, sigma);
    const CField w = smooth_test_field(box, 21, 0.01);
    CField e(w.size());
    for (std::size_t i = 0; i < box.size(); ++i)
      e(static_cast<Eigen::Index>(i)) = std::exp(sigma * box.point(i)(0));
    const CField z = e.cwiseProduct(w);
    const CField lhs = (lap0.apply(z) + apply_perturbation(ops, c0, z)).cwiseQuotient(e);
    const CField rhs = lap_s.apply(w) + apply_perturbation(ops, cs, w);
    EXPECT_LE((lhs - rhs).norm(), 1e-6 * rhs.norm()) << sigma;
  }
}

TEST(PerturbedInverse, ReducesToG0WhenCoefficientsVanish) {
  const SpectralBox box;
  const SpectralOperators ops(box);
  const ShiftedLaplacian g0(ops, -16.0);
  const auto field = flat_family().at(16.0);
  const ConjugatedOperator c = conjugated_operator(box, *field, -16.0);
  ASSERT_TRUE(c.vanishes());
  const PerturbedInverse g(g0, c);
  const CField f = random_field(box, 5);
  EXPECT_EQ(g.k_norm(), 0.0);
  EXPECT_EQ((g.solve(f) - g0.solve(f)).norm(), 0.0);
}

TEST(PerturbedInverse, ResidualAndNormAtTau32) {
  const SpectralBox box;
  const SpectralOperators ops(box);
  const double tau = 32.0;
  const ShiftedLaplacian g0(ops, -tau);
  const auto field = cusp_family().at(tau);
  const ConjugatedOperator c = conjugated_operator(box, *field, -tau);
  const PerturbedInverse g(g0, c);
  EXPECT_LT(g.k_norm(), 1.0);
  const CField f = random_field(box, 6);
  const CField w = g.solve(f);
  EXPECT_LE((g.apply(w) - f).norm(), 1e-6 * f.norm());

  const double n0 = power_norm(
      ops, [&](const CField& v) { return g0.solve(v); },
      [&](const CField& v) { return g0.solve_adjoint(v); }, 20);
  const double n = power_norm(
      ops, [&](const CField& v) { return g.solve(v); },
      [&](const CField& v) { return g.solve_adjoint(v); }, 20);
  EXPECT_LE(n, 2.0 * n0);
  EXPECT_GE(n, 0.5 * n0);
}

TEST(PerturbedInverse, AdjointPairing) {
  const SpectralBox box{0.75, 13.0 / 16.0, 24, 25, true};
  const SpectralOperators ops(box);
  const ShiftedLaplacian g0(ops, -8.0);
  const auto field = cusp_family().at(8.0);
  const ConjugatedOperator c = conjugated_operator(box, *field, -8.0);
  const PerturbedInverse g(g0, c);
  const CField u = random_field(box, 7), v = random_field(box, 8);
  const Complex lhs = ops.inner(g.solve(u), v), rhs = ops.inner(u, g.solve_adjoint(v));
  EXPECT_LE(std::abs(lhs - rhs), 1e-9 * std::abs(lhs));
}

TEST(PerturbedInverse, LargePerturbationDiverges) {
  const SpectralBox box{0.75, 13.0 / 16.0, 24, 25, true};
  const SpectralOperators ops(box);
  const ShiftedLaplacian g0(ops, -4.0);
  const auto field = cusp_family().at(4.0);
  ConjugatedOperator c = conjugated_operator(box, *field, -4.0);
  for (auto& a : c.A_diff) a *= 200.0;
  c.q_tilde *= 200.0;
  EXPECT_THROW(PerturbedInverse(g0, c), NeumannDivergenceError);
}

TEST(CGO, PolarAmplitudeDerivatives) {
  CGOParams p;
  p.lambda = 0.7;
  p.b.modes = {{0, Complex(1.0, 0.0)}, {2, Complex(0.3, -0.1)}, {-1, Complex(0.0, 0.2)}};
  const Eigen::Vector3d x(0.1, 0.2, -0.3);
  const PolarAmplitude pa = polar_amplitude(p, x);
  const double h = 1e-4;
  Complex lap = 0.0;
  for (int a = 0; a < 3; ++a) {
    Eigen::Vector3d e = Eigen::Vector3d::Zero();
    e(a) = h;
    const Complex fp = polar_amplitude(p, x + e).value, fm = polar_amplitude(p, x - e).value;
    EXPECT_LE(std::abs((fp - fm) / (2 * h) - pa.gradient(a)), 1e-6) << a;
    lap += (fp - 2.0 * pa.value + fm) / (h * h);
  }
  EXPECT_LE(std::abs(lap - pa.laplacian), 1e-4);
}

TEST(CGO, EikonalAndTransportCancelGrowth) {
  CGOParams p;
  std::vector<std::pair<double, double>> samples;
  for (double tau : geometric_ladder(4.0, std::sqrt(2.0), 5)) {
    p.tau = tau;
    samples.emplace_back(tau, applied_transport_residual(p, flat_family()));
  }
  const RateReport rep = make_rate_report("transport", samples, 0.0, 0.1, 1e-14, false);
  EXPECT_TRUE(rep.pass) << rep.slope;
}

TEST(CGO, AppliedAndClosedFormResidualAgree) {
  CGOParams p;
  p.tau = 8.0;
  p.lambda = 0.4;
  p.b.modes = {{0, Complex(1.0, 0.0)}, {1, Complex(0.2, 0.1)}};
  const MollifiedFamily fam = smooth_family();
  const double applied = applied_transport_residual(p, fam);
  const CGOSolution sol = build_cgo(p, fam);
  EXPECT_NEAR(applied, sol.rhs_l2, 1e-4 * sol.rhs_l2);
}

TEST(CGO, ReconstructionIsBitConsistent) {
  CGOParams p;
  p.tau = 8.0;
  const CGOSolution sol = build_cgo(p, cusp_family());
  const Eigen::VectorXcd u = reconstruct_u(sol);
  for (Eigen::Index i = 0; i < u.size(); ++i) ASSERT_EQ(u(i), sol.u(i));
  double worst = 0.0;
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    const double gap = std::abs(std::abs(sol.u(i) / sol.prefactor(i)) - std::abs(sol.amplitude(i)));
    worst = std::max(worst, gap - std::abs(sol.r_tilde(i)));
  }
  EXPECT_LE(worst, 1e-12);
}

TEST(CGO, FlatConductivityRemainderDecaysLikeInverseTau) {
  CGOParams p;
  const CGOLadder lad = cgo_ladder(p, flat_family(), geometric_ladder(4.0, std::sqrt(2.0), 5));
  EXPECT_NEAR(lad.remainder.slope, -1.0, 0.1);
  EXPECT_TRUE(lad.weak_ok);
}

TEST(CGO, CuspRemainderMeetsRate) {
  CGOParams p;
  const CGOLadder lad = cgo_ladder(p, cusp_family(), geometric_ladder(4.0, std::sqrt(2.0), 5));
  EXPECT_TRUE(lad.remainder.pass) << lad.remainder.slope;
  EXPECT_TRUE(lad.weak_ok);
  for (const auto& pt : lad.points) EXPECT_LT(pt.k_norm, 1.0);
}

TEST(CGO, GrowingPartnerSolvesEquation) {
  CGOParams p;
  p.tau = 8.0;
  p.conjugate = true;
  const MollifiedFamily fam = cusp_family();
  const CGOSolution sol = build_cgo(p, fam);
  EXPECT_GT(sol.sigma, 0.0);
  CGOOptions coarse;
  coarse.box = coarse.box.coarsened();
  const CGOSolution rough = build_cgo(p, fam, coarse);
  const double fine = weak_residual(sol, fam.gamma());
  EXPECT_LE(fine, std::abs(fine - weak_residual(rough, fam.gamma())));
}

TEST(CGO, CsvHasHeaderAndRows) {
  CGOParams p;
  p.tau = 4.0;
  CGOOptions opt;
  opt.box = opt.box.coarsened();
  const CGOSolution sol = build_cgo(p, flat_family(), opt);
  const std::string path = ::testing::TempDir() + "cgo.csv";
  write_cgo_csv(path, sol);
  std::ifstream is(path);
  std::string line;
  std::getline(is, line);
  EXPECT_EQ(line.rfind("# {", 0), 0u);
  std::getline(is, line);
  EXPECT_EQ(line, "idx,re_u,im_u,re_r,im_r");
  std::size_t rows = 0;
  while (std::getline(is, line)) ++rows;
  EXPECT_EQ(rows, sol.nodes.size());
  std::remove(path.c_str());
}
