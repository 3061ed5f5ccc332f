#include <gtest/gtest.h>

#include <cmath>

#include "geotomo/errors.hpp"
#include "geotomo/forward.hpp"

using namespace geotomo;

namespace {

FemGrid grid_of(int n) {
  FemGrid g;
  g.n = n;
  return g;
}

double max_node_error(const FemGrid& g, const Eigen::VectorXd& u,
                      const std::function<double(const Eigen::Vector3d&)>& exact) {
  double e = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) e = std::max(e, std::abs(u(static_cast<Eigen::Index>(i)) - exact(g.point(i))));
  return e;
}

// Antiderivative of 1 / gamma from -1/2 by composite Gauss quadrature.
double inverse_integral(const std::function<double(double)>& gamma, double x) {
  const QuadratureRule r = gauss_legendre(8);
  double s = 0.0;
  const int m = 64;
  const double h = (x + 0.5) / m;
  for (int k = 0; k < m; ++k)
    for (std::size_t q = 0; q < r.nodes.size(); ++q)
      s += 0.5 * h * r.weights[q] / gamma(-0.5 + (k + 0.5 + 0.5 * r.nodes[q]) * h);
  return s;
}

Conductivity smooth_one() { return bump_conductivity(vec3(0.05, 0.05, -0.05), 0.45, 0.4); }
Conductivity smooth_two() { return bump_conductivity(vec3(-0.05, 0.0, 0.05), 0.45, -0.25); }

double data_one(const Eigen::Vector3d& x) { return std::exp(2 * x(0)) * std::cos(2 * x(1)) + 0.5 * x(2); }
double data_two(const Eigen::Vector3d& x) { return std::exp(1.5 * x(1)) * std::cos(1.5 * x(2)) + x(0); }

}  // namespace

TEST(SolveDirichlet, LinearDataIsReproducedAtNodes) {
  const FemGrid g = grid_of(12);
  const ConductivitySolver s(g, constant_conductivity());
  const auto exact = [](const Eigen::Vector3d& x) { return x(0); };
  const Eigen::VectorXd u = s.solve_boundary(exact);
  EXPECT_LE(max_node_error(g, u, exact), 1e-12);
  EXPECT_LE(s.weak_residual(u), 1e-9);
}

TEST(SolveDirichlet, HarmonicQuadratic) {
  const FemGrid g = grid_of(16);
  const ConductivitySolver s(g, constant_conductivity());
  const auto exact = [](const Eigen::Vector3d& x) { return x(0) * x(0) - x(1) * x(1); };
  const Eigen::VectorXd u = s.solve_boundary(exact);
  EXPECT_LE(max_node_error(g, u, exact), 1e-6);
  EXPECT_LE(s.weak_residual(u), 1e-9);
}

TEST(SolveDirichlet, LayeredProfileMatchesOdeSolution) {
  const auto prof = [](double t) { return 1.0 + 0.1 * std::sin(3.0 * t); };
  const auto dprof = [](double t) { return 0.3 * std::cos(3.0 * t); };
  const double total = inverse_integral(prof, 0.5);
  const auto exact = [&](const Eigen::Vector3d& x) { return inverse_integral(prof, x(0)) / total; };
  std::vector<double> errs;
  for (int n : {16, 32}) {
    const FemGrid g = grid_of(n);
    const ConductivitySolver s(g, layered_conductivity(prof, dprof));
    const Eigen::VectorXd u = s.solve_boundary(exact);
    errs.push_back(max_node_error(g, u, exact));
    EXPECT_LE(s.weak_residual(u), 1e-9);
    if (n == 32) {
      // Flux gamma u' = 1 / total through the face x_1 = 1/2.
      const Eigen::VectorXd flux = s.flux(u);
      for (std::size_t b = 0; b < s.boundary().size(); ++b) {
        const auto c = g.ijk(s.boundary()[b]);
        if (c[0] != g.n || c[1] == 0 || c[1] == g.n || c[2] == 0 || c[2] == g.n) continue;
        EXPECT_NEAR(flux(static_cast<Eigen::Index>(b)), 1.0 / total, 1e-4);
      }
    }
  }
  EXPECT_LE(errs[1], 1e-6);
  EXPECT_GE(std::log2(errs[0] / errs[1]), 1.8);
}

TEST(SolveDirichlet, NonpositiveConductivityIsAnAssemblyError) {
  Conductivity bad = constant_conductivity();
  bad.value = [](const Vec& x) { return x(0); };
  EXPECT_THROW(ConductivitySolver(grid_of(4), bad), AssemblyError);
}

TEST(DNMap, LinearDataGivesNormalComponent) {
  const FemGrid g = grid_of(8);
  const DNMap dn = dn_map(ConductivitySolver(g, constant_conductivity()));
  Eigen::VectorXd f(static_cast<Eigen::Index>(dn.boundary.size()));
  for (std::size_t b = 0; b < dn.boundary.size(); ++b) f(static_cast<Eigen::Index>(b)) = g.point(dn.boundary[b])(0);
  const Eigen::VectorXd Lf = dn.apply(f);
  for (std::size_t b = 0; b < dn.boundary.size(); ++b) {
    const auto c = g.ijk(dn.boundary[b]);
    int faces = 0;
    for (int a = 0; a < 3; ++a) faces += (c[a] == 0 || c[a] == g.n);
    if (faces != 1) continue;
    const double nu1 = c[0] == 0 ? -1.0 : (c[0] == g.n ? 1.0 : 0.0);
    EXPECT_NEAR(Lf(static_cast<Eigen::Index>(b)), nu1, 1e-10);
  }
}

TEST(DNMap, SymmetricConservativeAndPartitioned) {
  const FemGrid g = grid_of(10);
  const DNMap dn = dn_map(ConductivitySolver(g, smooth_one()), 0.05);
  EXPECT_LE(dn.symmetry_error(10, 1), 1e-8);
  EXPECT_LE(dn.total_flux_error(10, 2), 1e-8);
  std::vector<int> seen(dn.boundary.size(), 0);
  for (int m : dn.mask_minus) {
    ++seen[static_cast<std::size_t>(m)];
    EXPECT_LT(dn.dphi(m), 0.05);
  }
  for (int m : dn.mask_plus) {
    ++seen[static_cast<std::size_t>(m)];
    EXPECT_GE(dn.dphi(m), 0.05);
  }
  for (int s : seen) EXPECT_EQ(s, 1);
  EXPECT_FALSE(dn.mask_plus.empty());
}

TEST(PartialData, IdenticalZeroDistinctVisibleMonotoneInEpsilon) {
  const FemGrid g = grid_of(10);
  const DNMap a = dn_map(ConductivitySolver(g, smooth_one()));
  const DNMap same = dn_map(ConductivitySolver(g, smooth_one()));
  const DNMap other = dn_map(ConductivitySolver(
      g, product(smooth_one(), bump_conductivity(vec3(0.1, -0.1, 0.0), 0.3, 0.2))));
  const double scale = Eigen::JacobiSVD<Eigen::MatrixXd>(a.matrix).singularValues()(0);
  EXPECT_LE(partial_data_residual(a, same, 0.05), 1e-10 * scale);
  const double tol = 1e-9 * scale;
  EXPECT_GT(partial_data_residual(a, other, 0.05), 10.0 * tol);
  // dM_{-,eps} grows with eps, so the restricted norm cannot decrease.
  double prev = 0.0;
  for (double eps : {-0.9, -0.5, 0.05, 0.6, 0.9, 1.1}) {
    const double r = partial_data_residual(a, other, eps);
    EXPECT_GE(r, prev * (1.0 - 1e-12)) << "eps " << eps;
    prev = r;
  }
}

TEST(Conformal, UnitFactorIsIdentical) {
  const ConformalReport r = conformal_reduction_check(
      grid_of(8), [](const Eigen::Vector3d&) { return 1.0; }, smooth_one(), data_one);
  EXPECT_EQ(r.solution_diff, 0.0);
  EXPECT_EQ(r.flux_ratio_err, 0.0);
  EXPECT_LE(r.operator_identity_err, 1e-12);
}

TEST(Conformal, ExponentialFactor) {
  const ConformalReport r = conformal_reduction_check(
      grid_of(16), [](const Eigen::Vector3d& x) { return std::exp(2.0 * x(0)); }, smooth_one(), data_one);
  EXPECT_LE(r.solution_diff, 1e-6);
  EXPECT_LE(r.flux_ratio_err, 1e-5);
  EXPECT_LE(r.operator_identity_err, 1e-6);
  EXPECT_LE(r.weak_residual, 1e-9);
}

TEST(Conformal, OperatorIdentityUnderCurvedBaseMetric) {
  const MetricFn g = [](const Eigen::Vector3d& x) -> Eigen::Matrix3d {
    Eigen::Matrix3d m = Eigen::Matrix3d::Identity();
    m(1, 1) = m(2, 2) = 4.0 / std::pow(1.0 + x(1) * x(1) + x(2) * x(2), 2);
    return m;
  };
  const ConformalReport r = conformal_reduction_check(
      grid_of(8), [](const Eigen::Vector3d& x) { return std::exp(2.0 * x(0)); }, smooth_one(), data_two, g);
  EXPECT_LE(r.solution_diff, 1e-6);
  EXPECT_LE(r.flux_ratio_err, 1e-5);
  EXPECT_LE(r.operator_identity_err, 1e-6);
}

TEST(Alessandrini, EqualConductivitiesGiveZero) {
  const AlessandriniReport r = alessandrini_check(grid_of(12), smooth_one(), smooth_one(), data_one, data_two);
  EXPECT_EQ(r.lhs, 0.0);
  EXPECT_LE(std::abs(r.rhs), 1e-10);
}

TEST(Alessandrini, SmoothPairConvergesAtSecondOrder) {
  std::vector<std::pair<double, double>> errs;
  double last = 1.0;
  for (int n : {16, 24, 32, 48}) {
    const AlessandriniReport r = alessandrini_check(grid_of(n), smooth_one(), smooth_two(), data_one, data_two);
    errs.emplace_back(1.0 / n, r.rel_err);
    last = r.rel_err;
  }
  EXPECT_LE(last, 1e-3);
  EXPECT_GE(fit_slope(errs).slope, 1.8);
}

TEST(Alessandrini, ConstantFirstSolution) {
  const AlessandriniReport r = alessandrini_check(
      grid_of(32), smooth_one(), smooth_two(), [](const Eigen::Vector3d&) { return 1.0; }, data_two);
  EXPECT_LE(std::abs(r.lhs - r.rhs), 1e-3 * r.scale);
}

TEST(LogQuotient, EqualConductivitiesVanish) {
  const LogQuotientReport r = log_quotient_pde_residual(grid_of(8), smooth_one(), smooth_one());
  EXPECT_EQ(r.from_logs.cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(r.from_divergence.cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(r.boundary_mismatch, 0.0);
}

TEST(LogQuotient, RoutesAgreeOnSmoothPairs) {
  const LogQuotientReport r = log_quotient_pde_residual(grid_of(12), smooth_one(), smooth_two());
  EXPECT_GT(r.max_field, 1.0);
  EXPECT_LE(r.agreement, 1e-6);
  const MetricFn g = [](const Eigen::Vector3d& x) -> Eigen::Matrix3d {
    return std::exp(2.0 * x(0)) * Eigen::Matrix3d::Identity();
  };
  EXPECT_LE(log_quotient_pde_residual(grid_of(8), smooth_one(), smooth_two(), g).agreement, 1e-6);
}

TEST(LogQuotient, ConstantMultipleIsSeenOnlyOnTheBoundary) {
  Conductivity scaled = smooth_one();
  const Conductivity base = smooth_one();
  scaled.value = [base](const Vec& x) { return 2.25 * base(x); };
  scaled.gradient = [base](const Vec& x) { return Vec(2.25 * base.grad(x)); };
  const LogQuotientReport r = log_quotient_pde_residual(grid_of(8), base, scaled);
  EXPECT_LE(r.from_logs.cwiseAbs().maxCoeff(), 1e-8);
  EXPECT_NEAR(r.boundary_mismatch, std::log(2.25), 1e-12);
}

TEST(LogPolar, MetricPhiAndMasks) {
  const LogPolarReport r = logpolar_map(BallDomain{}, Eigen::Vector3d(0.1, -0.2, 0.0), 400);
  EXPECT_LE(r.metric_err, 1e-8);
  EXPECT_LE(r.phi_err, 1e-14);
  EXPECT_TRUE(r.masks_equal);
  EXPECT_FALSE(r.minus_x.empty());
  EXPECT_FALSE(r.plus_x.empty());
  EXPECT_EQ(r.chart.id, "logpolar");
  for (double eps : {-0.5, 0.0, 0.3, 1.0})
    EXPECT_TRUE(logpolar_map(BallDomain{}, Eigen::Vector3d(-0.3, 0.2, 0.1), 200, eps, 5).masks_equal);
}

TEST(LogPolar, PointInHullIsRejected) {
  EXPECT_THROW(logpolar_map(BallDomain{}, Eigen::Vector3d(0.0, 0.1, 0.9), 50), PreconditionError);
  EXPECT_THROW(logpolar_map(BallDomain{}, Eigen::Vector3d(0.0, 0.0, 0.6), 50), PreconditionError);
}

TEST(FaceCusp, TraceAndNormalDerivativeMatchAcrossReflection) {
  const Conductivity g1 = face_cusp_conductivity(1, 0.5, vec3(0.15, 0.5, 0.0), 0.8, 1.8, 0.3);
  const Conductivity g2 = reflect_x1(g1);
  const FemGrid g = grid_of(16);
  double diff = 0.0, inside = 0.0;
  for (std::size_t b : g.boundary_nodes()) {
    const Vec x = vec3(g.point(b)(0), g.point(b)(1), g.point(b)(2));
    diff = std::max({diff, std::abs(g1(x) - g2(x)), (g1.grad(x) - g2.grad(x)).norm()});
  }
  for (std::size_t i = 0; i < g.size(); ++i) {
    const Vec x = vec3(g.point(i)(0), g.point(i)(1), g.point(i)(2));
    inside = std::max(inside, std::abs(g1(x) - g2(x)));
  }
  EXPECT_EQ(diff, 0.0);
  EXPECT_GT(inside, 1e-3);
}

TEST(BoundaryProbe, EqualConductivitiesGiveZeroIntegrand) {
  const Conductivity g1 = face_cusp_conductivity(1, 0.5, vec3(0.15, 0.5, 0.0), 0.8, 1.8, 0.3);
  BoundaryProbeOptions o;
  const BoundaryProbeReport r = boundary_term_probe(g1, g1, {4.0}, o);
  ASSERT_EQ(r.points.size(), 1u);
  EXPECT_EQ(std::abs(r.points[0].via_identity), 0.0);
  EXPECT_EQ(r.points[0].delta_u, 0.0);
  EXPECT_EQ(r.points[0].grad_delta_u, 0.0);
  EXPECT_LE(std::abs(r.points[0].direct_fem), 1e-10);
}
