#pragma once

#include <complex>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "geotomo/cgo.hpp"
#include "geotomo/conductivity.hpp"
#include "geotomo/geometry.hpp"
#include "geotomo/quadrature.hpp"
#include "geotomo/rates.hpp"

namespace geotomo {

/// Uniform node grid on the box [lo, hi] with n cells per axis.
struct FemGrid {
  Eigen::Vector3d lo = Eigen::Vector3d::Constant(-0.5);
  Eigen::Vector3d hi = Eigen::Vector3d::Constant(0.5);
  int n = 16;

  int nodes() const { return n + 1; }
  std::size_t size() const { return static_cast<std::size_t>(n + 1) * (n + 1) * (n + 1); }
  double h(int axis) const { return (hi(axis) - lo(axis)) / n; }
  std::size_t index(int i, int j, int k) const {
    return (static_cast<std::size_t>(k) * (n + 1) + j) * (n + 1) + i;
  }
  std::array<int, 3> ijk(std::size_t idx) const;
  Eigen::Vector3d point(std::size_t idx) const;
  bool on_boundary(std::size_t idx) const;
  std::vector<std::size_t> boundary_nodes() const;
};

/// Metric in chart coordinates; an empty function is the Euclidean metric.
using MetricFn = std::function<Eigen::Matrix3d(const Eigen::Vector3d&)>;
using ScalarFn = std::function<double(const Eigen::Vector3d&)>;

Eigen::Matrix3d metric_at(const MetricFn& metric, const Eigen::Vector3d& x);

/// Q1 stiffness of int c <grad_g u, grad_g v>_g dV_g (3-point Gauss per
/// axis) over all nodes.  No sign check on c.
Eigen::SparseMatrix<double> assemble_stiffness(const FemGrid& grid, const ScalarFn& c,
                                               const MetricFn& metric = {});

/// Q1 solver for div_g(gamma grad_g u) = 0 with Dirichlet data.
class ConductivitySolver {
 public:
  /// Throws AssemblyError when gamma or det g is nonpositive at a
  /// quadrature point.
  ConductivitySolver(FemGrid grid, const Conductivity& gamma, MetricFn metric = {});

  const FemGrid& grid() const { return grid_; }
  const MetricFn& metric() const { return metric_; }
  const Eigen::SparseMatrix<double>& stiffness() const { return K_; }
  const std::vector<std::size_t>& boundary() const { return boundary_; }
  const std::vector<std::size_t>& interior() const { return interior_; }
  /// Lumped boundary mass int_dM psi_b dS_g.
  const Eigen::VectorXd& boundary_mass() const { return mass_; }

  /// Full node vector; boundary entries of `data` are kept, the rest solved.
  Eigen::VectorXd solve(const Eigen::VectorXd& data) const;
  /// With a load vector added to the interior rows: K_II u_I = load_I - K_IB u_B.
  Eigen::VectorXd solve(const Eigen::VectorXd& data, const Eigen::VectorXd& load) const;
  Eigen::VectorXcd solve(const Eigen::VectorXcd& data,
                         const Eigen::VectorXcd& load = Eigen::VectorXcd()) const;
  Eigen::VectorXd solve_boundary(const std::function<double(const Eigen::Vector3d&)>& f) const;

  /// ||(K u)_interior|| / ||K_IB u_B||.
  double weak_residual(const Eigen::VectorXd& u) const;
  /// Variational flux gamma d_nu u at boundary nodes, (K u)_b / m_b.
  Eigen::VectorXd flux(const Eigen::VectorXd& u) const;

 private:
  FemGrid grid_;
  MetricFn metric_;
  Eigen::SparseMatrix<double> K_, K_ii_, K_ib_;
  std::vector<std::size_t> boundary_, interior_;
  std::vector<long> interior_slot_;
  Eigen::VectorXd mass_;
};

/// Lumped boundary mass for the metric: per face, |g|^{1/2} sqrt(g^{kk}) dA.
Eigen::VectorXd boundary_mass(const FemGrid& grid, const MetricFn& metric);

/// d_nu phi for phi = x_1 at boundary nodes, with the normal of an edge or
/// corner node taken as the normalized sum of the adjacent face normals.
Eigen::VectorXd boundary_dphi(const FemGrid& grid, const MetricFn& metric);

struct DNMap {
  FemGrid grid;
  std::vector<std::size_t> boundary;
  Eigen::VectorXd mass;
  Eigen::VectorXd dphi;
  /// Lambda = diag(mass)^{-1} (K_BB - K_BI K_II^{-1} K_IB).
  Eigen::MatrixXd matrix;
  double epsilon = 0.05;
  /// Boundary positions (into `boundary`) of dM_{-,eps} and dM_{+,eps}.
  std::vector<int> mask_minus, mask_plus;

  Eigen::VectorXd apply(const Eigen::VectorXd& f) const { return matrix * f; }
  /// <f, h> = sum m_b f_b h_b.
  double inner(const Eigen::VectorXd& f, const Eigen::VectorXd& h) const;
  /// max over pairs of |<Lf, h> - <f, Lh>| / (||Lf|| ||h||).
  double symmetry_error(int pairs, unsigned seed) const;
  /// max over samples of |int Lf| / ||f||.
  double total_flux_error(int samples, unsigned seed) const;
};

/// Masks by thresholding d_nu phi at epsilon: minus below, plus at or above.
void set_masks(DNMap& map, double epsilon);
DNMap dn_map(const ConductivitySolver& solver, double epsilon = 0.05);

/// Operator norm of (L1 - L2) on dM_{-,eps}, over the first basis_size
/// boundary traces of monomials x^a y^b z^c (by total degree), both spaces
/// carrying the lumped boundary inner product.
double partial_data_residual(const DNMap& a, const DNMap& b, double epsilon, int basis_size = 20);

/// Dense CSV of the matrix and a JSON manifest of the boundary nodes.
void write_dn_csv(const DNMap& map, const std::string& csv_path, const std::string& manifest_path);

/// div_g(c grad_g u) by fourth-order central differences of the flux.
double metric_divergence(const MetricFn& metric, const ScalarFn& c, const ScalarFn& u,
                         const Eigen::Vector3d& x, double step = 1e-3);

struct ConformalReport {
  /// max |u_cg - u_g| / max |u|.
  double solution_diff = 0.0;
  /// max over face nodes of |(d_nu u)_cg / (d_nu u)_g - c^{-1/2}| c^{1/2}.
  double flux_ratio_err = 0.0;
  /// max relative |c^{n/2} div_cg(gamma grad u) - div_g(c^{(n-2)/2} gamma grad u)|
  /// over random smooth u at random points.
  double operator_identity_err = 0.0;
  double weak_residual = 0.0;
};

/// Solves under c g with gamma and under g with c^{1/2} gamma (n = 3).
ConformalReport conformal_reduction_check(const FemGrid& grid, const ScalarFn& c,
                                          const Conductivity& gamma,
                                          const std::function<double(const Eigen::Vector3d&)>& f,
                                          const MetricFn& metric = {}, unsigned seed = 5);

/// One-sided fourth-order normal derivative (metric unit normal) at the
/// face-interior boundary nodes; returns (boundary node, value) pairs.
std::vector<std::pair<std::size_t, double>> fd_normal_derivative(const FemGrid& grid,
                                                                 const MetricFn& metric,
                                                                 const Eigen::VectorXd& u);

struct AlessandriniReport {
  double lhs = 0.0;
  double rhs = 0.0;
  double rel_err = 0.0;
  /// Magnitude of the volume integrand, int |V| |grad(u1 u2)|.
  double scale = 0.0;
};

/// lhs = int <g1^{1/2} grad g2^{1/2} - g2^{1/2} grad g1^{1/2}, grad(u1 u2)>_g dV_g,
/// rhs = int_dM gamma1 d_nu(u1~ - u2) u1 dS_g with u1~ solving for gamma1
/// with trace u2.  Requires gamma1 = gamma2 on dM.
AlessandriniReport alessandrini_check(const FemGrid& grid, const Conductivity& gamma1,
                                      const Conductivity& gamma2,
                                      const std::function<double(const Eigen::Vector3d&)>& f1,
                                      const std::function<double(const Eigen::Vector3d&)>& f2,
                                      const MetricFn& metric = {});

struct LogQuotientReport {
  /// 1/2 Delta_g(l1 - l2) + 1/4 <grad(l1 + l2), grad(l1 - l2)>_g at interior nodes.
  Eigen::VectorXd from_logs;
  /// (g1 g2)^{-1/2} div_g(g2^{1/2} grad g1^{1/2} - g1^{1/2} grad g2^{1/2}).
  Eigen::VectorXd from_divergence;
  /// max |difference| / max |from_logs| (absolute when the field vanishes).
  double agreement = 0.0;
  double max_field = 0.0;
  /// max |log g1 - log g2| over boundary nodes.
  double boundary_mismatch = 0.0;
};

LogQuotientReport log_quotient_pde_residual(const FemGrid& grid, const Conductivity& gamma1,
                                            const Conductivity& gamma2, const MetricFn& metric = {},
                                            double step = 1e-3);

/// Euclidean ball domain.
struct BallDomain {
  Eigen::Vector3d center = Eigen::Vector3d(0.0, 0.0, 1.0);
  double radius = 0.4;
};

struct LogPolarReport {
  /// e (+) g_{S^2} on R x cap, the cap in stereographic coordinates.
  MetricChart chart;
  /// Boundary sample points, their images (y_1, p), and d_nu phi on both sides.
  std::vector<Eigen::Vector3d> x, y;
  Eigen::VectorXd dphi_x, dphi_y;
  std::vector<int> minus_x, plus_x, minus_y, plus_y;
  double metric_err = 0.0;
  double phi_err = 0.0;
  bool masks_equal = false;
};

/// y_1 = log |x - x0|, p = stereographic image of the direction after a
/// rotation taking the domain into {x_3 > 0}.  Throws PreconditionError
/// when x0 lies in the closed convex hull.
LogPolarReport logpolar_map(const BallDomain& domain, const Eigen::Vector3d& x0, int n_boundary,
                            double epsilon = 0.05, int n_metric_points = 50, unsigned seed = 3);

struct BoundaryProbePoint {
  double tau = 0.0;
  /// int_dM gamma1 d_nu(u1~ - u2) u1 dS through the volume identity on the
  /// CGO fields (the fitted quantity).
  std::complex<double> via_identity;
  /// The same integral from a Q1 solve for u1~ - u2 on the CGO nodes of M;
  /// unresolved once tau h is not small.
  std::complex<double> direct_fem;
  /// int_dM e^{-2 tau x_1} |du|^2 and |grad du|^2, du = (e^{phi1/2} - e^{phi2/2}) u2.
  double delta_u = 0.0;
  double grad_delta_u = 0.0;
};

struct BoundaryProbeReport {
  std::vector<BoundaryProbePoint> points;
  RateReport integral;
  RateReport claim_value;
  RateReport claim_gradient;
  bool pass = false;
};

struct BoundaryProbeOptions {
  CGOParams params;
  CGOOptions cgo;
  double epsilon = 0.05;
  double slack = 0.2;
};

/// M = [m_lo, m_hi]^3 must sit on the CGO grid (a cube of its nodes).
BoundaryProbeReport boundary_term_probe(const Conductivity& gamma1, const Conductivity& gamma2,
                                        const std::vector<double>& tau_ladder,
                                        const BoundaryProbeOptions& options = {});

}  // namespace geotomo
