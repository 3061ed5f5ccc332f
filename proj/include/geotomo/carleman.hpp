#pragma once

#include <array>
#include <complex>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace geotomo {

/// Node grid on the cylinder segment [0, 1] x [-1/2, 1/2]^2 with n
/// intervals per side (n even, for Simpson weights).
struct CarlemanGrid {
  int n = 32;

  int nodes() const { return n + 1; }
  std::size_t size() const { return static_cast<std::size_t>(n + 1) * (n + 1) * (n + 1); }
  double h() const { return 1.0 / n; }
  std::size_t index(int i, int j, int k) const {
    return (static_cast<std::size_t>(k) * (n + 1) + j) * (n + 1) + i;
  }
  Eigen::Vector3d point(int i, int j, int k) const { return {i * h(), -0.5 + j * h(), -0.5 + k * h()}; }
  Eigen::Vector3d point(std::size_t idx) const;
};

using ComplexFn = std::function<std::complex<double>(const Eigen::Vector3d&)>;

Eigen::VectorXcd sample(const CarlemanGrid& grid, const ComplexFn& f);

/// Fourth-order finite differences (one-sided near the faces).
Eigen::VectorXcd fd_derivative(const CarlemanGrid& grid, const Eigen::VectorXcd& v, int axis);
Eigen::VectorXcd fd_second_derivative(const CarlemanGrid& grid, const Eigen::VectorXcd& v, int axis);
Eigen::VectorXcd fd_laplacian(const CarlemanGrid& grid, const Eigen::VectorXcd& v);

/// Composite Simpson rule over the box, and over its six faces of f . nu
/// (f given as three node fields).
double simpson_volume(const CarlemanGrid& grid, const Eigen::VectorXd& f);
double simpson_flux(const CarlemanGrid& grid, const std::array<Eigen::VectorXd, 3>& f);
/// Surface integral of a scalar node field, restricted to faces where
/// the filter on the outward normal returns true.
double simpson_surface(const CarlemanGrid& grid, const Eigen::VectorXd& f,
                       const std::function<bool(const Eigen::Vector3d&)>& keep_normal = nullptr);

struct DivergenceCheck {
  double vol = 0.0;
  double surf = 0.0;
  /// 4 tau Re int (Delta + tau^2) v conj(d_1 v).
  double left = 0.0;
  /// int_M |F| + int_dM |F| for the flux field F (unit-size box).
  double scale = 0.0;
  double rel_err = 0.0;
  double left_rel_err = 0.0;
};
DivergenceCheck divergence_identity_check(const CarlemanGrid& grid, const Eigen::VectorXcd& v, double tau);

struct CarlemanConstants {
  double C = 0.125;
  /// Trace constant multiplying tau^2 int_dM |v|^2.
  double C1 = 0.0;
  /// Flux constant multiplying Re int_dM conj(v) d_nu v.
  double C2 = 0.0;
};

/// Constants frozen from calibrate_carleman on carleman_family(20, 2024)
/// over the ladder {8, 16, 32, 64} on carleman_grid_for(tau).
CarlemanConstants frozen_carleman_constants();

struct CarlemanReport {
  double tau = 0.0;
  double interior_lhs = 0.0;
  /// trace, flux, cross, gradient, cubic.
  std::vector<std::pair<std::string, double>> boundary_terms;
  double rhs = 0.0;
  double slack = 0.0;
  /// ||A||_inf^2 + tau^-2 ||q||_inf^2.
  double hypothesis = 0.0;
  /// Magnitude used for the tolerance on slack.
  double scale = 0.0;
  bool pass = false;
  double boundary_sum() const;
};

/// Lower-order terms A (three node fields, real) and q (real node field);
/// empty vectors mean zero.
struct LowerOrder {
  std::array<Eigen::VectorXd, 3> A;
  Eigen::VectorXd q;
};

CarlemanReport estimate_check(const CarlemanGrid& grid, const Eigen::VectorXcd& v, double tau,
                              const LowerOrder& lower, const CarlemanConstants& constants,
                              double tolerance = 1e-6);

/// Test function depending on tau.
using CarlemanTestFn = std::function<std::complex<double>(const Eigen::Vector3d&, double tau)>;

/// Seeded test family.  The first 3/5 are low-frequency complex
/// trigonometric polynomials; the rest are near-kernel functions
/// e^{i tau <omega, x'>}(1 + eps p(x)) with |omega| = 1 and p a random
/// quadratic, for which e^{tau x_1} v is nearly harmonic.  compact
/// multiplies everything by prod sin^6, so v vanishes to sixth order on
/// the boundary.
std::vector<CarlemanTestFn> carleman_family(int count, unsigned seed, bool compact = false);

/// Grid resolving frequency tau: n = max(n_min, 2 ceil(tau)), even.
CarlemanGrid carleman_grid_for(double tau, int n_min = 32);

/// Smallest (C1, C2) on a grid C2 in [0, c2_max] making every slack
/// nonnegative for the family and ladder at fixed C, padded by margin.
CarlemanConstants calibrate_carleman(const std::vector<CarlemanTestFn>& family,
                                     const std::vector<double>& tau_ladder, int n_min = 32,
                                     double C = 0.125, double c2_max = 4.0, double margin = 1.05);

}  // namespace geotomo
