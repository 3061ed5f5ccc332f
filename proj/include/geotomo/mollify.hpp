#pragma once

#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "geotomo/conductivity.hpp"
#include "geotomo/rates.hpp"

namespace geotomo {

/// Radial mollifier rho(s) = C (1 - s^2)^10 on the unit ball of R^3,
/// normalised to unit mass.
struct Mollifier {
  static double normalization();
  static double value(double s);
  static double first(double s);
  static double second(double s);
};

/// Uniform node grid origin + spacing * (i, j, k).
struct BoxGrid3 {
  Eigen::Vector3d origin = Eigen::Vector3d::Zero();
  double spacing = 1.0;
  int nx = 0, ny = 0, nz = 0;

  std::size_t size() const { return static_cast<std::size_t>(nx) * ny * nz; }
  std::size_t index(int i, int j, int k) const { return (static_cast<std::size_t>(k) * ny + j) * nx + i; }
  Eigen::Vector3d point(int i, int j, int k) const { return origin + spacing * Eigen::Vector3d(i, j, k); }
  Eigen::Vector3d point(std::size_t idx) const;
};

/// phi_tau = rho_h * phi and derivatives at one point; A = -grad log gamma.
struct MollifiedPoint {
  double phi = 0.0;
  double phi_tau = 0.0;
  Eigen::Vector3d grad_phi = Eigen::Vector3d::Zero();
  Eigen::Vector3d grad_tau = Eigen::Vector3d::Zero();
  double lap_tau = 0.0;

  Eigen::Vector3d A() const { return -grad_phi; }
  Eigen::Vector3d A_tau() const { return -grad_tau; }
  double div_A_tau() const { return -lap_tau; }
  /// -div A_tau / 2 - |A_tau|^2 / 4 + <A, A_tau> / 2.
  double q_tau() const;
};

/// Mollified log-conductivity at one tau: phi sampled on a box of spacing
/// h / 6 around supp(gamma - 1), convolved with rho_h.
class MollifiedField {
 public:
  MollifiedField(const Conductivity& gamma, double tau, double h);

  double tau() const { return tau_; }
  double h() const { return h_; }
  const BoxGrid3& grid() const { return grid_; }

  /// Direct quadrature of the convolution at x.
  MollifiedPoint evaluate(const Vec& x) const;

  /// All quantities on the sample grid (FFT convolution).
  struct Snapshot {
    BoxGrid3 grid;
    std::vector<double> phi_tau, lap_tau;
    std::vector<Eigen::Vector3d> grad_tau;
  };
  Snapshot snapshot() const;
  const Conductivity& gamma() const { return gamma_; }

 private:
  Conductivity gamma_;
  double tau_, h_;
  BoxGrid3 grid_;
  std::vector<double> phi_;
  bool trivial_ = false;
};

/// Norms entering the mollification rates, evaluated on a snapshot grid.
struct MollifierNorms {
  double A_diff_linf = 0.0;
  double div_linf = 0.0;
  double A_diff_l2 = 0.0;
  double div_l2 = 0.0;
  double gamma_diff_linf = 0.0;
  double grad_gamma_diff_linf = 0.0;
  double q_linf = 0.0;
  double q_l2 = 0.0;
};
MollifierNorms mollifier_norms(const MollifiedField& field);

class MollifiedFamily {
 public:
  /// h(tau) = scale_constant / tau.
  MollifiedFamily(Conductivity gamma, double eta, double scale_constant = 1.0);

  const Conductivity& gamma() const { return gamma_; }
  double eta() const { return eta_; }
  double scale(double tau) const { return scale_constant_ / tau; }
  std::shared_ptr<const MollifiedField> at(double tau) const;

 private:
  Conductivity gamma_;
  double eta_;
  double scale_constant_;
};

/// Slope reports for the eight norms against their exponents
/// (0, 1, -1/2 - eta, 1, -1 - eta, -eta, 1, 1/2 - eta).
std::vector<RateReport> mollifier_rate_reports(const MollifiedFamily& family,
                                               const std::vector<double>& tau_ladder,
                                               double slack = 0.1);

}  // namespace geotomo
