#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "geotomo/mollify.hpp"
#include "geotomo/rates.hpp"

namespace geotomo {

using Complex = std::complex<double>;
using CField = Eigen::VectorXcd;

/// Extended cylinder [-L, L) x [-a, a]^2 sampled for spectral calculus.
/// x_1 is periodic (twisted: u(x + 2L) = -u(x)), the transverse square
/// carries Dirichlet conditions.  x_1 nodes -L + i h_1, transverse nodes
/// -a + (j + 1) h_t.
struct SpectralBox {
  double half_length = 0.75;
  double half_width = 13.0 / 16.0;
  int n1 = 48;
  int nt = 51;
  bool twisted = true;

  std::size_t size() const { return static_cast<std::size_t>(n1) * nt * nt; }
  std::size_t index(int i, int j, int k) const {
    return (static_cast<std::size_t>(k) * nt + j) * n1 + i;
  }
  double h1() const { return 2.0 * half_length / n1; }
  double ht() const { return 2.0 * half_width / (nt + 1); }
  double x1(int i) const { return -half_length + i * h1(); }
  double xt(int j) const { return -half_width + (j + 1) * ht(); }
  Eigen::Vector3d point(std::size_t idx) const;
  double cell_volume() const { return h1() * ht() * ht(); }

  /// Same box with every spacing doubled.
  SpectralBox coarsened() const;
};

/// Dense per-axis spectral transforms and derivative matrices on a box.
class SpectralOperators {
 public:
  explicit SpectralOperators(SpectralBox box);

  const SpectralBox& box() const { return box_; }
  /// x_1 wavenumbers (twisted: pi (n + 1/2) / L) and transverse ones k pi / 2a.
  const std::vector<double>& xi() const { return xi_; }
  const std::vector<double>& kappa() const { return kappa_; }
  /// xi with the unpaired Nyquist frequency zeroed (first derivatives).
  const std::vector<double>& xi_odd() const { return xi_odd_; }

  CField to_modes(const CField& u) const;
  CField from_modes(const CField& c) const;
  CField derivative(const CField& u, int axis) const;
  /// Adjoint of derivative() in the l2 inner product.
  CField derivative_adjoint(const CField& u, int axis) const;
  CField second_derivative(const CField& u, int axis) const;

  /// Cell-volume weighted inner product over the whole box.
  Complex inner(const CField& a, const CField& b) const;
  double norm(const CField& a) const;

 private:
  void apply_axis(const Eigen::MatrixXcd& m, CField& u, int axis) const;
  void apply_axis(const Eigen::MatrixXd& m, CField& u, int axis) const;

  SpectralBox box_;
  std::vector<double> xi_, xi_odd_, kappa_;
  Eigen::MatrixXcd f1_, f1_inv_, d1_, d1_adj_, d1_sq_;
  Eigen::MatrixXd sine_, dt_, dt_adj_, dt_sq_;
};

/// Shifted Laplacian -Delta - sigma^2 - 2 sigma d_1 (conjugation of -Delta
/// by e^{sigma x_1}) inverted exactly in the mode basis.
class ShiftedLaplacian {
 public:
  static constexpr double kMaxCondition = 1e10;

  /// Throws ExceptionalTauError when the symbol is (nearly) singular.
  ShiftedLaplacian(const SpectralOperators& ops, double sigma);

  double sigma() const { return sigma_; }
  double condition() const { return condition_; }
  const SpectralOperators& ops() const { return *ops_; }

  CField solve(const CField& rhs) const;
  CField solve_adjoint(const CField& rhs) const;
  /// Modes of solve(rhs).
  CField solve_modes(const CField& rhs) const;
  /// Direct application through second-derivative matrices.
  CField apply(const CField& w) const;

 private:
  const SpectralOperators* ops_;
  double sigma_;
  double condition_ = 0.0;
  Eigen::VectorXcd inv_symbol_;
};

/// Operator norm of G_0 from H^0 to H^s, sup over the continuum modes
/// (twisted x_1 frequencies, Dirichlet transverse ones) of
/// (1 + |xi|^2 + mu)^{s/2} / |(xi - i tau)^2 + mu|.
double g0_operator_norm(const SpectralBox& box, double tau, int s);

/// Coefficients of e^{-sigma x_1} e^{phi_tau/2} (-Delta + <A, grad>)
/// e^{-phi_tau/2} e^{sigma x_1} beyond the shifted Laplacian:
/// <A - A_tau, grad> + q_tilde with q_tilde = q_tau + sigma (A - A_tau)_1.
struct ConjugatedOperator {
  double sigma = 0.0;
  std::array<Eigen::VectorXd, 3> A_diff;
  Eigen::VectorXd q_tau;
  Eigen::VectorXd q_tilde;
  /// phi_tau and grad phi_tau at the box nodes.
  Eigen::VectorXd phi_tau;
  std::array<Eigen::VectorXd, 3> grad_tau;

  bool vanishes() const;
};
ConjugatedOperator conjugated_operator(const SpectralBox& box, const MollifiedField& field,
                                       double sigma);

/// <A - A_tau, grad w> + q_tilde w and its l2 adjoint.
CField apply_perturbation(const SpectralOperators& ops, const ConjugatedOperator& conj,
                          const CField& w);
CField apply_perturbation_adjoint(const SpectralOperators& ops, const ConjugatedOperator& conj,
                                  const CField& v);

/// G_tau = G_0 (I + K)^{-1}, K = (<A - A_tau, grad> + q_tilde) G_0.
class PerturbedInverse {
 public:
  struct Options {
    int power_steps = 20;
    double neumann_tol = 1e-10;
    int max_terms = 400;
    double residual_tol = 1e-6;
  };

  /// Estimates ||K|| by power iteration on K*K; throws
  /// NeumannDivergenceError when it is >= 1.
  PerturbedInverse(const ShiftedLaplacian& g0, const ConjugatedOperator& conj);
  PerturbedInverse(const ShiftedLaplacian& g0, const ConjugatedOperator& conj, Options opts);

  double k_norm() const { return k_norm_; }
  int last_terms() const { return last_terms_; }
  double last_residual() const { return last_residual_; }

  CField solve(const CField& rhs) const;
  CField solve_adjoint(const CField& rhs) const;
  /// Full operator -Delta_tau + <A - A_tau, grad> + q_tilde.
  CField apply(const CField& w) const;
  CField apply_K(const CField& v) const;
  CField apply_K_adjoint(const CField& v) const;

 private:
  const ShiftedLaplacian* g0_;
  const ConjugatedOperator* conj_;
  Options opts_;
  double k_norm_ = 0.0;
  mutable int last_terms_ = 0;
  mutable double last_residual_ = 0.0;
};

/// Largest singular value of a linear map by power iteration on A*A.
template <class Apply, class ApplyAdjoint>
double power_norm(const SpectralOperators& ops, Apply a, ApplyAdjoint a_adj, int steps,
                  unsigned seed = 7) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> nd;
  CField v(static_cast<Eigen::Index>(ops.box().size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = Complex(nd(rng), nd(rng));
  v /= ops.norm(v);
  double sigma2 = 0.0;
  for (int it = 0; it < steps; ++it) {
    CField w = a_adj(a(v));
    sigma2 = std::real(ops.inner(v, w));
    const double nw = ops.norm(w);
    if (nw == 0.0) return 0.0;
    v = w / nw;
  }
  return std::sqrt(std::max(sigma2, 0.0));
}

/// b(theta) = sum_k c_k e^{i k theta}.
struct AngularProfile {
  std::vector<std::pair<int, Complex>> modes{{0, Complex(1.0, 0.0)}};
  Complex value(double theta) const;
  Complex first(double theta) const;
  Complex second(double theta) const;
};

struct CGOParams {
  double tau = 8.0;
  double lambda = 0.0;
  /// Polar center in the transverse plane, outside [-1/2, 1/2]^2.
  Eigen::Vector2d omega = Eigen::Vector2d(-0.72, 0.0);
  AngularProfile b;
  double eta = 0.25;
  /// false: u = e^{-phi/2} e^{-tau x_1}(e^{-i tau r} a + r); true: the
  /// growing partner with e^{+tau x_1} e^{+i tau r}.
  bool conjugate = false;
};

struct CGOOptions {
  SpectralBox box;
  /// M = [lo, hi]^3.
  double m_lo = -0.5;
  double m_hi = 0.5;
  int max_retries = 5;
  PerturbedInverse::Options inverse;
};

struct CGOSolution {
  SpectralBox box;
  double tau = 0.0;
  double sigma = 0.0;
  double lambda = 0.0;
  double m_lo = -0.5, m_hi = 0.5;
  int retries = 0;
  /// Box indices of the nodes of M and their trapezoid weights.
  std::vector<std::size_t> nodes;
  std::vector<double> weights;
  /// Values at the nodes of M.
  Eigen::VectorXcd u, r_tilde, amplitude, phase_amplitude;
  Eigen::VectorXd prefactor;
  /// Mollified log-conductivity and its gradient at the nodes of M.
  Eigen::VectorXd phi_tau;
  std::vector<Eigen::Vector3d> grad_phi_tau;
  std::vector<Eigen::Vector3cd> grad_u;
  /// Remainder on the whole box (for derivatives).
  CField r_tilde_box;
  /// ||r||_{H^s(M)}, s = 0, 1, 2.
  std::array<double, 3> norms{};
  double rhs_l2 = 0.0;
  double k_norm = 0.0;
  int neumann_terms = 0;
  double inverse_residual = 0.0;
};

/// a = r^{-1/2} e^{i lambda (x_1 + i r)} b(theta) about omega.
struct PolarAmplitude {
  Complex value;
  Eigen::Vector3cd gradient;
  Complex laplacian;
  double r = 0.0;
  Eigen::Vector3d grad_r;
};
PolarAmplitude polar_amplitude(const CGOParams& params, const Eigen::Vector3d& x);

/// e^{-i sigma r} P_sigma (e^{i sigma r} a) evaluated in closed form.
Complex transported_residual(const CGOParams& params, double sigma, const PolarAmplitude& a,
                             const Eigen::Vector3d& A_diff, double q_tilde);

CGOSolution build_cgo(const CGOParams& params, const MollifiedFamily& family,
                      const CGOOptions& options = {});

/// u rebuilt from its parts, e^{-phi/2} e^{sigma x_1}(e^{i sigma r} a + r).
Eigen::VectorXcd reconstruct_u(const CGOSolution& sol);

/// Weak form of div(gamma grad u) = 0 against a product bump supported in
/// M, normalized by sum |gamma grad u| |grad psi|.
double weak_residual(const CGOSolution& sol, const Conductivity& gamma);

/// ||P_sigma(e^{i sigma r} a)||_{L2(M)} with the operator applied by
/// fourth-order central differences of the given step.
double applied_transport_residual(const CGOParams& params, const MollifiedFamily& family,
                                  const CGOOptions& options = {}, double step = 2e-3);

struct CGOLadderPoint {
  double tau = 0.0;
  double r_l2 = 0.0, r_h1 = 0.0, r_h2 = 0.0;
  double weak_residual = 0.0;
  double weak_residual_coarse = 0.0;
  /// |R_N - R_{N/2}|: measured discretization error of the weak form.
  double discretization = 0.0;
  bool weak_ok = false;
  double k_norm = 0.0;
};
struct CGOLadder {
  std::vector<CGOLadderPoint> points;
  RateReport remainder;
  bool weak_ok = false;
};
CGOLadder cgo_ladder(const CGOParams& params, const MollifiedFamily& family,
                     const std::vector<double>& tau_ladder, const CGOOptions& options = {});

/// Rows idx, Re u, Im u, Re r, Im r.
void write_cgo_csv(const std::string& path, const CGOSolution& sol);

}  // namespace geotomo

