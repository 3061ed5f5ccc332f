#include "geotomo/cgo.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <memory>

#include "json.hpp"

#include "geotomo/errors.hpp"
#include "geotomo/quadrature.hpp"

namespace geotomo {

namespace {

constexpr double kPi = 3.14159265358979323846;
const Complex kI(0.0, 1.0);

Vec to_vec(const Eigen::Vector3d& x) {
  Vec v(3);
  v << x(0), x(1), x(2);
  return v;
}

}  // namespace

Eigen::Vector3d SpectralBox::point(std::size_t idx) const {
  const int i = static_cast<int>(idx % n1);
  const std::size_t rest = idx / n1;
  const int j = static_cast<int>(rest % nt);
  const int k = static_cast<int>(rest / nt);
  return {x1(i), xt(j), xt(k)};
}

SpectralBox SpectralBox::coarsened() const {
  SpectralBox c = *this;
  c.n1 = n1 / 2;
  c.nt = (nt + 1) / 2 - 1;
  return c;
}

SpectralOperators::SpectralOperators(SpectralBox box) : box_(box) {
  const int n1 = box_.n1, nt = box_.nt;
  const double L = box_.half_length, a = box_.half_width;
  xi_.resize(n1);
  std::vector<double>& xi_odd = xi_odd_;
  xi_odd.resize(n1);
  for (int m = 0; m < n1; ++m) {
    const int n = m - n1 / 2;
    xi_[m] = box_.twisted ? kPi * (n + 0.5) / L : kPi * n / L;
    xi_odd[m] = (!box_.twisted && 2 * n == -n1) ? 0.0 : xi_[m];
  }
  f1_.resize(n1, n1);
  for (int i = 0; i < n1; ++i)
    for (int m = 0; m < n1; ++m)
      f1_(i, m) = std::exp(kI * xi_[m] * (box_.x1(i) + L)) / std::sqrt(double(n1));
  f1_inv_ = f1_.adjoint();
  Eigen::VectorXcd ik(n1), mxi2(n1);
  for (int m = 0; m < n1; ++m) {
    ik(m) = kI * xi_odd[m];
    mxi2(m) = -xi_[m] * xi_[m];
  }
  d1_ = f1_ * ik.asDiagonal() * f1_inv_;
  d1_adj_ = d1_.adjoint();
  d1_sq_ = f1_ * mxi2.asDiagonal() * f1_inv_;

  kappa_.resize(nt);
  sine_.resize(nt, nt);
  Eigen::MatrixXd cosine(nt, nt);
  const double scale = std::sqrt(2.0 / (nt + 1));
  for (int k = 0; k < nt; ++k) {
    kappa_[k] = (k + 1) * kPi / (2.0 * a);
    for (int j = 0; j < nt; ++j) {
      const double arg = kPi * (k + 1) * (j + 1) / (nt + 1);
      sine_(j, k) = scale * std::sin(arg);
      cosine(j, k) = scale * std::cos(arg);
    }
  }
  Eigen::VectorXd kap(nt), mk2(nt);
  for (int k = 0; k < nt; ++k) {
    kap(k) = kappa_[k];
    mk2(k) = -kappa_[k] * kappa_[k];
  }
  dt_ = cosine * kap.asDiagonal() * sine_;
  dt_adj_ = dt_.transpose();
  dt_sq_ = sine_ * mk2.asDiagonal() * sine_;
}

void SpectralOperators::apply_axis(const Eigen::MatrixXcd& m, CField& u, int axis) const {
  const int n1 = box_.n1, nt = box_.nt;
  if (axis != 0) throw PreconditionError("spectral: complex axis transform only along x_1");
  Eigen::Map<Eigen::MatrixXcd> view(u.data(), n1, static_cast<Eigen::Index>(nt) * nt);
  view = (m * view).eval();
}

void SpectralOperators::apply_axis(const Eigen::MatrixXd& m, CField& u, int axis) const {
  const int n1 = box_.n1, nt = box_.nt;
  double* data = reinterpret_cast<double*>(u.data());
  if (axis == 1) {
    for (int k = 0; k < nt; ++k) {
      Eigen::Map<Eigen::MatrixXd> view(data + 2 * static_cast<std::size_t>(k) * nt * n1, 2 * n1, nt);
      view = (view * m.transpose()).eval();
    }
  } else if (axis == 2) {
    Eigen::Map<Eigen::MatrixXd> view(data, 2 * static_cast<Eigen::Index>(n1) * nt, nt);
    view = (view * m.transpose()).eval();
  } else {
    apply_axis(Eigen::MatrixXcd(m.cast<Complex>()), u, 0);
  }
}

CField SpectralOperators::to_modes(const CField& u) const {
  CField c = u;
  apply_axis(f1_inv_, c, 0);
  apply_axis(sine_, c, 1);
  apply_axis(sine_, c, 2);
  return c;
}

CField SpectralOperators::from_modes(const CField& c) const {
  CField u = c;
  apply_axis(f1_, u, 0);
  apply_axis(sine_, u, 1);
  apply_axis(sine_, u, 2);
  return u;
}

CField SpectralOperators::derivative(const CField& u, int axis) const {
  CField d = u;
  if (axis == 0) apply_axis(d1_, d, 0);
  else apply_axis(dt_, d, axis);
  return d;
}

CField SpectralOperators::derivative_adjoint(const CField& u, int axis) const {
  CField d = u;
  if (axis == 0) apply_axis(d1_adj_, d, 0);
  else apply_axis(dt_adj_, d, axis);
  return d;
}

CField SpectralOperators::second_derivative(const CField& u, int axis) const {
  CField d = u;
  if (axis == 0) apply_axis(d1_sq_, d, 0);
  else apply_axis(dt_sq_, d, axis);
  return d;
}

Complex SpectralOperators::inner(const CField& a, const CField& b) const {
  return a.dot(b) * box_.cell_volume();
}

double SpectralOperators::norm(const CField& a) const {
  return a.norm() * std::sqrt(box_.cell_volume());
}

ShiftedLaplacian::ShiftedLaplacian(const SpectralOperators& ops, double sigma)
    : ops_(&ops), sigma_(sigma) {
  const SpectralBox& box = ops.box();
  inv_symbol_.resize(static_cast<Eigen::Index>(box.size()));
  double lo = INFINITY, hi = 0.0;
  for (int l = 0; l < box.nt; ++l) {
    for (int k = 0; k < box.nt; ++k) {
      const double mu = ops.kappa()[k] * ops.kappa()[k] + ops.kappa()[l] * ops.kappa()[l];
      for (int m = 0; m < box.n1; ++m) {
        const double xi = ops.xi()[m];
        const Complex sym = xi * xi - sigma * sigma + mu - 2.0 * kI * sigma * ops.xi_odd()[m];
        const double mag = std::abs(sym);
        lo = std::min(lo, mag);
        hi = std::max(hi, mag);
        inv_symbol_(static_cast<Eigen::Index>(box.index(m, k, l))) = 1.0 / sym;
      }
    }
  }
  condition_ = lo > 0.0 ? hi / lo : INFINITY;
  if (!(condition_ <= kMaxCondition))
    throw ExceptionalTauError("shifted Laplacian: exceptional tau, retry with a perturbed tau",
                              std::abs(sigma), condition_);
}

CField ShiftedLaplacian::solve_modes(const CField& rhs) const {
  CField c = ops_->to_modes(rhs);
  return c.cwiseProduct(inv_symbol_);
}

CField ShiftedLaplacian::solve(const CField& rhs) const { return ops_->from_modes(solve_modes(rhs)); }

CField ShiftedLaplacian::solve_adjoint(const CField& rhs) const {
  CField c = ops_->to_modes(rhs);
  return ops_->from_modes(c.cwiseProduct(inv_symbol_.conjugate()));
}

CField ShiftedLaplacian::apply(const CField& w) const {
  CField out = -(ops_->second_derivative(w, 0) + ops_->second_derivative(w, 1) +
                 ops_->second_derivative(w, 2));
  out -= sigma_ * sigma_ * w;
  out -= 2.0 * sigma_ * ops_->derivative(w, 0);
  return out;
}

double g0_operator_norm(const SpectralBox& box, double tau, int s) {
  const double L = box.half_length;
  const double kap = kPi / (2.0 * box.half_width);
  const double rho_max = 3.0 * tau + 20.0;
  const int n_max = static_cast<int>(rho_max * L / kPi) + 1;
  const int k_max = static_cast<int>(rho_max / kap) + 1;
  double best = 0.0;
  for (int n = -n_max - 1; n <= n_max; ++n) {
    const double xi = box.twisted ? kPi * (n + 0.5) / L : kPi * n / L;
    for (int k = 1; k <= k_max; ++k) {
      for (int l = k; l <= k_max; ++l) {
        const double mu = kap * kap * (double(k) * k + double(l) * l);
        const double re = xi * xi - tau * tau + mu;
        const double mag = std::sqrt(re * re + 4.0 * tau * tau * xi * xi);
        best = std::max(best, std::pow(1.0 + xi * xi + mu, 0.5 * s) / mag);
      }
    }
  }
  return best;
}

bool ConjugatedOperator::vanishes() const {
  return q_tilde.cwiseAbs().maxCoeff() == 0.0 && A_diff[0].cwiseAbs().maxCoeff() == 0.0 &&
         A_diff[1].cwiseAbs().maxCoeff() == 0.0 && A_diff[2].cwiseAbs().maxCoeff() == 0.0;
}

ConjugatedOperator conjugated_operator(const SpectralBox& box, const MollifiedField& field,
                                       double sigma) {
  const Eigen::Index n = static_cast<Eigen::Index>(box.size());
  ConjugatedOperator c;
  c.sigma = sigma;
  for (int a = 0; a < 3; ++a) {
    c.A_diff[a] = Eigen::VectorXd::Zero(n);
    c.grad_tau[a] = Eigen::VectorXd::Zero(n);
  }
  c.q_tau = Eigen::VectorXd::Zero(n);
  c.q_tilde = Eigen::VectorXd::Zero(n);
  c.phi_tau = Eigen::VectorXd::Zero(n);
  parallel_for(box.size(), [&](std::size_t idx) {
    const MollifiedPoint p = field.evaluate(to_vec(box.point(idx)));
    const Eigen::Vector3d d = p.A() - p.A_tau();
    const auto i = static_cast<Eigen::Index>(idx);
    for (int a = 0; a < 3; ++a) {
      c.A_diff[a](i) = d(a);
      c.grad_tau[a](i) = p.grad_tau(a);
    }
    c.q_tau(i) = p.q_tau();
    c.q_tilde(i) = p.q_tau() + sigma * d(0);
    c.phi_tau(i) = p.phi_tau;
  });
  return c;
}

CField apply_perturbation(const SpectralOperators& ops, const ConjugatedOperator& conj,
                          const CField& w) {
  CField out = conj.q_tilde.cast<Complex>().cwiseProduct(w);
  for (int a = 0; a < 3; ++a) out += conj.A_diff[a].cast<Complex>().cwiseProduct(ops.derivative(w, a));
  return out;
}

CField apply_perturbation_adjoint(const SpectralOperators& ops, const ConjugatedOperator& conj,
                                  const CField& v) {
  CField out = conj.q_tilde.cast<Complex>().cwiseProduct(v);
  for (int a = 0; a < 3; ++a)
    out += ops.derivative_adjoint(conj.A_diff[a].cast<Complex>().cwiseProduct(v), a);
  return out;
}

PerturbedInverse::PerturbedInverse(const ShiftedLaplacian& g0, const ConjugatedOperator& conj)
    : PerturbedInverse(g0, conj, Options{}) {}

PerturbedInverse::PerturbedInverse(const ShiftedLaplacian& g0, const ConjugatedOperator& conj,
                                   Options opts)
    : g0_(&g0), conj_(&conj), opts_(opts) {
  if (conj.vanishes()) return;
  k_norm_ = power_norm(
      g0.ops(), [this](const CField& v) { return apply_K(v); },
      [this](const CField& v) { return apply_K_adjoint(v); }, opts_.power_steps);
  if (k_norm_ >= 1.0)
    throw NeumannDivergenceError("perturbed inverse: ||K|| >= 1, Neumann series diverges; increase tau",
                                 k_norm_);
}

CField PerturbedInverse::apply_K(const CField& v) const {
  return apply_perturbation(g0_->ops(), *conj_, g0_->solve(v));
}

CField PerturbedInverse::apply_K_adjoint(const CField& v) const {
  return g0_->solve_adjoint(apply_perturbation_adjoint(g0_->ops(), *conj_, v));
}

CField PerturbedInverse::apply(const CField& w) const {
  return g0_->apply(w) + apply_perturbation(g0_->ops(), *conj_, w);
}

namespace {

template <class K>
CField neumann(const CField& rhs, K k, double tol, int max_terms, int& terms) {
  CField g = rhs, term = rhs;
  const double stop = tol * rhs.norm();
  terms = 0;
  while (term.norm() > stop) {
    if (terms >= max_terms)
      throw NonconvergenceError("perturbed inverse: Neumann series did not converge", term.norm());
    term = -k(term);
    g += term;
    ++terms;
  }
  return g;
}

}  // namespace

CField PerturbedInverse::solve(const CField& rhs) const {
  if (rhs.norm() == 0.0) return CField::Zero(rhs.size());
  const CField g = conj_->vanishes()
                       ? rhs
                       : neumann(rhs, [this](const CField& v) { return apply_K(v); },
                                 opts_.neumann_tol, opts_.max_terms, last_terms_);
  CField w = g0_->solve(g);
  last_residual_ = (apply(w) - rhs).norm() / rhs.norm();
  if (last_residual_ > opts_.residual_tol)
    throw NonconvergenceError("perturbed inverse: operator residual above tolerance", last_residual_);
  return w;
}

CField PerturbedInverse::solve_adjoint(const CField& rhs) const {
  const CField y = g0_->solve_adjoint(rhs);
  if (conj_->vanishes() || y.norm() == 0.0) return y;
  return neumann(y, [this](const CField& v) { return apply_K_adjoint(v); }, opts_.neumann_tol,
                 opts_.max_terms, last_terms_);
}

Complex AngularProfile::value(double theta) const {
  Complex s = 0.0;
  for (const auto& [k, c] : modes) s += c * std::exp(kI * double(k) * theta);
  return s;
}

Complex AngularProfile::first(double theta) const {
  Complex s = 0.0;
  for (const auto& [k, c] : modes) s += kI * double(k) * c * std::exp(kI * double(k) * theta);
  return s;
}

Complex AngularProfile::second(double theta) const {
  Complex s = 0.0;
  for (const auto& [k, c] : modes) s += -double(k) * k * c * std::exp(kI * double(k) * theta);
  return s;
}

PolarAmplitude polar_amplitude(const CGOParams& params, const Eigen::Vector3d& x) {
  const Eigen::Vector2d d(x(1) - params.omega(0), x(2) - params.omega(1));
  const double r = d.norm();
  if (!(r > 0.0)) throw DomainError("cgo: point coincides with the polar center");
  const double theta = std::atan2(d(1), d(0));
  const Eigen::Vector2d er = d / r, et(-er(1), er(0));
  const Complex e = std::exp(kI * params.lambda * (x(0) + kI * r));
  const Complex b = params.b.value(theta);
  PolarAmplitude pa;
  pa.r = r;
  pa.grad_r = Eigen::Vector3d(0.0, er(0), er(1));
  pa.value = e * b / std::sqrt(r);
  const Complex dr = (-0.5 / r - params.lambda) * pa.value;
  const Complex dth = e * params.b.first(theta) * std::pow(r, -1.5);
  pa.gradient = Eigen::Vector3cd(kI * params.lambda * pa.value, dr * er(0) + dth * et(0),
                                 dr * er(1) + dth * et(1));
  pa.laplacian = std::pow(r, -2.5) * e * (0.25 * b + params.b.second(theta));
  return pa;
}

Complex transported_residual(const CGOParams&, double sigma, const PolarAmplitude& a,
                             const Eigen::Vector3d& A_diff, double q_tilde) {
  const Complex adv = A_diff(0) * a.gradient(0) + A_diff(1) * a.gradient(1) + A_diff(2) * a.gradient(2);
  return -a.laplacian + adv + kI * sigma * A_diff.dot(a.grad_r) * a.value + q_tilde * a.value;
}

namespace {

struct MNodes {
  std::vector<std::size_t> nodes;
  std::vector<double> weights;
};

MNodes m_nodes(const SpectralBox& box, double lo, double hi) {
  MNodes out;
  const double eps1 = 1e-9 * box.h1(), epst = 1e-9 * box.ht();
  auto factor = [](double x, double lo, double hi, double eps) {
    if (x < lo - eps || x > hi + eps) return 0.0;
    return (std::abs(x - lo) <= eps || std::abs(x - hi) <= eps) ? 0.5 : 1.0;
  };
  for (std::size_t idx = 0; idx < box.size(); ++idx) {
    const Eigen::Vector3d p = box.point(idx);
    const double w = factor(p(0), lo, hi, eps1) * factor(p(1), lo, hi, epst) * factor(p(2), lo, hi, epst);
    if (w == 0.0) continue;
    out.nodes.push_back(idx);
    out.weights.push_back(w * box.cell_volume());
  }
  return out;
}

double sigma_of(const CGOParams& p, double tau) { return p.conjugate ? tau : -tau; }

}  // namespace

CGOSolution build_cgo(const CGOParams& params, const MollifiedFamily& family,
                      const CGOOptions& options) {
  const SpectralOperators ops(options.box);
  CGOSolution sol;
  sol.box = options.box;
  sol.lambda = params.lambda;
  sol.m_lo = options.m_lo;
  sol.m_hi = options.m_hi;
  double tau = params.tau;
  std::unique_ptr<ShiftedLaplacian> g0;
  for (int attempt = 0;; ++attempt) {
    try {
      g0 = std::make_unique<ShiftedLaplacian>(ops, sigma_of(params, tau));
      sol.retries = attempt;
      break;
    } catch (const ExceptionalTauError&) {
      if (attempt >= options.max_retries) throw;
      tau *= 1.0 + 1e-3;
    }
  }
  const double sigma = sigma_of(params, tau);
  sol.tau = tau;
  sol.sigma = sigma;

  const auto field = family.at(tau);
  const ConjugatedOperator conj = conjugated_operator(options.box, *field, sigma);
  const MNodes m = m_nodes(options.box, options.m_lo, options.m_hi);
  sol.nodes = m.nodes;
  sol.weights = m.weights;
  const std::size_t nm = m.nodes.size();

  std::vector<PolarAmplitude> amps(nm);
  CField rhs = CField::Zero(static_cast<Eigen::Index>(options.box.size()));
  double rhs2 = 0.0;
  for (std::size_t t = 0; t < nm; ++t) {
    const auto i = static_cast<Eigen::Index>(m.nodes[t]);
    amps[t] = polar_amplitude(params, options.box.point(m.nodes[t]));
    const Eigen::Vector3d d(conj.A_diff[0](i), conj.A_diff[1](i), conj.A_diff[2](i));
    const Complex f = std::exp(kI * sigma * amps[t].r) *
                      transported_residual(params, sigma, amps[t], d, conj.q_tilde(i));
    rhs(i) = -f;
    rhs2 += m.weights[t] * std::norm(f);
  }
  sol.rhs_l2 = std::sqrt(rhs2);

  const PerturbedInverse inverse(*g0, conj, options.inverse);
  sol.k_norm = inverse.k_norm();
  sol.r_tilde_box = inverse.solve(rhs);
  sol.neumann_terms = inverse.last_terms();
  sol.inverse_residual = inverse.last_residual();

  std::array<CField, 3> grad;
  CField lap = CField::Zero(sol.r_tilde_box.size());
  for (int a = 0; a < 3; ++a) {
    grad[a] = ops.derivative(sol.r_tilde_box, a);
    lap += ops.second_derivative(sol.r_tilde_box, a);
  }

  sol.u.resize(nm);
  sol.r_tilde.resize(nm);
  sol.amplitude.resize(nm);
  sol.phase_amplitude.resize(nm);
  sol.prefactor.resize(nm);
  sol.phi_tau.resize(nm);
  sol.grad_phi_tau.resize(nm);
  sol.grad_u.resize(nm);
  double n0 = 0.0, n1 = 0.0, n2 = 0.0;
  for (std::size_t t = 0; t < nm; ++t) {
    const auto i = static_cast<Eigen::Index>(m.nodes[t]);
    const Eigen::Vector3d x = options.box.point(m.nodes[t]);
    const PolarAmplitude& pa = amps[t];
    const Complex phase = std::exp(kI * sigma * pa.r);
    sol.amplitude(t) = pa.value;
    sol.phase_amplitude(t) = phase * pa.value;
    sol.r_tilde(t) = sol.r_tilde_box(i);
    sol.prefactor(t) = std::exp(-0.5 * conj.phi_tau(i) + sigma * x(0));
    sol.phi_tau(t) = conj.phi_tau(i);
    sol.grad_phi_tau[t] = Eigen::Vector3d(conj.grad_tau[0](i), conj.grad_tau[1](i), conj.grad_tau[2](i));
    sol.u(t) = sol.prefactor(t) * (sol.phase_amplitude(t) + sol.r_tilde(t));

    const Complex w = sol.phase_amplitude(t) + sol.r_tilde(t);
    Eigen::Vector3cd gw;
    Eigen::Vector3d shift(-0.5 * conj.grad_tau[0](i) + sigma, -0.5 * conj.grad_tau[1](i),
                          -0.5 * conj.grad_tau[2](i));
    for (int a = 0; a < 3; ++a) {
      gw(a) = phase * (pa.gradient(a) + kI * sigma * pa.grad_r(a) * pa.value) + grad[a](i);
      sol.grad_u[t](a) = sol.prefactor(t) * (gw(a) + shift(a) * w);
    }

    const double r2 = std::norm(sol.r_tilde(t));
    const double g2 = std::norm(grad[0](i)) + std::norm(grad[1](i)) + std::norm(grad[2](i));
    n0 += m.weights[t] * r2;
    n1 += m.weights[t] * (r2 + g2);
    n2 += m.weights[t] * (r2 + g2 + std::norm(lap(i)));
  }
  sol.norms = {std::sqrt(n0), std::sqrt(n1), std::sqrt(n2)};
  return sol;
}

Eigen::VectorXcd reconstruct_u(const CGOSolution& sol) {
  Eigen::VectorXcd u(sol.u.size());
  for (Eigen::Index t = 0; t < u.size(); ++t)
    u(t) = sol.prefactor(t) * (sol.phase_amplitude(t) + sol.r_tilde(t));
  return u;
}

double weak_residual(const CGOSolution& sol, const Conductivity& gamma) {
  const double c = 0.5 * (sol.m_lo + sol.m_hi), half = 0.5 * (sol.m_hi - sol.m_lo);
  Complex num = 0.0;
  double den = 0.0;
  for (std::size_t t = 0; t < sol.nodes.size(); ++t) {
    const Eigen::Vector3d x = sol.box.point(sol.nodes[t]);
    Eigen::Vector3d s = (x.array() - c) / half;
    if (s.cwiseAbs().maxCoeff() >= 1.0) continue;
    Eigen::Vector3d f, df;
    for (int a = 0; a < 3; ++a) {
      const double b = 1.0 - s(a) * s(a);
      f(a) = b * b * b * b;
      df(a) = -8.0 * s(a) * b * b * b / half;
    }
    const Eigen::Vector3d gpsi(df(0) * f(1) * f(2), f(0) * df(1) * f(2), f(0) * f(1) * df(2));
    const double g = gamma(to_vec(x));
    const Eigen::Vector3cd& gu = sol.grad_u[t];
    num += sol.weights[t] * g * (gu(0) * gpsi(0) + gu(1) * gpsi(1) + gu(2) * gpsi(2));
    den += sol.weights[t] * g * gu.norm() * gpsi.norm();
  }
  return den > 0.0 ? std::abs(num) / den : 0.0;
}

double applied_transport_residual(const CGOParams& params, const MollifiedFamily& family,
                                  const CGOOptions& options, double step) {
  const double sigma = sigma_of(params, params.tau);
  const auto field = family.at(params.tau);
  const MNodes m = m_nodes(options.box, options.m_lo, options.m_hi);
  std::vector<double> sq(m.nodes.size());
  auto v = [&](const Eigen::Vector3d& x) {
    const PolarAmplitude pa = polar_amplitude(params, x);
    return std::exp(kI * sigma * pa.r) * pa.value;
  };
  const double c1[2] = {8.0 / 12.0, -1.0 / 12.0};
  const double c2[3] = {-30.0 / 12.0, 16.0 / 12.0, -1.0 / 12.0};
  parallel_for(m.nodes.size(), [&](std::size_t t) {
    const Eigen::Vector3d x = options.box.point(m.nodes[t]);
    const MollifiedPoint p = field->evaluate(to_vec(x));
    const Eigen::Vector3d d = p.A() - p.A_tau();
    const Complex v0 = v(x);
    Complex lap = 3.0 * c2[0] * v0, adv = 0.0, d1 = 0.0;
    for (int a = 0; a < 3; ++a) {
      Complex da = 0.0;
      for (int k = 1; k <= 2; ++k) {
        Eigen::Vector3d e = Eigen::Vector3d::Zero();
        e(a) = k * step;
        const Complex vp = v(x + e), vm = v(x - e);
        lap += c2[k] * (vp + vm);
        da += c1[k - 1] * (vp - vm);
      }
      da /= step;
      adv += d(a) * da;
      if (a == 0) d1 = da;
    }
    lap /= step * step;
    const double q_tilde = p.q_tau() + sigma * d(0);
    const Complex pv = -lap - sigma * sigma * v0 - 2.0 * sigma * d1 + adv + q_tilde * v0;
    sq[t] = m.weights[t] * std::norm(pv);
  });
  double acc = 0.0;
  for (double s2 : sq) acc += s2;
  return std::sqrt(acc);
}

CGOLadder cgo_ladder(const CGOParams& params, const MollifiedFamily& family,
                     const std::vector<double>& tau_ladder, const CGOOptions& options) {
  CGOLadder out;
  out.weak_ok = true;
  CGOOptions coarse = options;
  coarse.box = options.box.coarsened();
  std::vector<std::pair<double, double>> samples;
  for (double tau : tau_ladder) {
    CGOParams p = params;
    p.tau = tau;
    const CGOSolution fine = build_cgo(p, family, options);
    p.tau = fine.tau;
    const CGOSolution rough = build_cgo(p, family, coarse);
    CGOLadderPoint pt;
    pt.tau = fine.tau;
    pt.r_l2 = fine.norms[0];
    pt.r_h1 = fine.norms[1];
    pt.r_h2 = fine.norms[2];
    pt.k_norm = fine.k_norm;
    pt.weak_residual = weak_residual(fine, family.gamma());
    pt.weak_residual_coarse = weak_residual(rough, family.gamma());
    pt.discretization = std::abs(pt.weak_residual - pt.weak_residual_coarse);
    pt.weak_ok = pt.weak_residual <= pt.discretization;
    out.weak_ok = out.weak_ok && pt.weak_ok;
    samples.emplace_back(pt.tau, pt.r_l2);
    out.points.push_back(pt);
  }
  out.remainder = make_rate_report("r_tilde L2", samples, -0.5 - params.eta, 0.1);
  return out;
}

void write_cgo_csv(const std::string& path, const CGOSolution& sol) {
  std::ofstream os(path);
  if (!os) throw Error("cannot open " + path);
  nlohmann::json head = {{"grid",
                          {{"n1", sol.box.n1},
                           {"nt", sol.box.nt},
                           {"half_length", sol.box.half_length},
                           {"half_width", sol.box.half_width},
                           {"twisted", sol.box.twisted}}},
                         {"lambda", sol.lambda},
                         {"tau", sol.tau},
                         {"chart", "cylinder"}};
  os << "# " << head.dump() << "\n";
  os << "idx,re_u,im_u,re_r,im_r\n";
  os.precision(17);
  for (std::size_t t = 0; t < sol.nodes.size(); ++t) {
    const auto i = static_cast<Eigen::Index>(t);
    os << sol.nodes[t] << ',' << sol.u(i).real() << ',' << sol.u(i).imag() << ','
       << sol.r_tilde(i).real() << ',' << sol.r_tilde(i).imag() << '\n';
  }
}

}  // namespace geotomo
