#include "geotomo/mollify.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

#include <fftw3.h>

#include "geotomo/errors.hpp"
#include "geotomo/quadrature.hpp"

namespace geotomo {

namespace {

constexpr double kPi = std::numbers::pi;

constexpr int kPower = 10;
constexpr int kSamplesPerRadius = 6;

struct KernelTerms {
  double value = 0.0;
  /// rho'(s) / s.
  double first_over_s = 0.0;
  /// rho'' + 2 rho' / s.
  double laplacian = 0.0;
};

KernelTerms kernel_terms(double s) {
  KernelTerms t;
  if (s >= 1.0) return t;
  const double c = Mollifier::normalization();
  const double u = 1.0 - s * s;
  const double u_k2 = std::pow(u, kPower - 2);
  t.value = c * u_k2 * u * u;
  t.first_over_s = -2.0 * kPower * c * u_k2 * u;
  t.laplacian = c * (-6.0 * kPower * u_k2 * u + 4.0 * kPower * (kPower - 1) * s * s * u_k2);
  return t;
}

struct FftBuffer {
  int p0, p1, p2;
  double* real;
  fftw_complex* spec;
  fftw_plan fwd, inv;

  FftBuffer(int nx, int ny, int nz) : p0(nx), p1(ny), p2(nz) {
    const std::size_t nr = static_cast<std::size_t>(nx) * ny * nz;
    const std::size_t nc = static_cast<std::size_t>(nz) * ny * (nx / 2 + 1);
    real = fftw_alloc_real(nr);
    spec = fftw_alloc_complex(nc);
    fwd = fftw_plan_dft_r2c_3d(nz, ny, nx, real, spec, FFTW_ESTIMATE);
    inv = fftw_plan_dft_c2r_3d(nz, ny, nx, spec, real, FFTW_ESTIMATE);
  }
  ~FftBuffer() {
    fftw_destroy_plan(fwd);
    fftw_destroy_plan(inv);
    fftw_free(real);
    fftw_free(spec);
  }
  FftBuffer(const FftBuffer&) = delete;
  FftBuffer& operator=(const FftBuffer&) = delete;

  std::size_t real_size() const { return static_cast<std::size_t>(p0) * p1 * p2; }
  std::size_t spec_size() const { return static_cast<std::size_t>(p2) * p1 * (p0 / 2 + 1); }
};

}  // namespace

double Mollifier::normalization() {
  static const double c = [] {
    const QuadratureRule q = gauss_legendre(64, 0.0, 1.0);
    double m = 0.0;
    for (std::size_t i = 0; i < q.nodes.size(); ++i) {
      const double s = q.nodes[i];
      m += q.weights[i] * s * s * std::pow(1.0 - s * s, kPower);
    }
    return 1.0 / (4.0 * kPi * m);
  }();
  return c;
}

double Mollifier::value(double s) { return kernel_terms(s).value; }

double Mollifier::first(double s) { return s * kernel_terms(s).first_over_s; }

double Mollifier::second(double s) {
  const KernelTerms t = kernel_terms(s);
  return t.laplacian - 2.0 * t.first_over_s;
}

Eigen::Vector3d BoxGrid3::point(std::size_t idx) const {
  const int i = static_cast<int>(idx % nx);
  const int j = static_cast<int>((idx / nx) % ny);
  const int k = static_cast<int>(idx / (static_cast<std::size_t>(nx) * ny));
  return point(i, j, k);
}

double MollifiedPoint::q_tau() const {
  return -0.5 * div_A_tau() - 0.25 * A_tau().squaredNorm() + 0.5 * A().dot(A_tau());
}

MollifiedField::MollifiedField(const Conductivity& gamma, double tau, double h)
    : gamma_(gamma), tau_(tau), h_(h) {
  if (gamma.support_radius < 0.0) {
    throw PreconditionError("mollify: gamma - 1 must have a known compact support");
  }
  if (!(h > 0.0)) throw DomainError("mollify: scale must be positive");
  if (gamma.support_radius == 0.0) {
    trivial_ = true;
    return;
  }
  const double delta = h / kSamplesPerRadius;
  const double half = gamma.support_radius + h + 2.0 * delta;
  const int n = 2 * static_cast<int>(std::ceil(half / delta)) + 1;
  grid_.spacing = delta;
  grid_.nx = grid_.ny = grid_.nz = n;
  const Vec& c = gamma.support_center;
  grid_.origin = Eigen::Vector3d(c(0), c(1), c(2)) - 0.5 * (n - 1) * delta * Eigen::Vector3d::Ones();
  phi_.resize(grid_.size());
  for (std::size_t i = 0; i < phi_.size(); ++i) {
    const Eigen::Vector3d p = grid_.point(i);
    const double g = gamma(vec3(p(0), p(1), p(2)));
    if (!(g > 0.0)) throw DomainError("mollify: conductivity is not positive");
    phi_[i] = std::log(g);
  }
}

MollifiedPoint MollifiedField::evaluate(const Vec& x) const {
  MollifiedPoint out;
  const double g = gamma_(x);
  if (!(g > 0.0)) throw DomainError("mollify: conductivity is not positive");
  out.phi = std::log(g);
  const Vec dg = gamma_.grad(x);
  out.grad_phi = Eigen::Vector3d(dg(0), dg(1), dg(2)) / g;
  if (trivial_) return out;

  const double delta = grid_.spacing;
  const double w0 = delta * delta * delta / (h_ * h_ * h_);
  const Eigen::Vector3d xp(x(0), x(1), x(2));
  int lo[3], hi[3];
  const int dims[3] = {grid_.nx, grid_.ny, grid_.nz};
  for (int a = 0; a < 3; ++a) {
    lo[a] = std::max(0, static_cast<int>(std::ceil((xp(a) - grid_.origin(a) - h_) / delta)));
    hi[a] = std::min(dims[a] - 1, static_cast<int>(std::floor((xp(a) - grid_.origin(a) + h_) / delta)));
  }
  for (int k = lo[2]; k <= hi[2]; ++k) {
    for (int j = lo[1]; j <= hi[1]; ++j) {
      for (int i = lo[0]; i <= hi[0]; ++i) {
        const double f = phi_[grid_.index(i, j, k)];
        if (f == 0.0) continue;
        const Eigen::Vector3d z = (xp - grid_.point(i, j, k)) / h_;
        const double s = z.norm();
        if (s >= 1.0) continue;
        const KernelTerms kt = kernel_terms(s);
        out.phi_tau += w0 * kt.value * f;
        out.grad_tau += (w0 / h_) * kt.first_over_s * f * z;
        out.lap_tau += (w0 / (h_ * h_)) * kt.laplacian * f;
      }
    }
  }
  return out;
}

MollifiedField::Snapshot MollifiedField::snapshot() const {
  Snapshot snap;
  snap.grid = grid_;
  const std::size_t n = grid_.size();
  snap.phi_tau.assign(n, 0.0);
  snap.lap_tau.assign(n, 0.0);
  snap.grad_tau.assign(n, Eigen::Vector3d::Zero());
  if (trivial_ || n == 0) return snap;

  const double delta = grid_.spacing;
  const int k = static_cast<int>(std::ceil(h_ / delta));
  FftBuffer buf(grid_.nx + 2 * k, grid_.ny + 2 * k, grid_.nz + 2 * k);
  const std::size_t nr = buf.real_size(), nc = buf.spec_size();
  auto pidx = [&](int i, int j, int l) {
    const int a = (i % buf.p0 + buf.p0) % buf.p0;
    const int b = (j % buf.p1 + buf.p1) % buf.p1;
    const int c = (l % buf.p2 + buf.p2) % buf.p2;
    return (static_cast<std::size_t>(c) * buf.p1 + b) * buf.p0 + a;
  };

  std::fill(buf.real, buf.real + nr, 0.0);
  for (int l = 0; l < grid_.nz; ++l)
    for (int j = 0; j < grid_.ny; ++j)
      for (int i = 0; i < grid_.nx; ++i) buf.real[pidx(i, j, l)] = phi_[grid_.index(i, j, l)];
  fftw_execute(buf.fwd);
  std::vector<std::complex<double>> phi_hat(nc);
  for (std::size_t i = 0; i < nc; ++i) phi_hat[i] = {buf.spec[i][0], buf.spec[i][1]};

  const double w0 = delta * delta * delta / (h_ * h_ * h_);
  // Kernels: rho_h, d/dx_a rho_h (a = 0, 1, 2), Laplacian of rho_h.
  for (int which = 0; which < 5; ++which) {
    std::fill(buf.real, buf.real + nr, 0.0);
    for (int c = -k; c <= k; ++c) {
      for (int b = -k; b <= k; ++b) {
        for (int a = -k; a <= k; ++a) {
          const Eigen::Vector3d z = Eigen::Vector3d(a, b, c) * (delta / h_);
          const double s = z.norm();
          if (s >= 1.0) continue;
          const KernelTerms kt = kernel_terms(s);
          double v;
          if (which == 0) {
            v = w0 * kt.value;
          } else if (which < 4) {
            v = (w0 / h_) * kt.first_over_s * z(which - 1);
          } else {
            v = (w0 / (h_ * h_)) * kt.laplacian;
          }
          buf.real[pidx(a, b, c)] = v;
        }
      }
    }
    fftw_execute(buf.fwd);
    for (std::size_t i = 0; i < nc; ++i) {
      const std::complex<double> prod = phi_hat[i] * std::complex<double>(buf.spec[i][0], buf.spec[i][1]);
      buf.spec[i][0] = prod.real() / static_cast<double>(nr);
      buf.spec[i][1] = prod.imag() / static_cast<double>(nr);
    }
    fftw_execute(buf.inv);
    for (int l = 0; l < grid_.nz; ++l) {
      for (int j = 0; j < grid_.ny; ++j) {
        for (int i = 0; i < grid_.nx; ++i) {
          const double v = buf.real[pidx(i, j, l)];
          const std::size_t g = grid_.index(i, j, l);
          if (which == 0) {
            snap.phi_tau[g] = v;
          } else if (which < 4) {
            snap.grad_tau[g](which - 1) = v;
          } else {
            snap.lap_tau[g] = v;
          }
        }
      }
    }
  }
  return snap;
}

MollifierNorms mollifier_norms(const MollifiedField& field) {
  MollifierNorms m;
  const MollifiedField::Snapshot snap = field.snapshot();
  const double dv = std::pow(snap.grid.spacing, 3);
  for (std::size_t i = 0; i < snap.phi_tau.size(); ++i) {
    const Eigen::Vector3d x = snap.grid.point(i);
    const Vec xv = vec3(x(0), x(1), x(2));
    const double g = field.gamma()(xv);
    const Vec dgv = field.gamma().grad(xv);
    const Eigen::Vector3d dg(dgv(0), dgv(1), dgv(2));
    MollifiedPoint p;
    p.grad_phi = dg / g;
    p.grad_tau = snap.grad_tau[i];
    p.lap_tau = snap.lap_tau[i];
    const double a_diff = (p.A() - p.A_tau()).norm();
    const double div = std::abs(p.div_A_tau());
    const double e = std::exp(snap.phi_tau[i]);
    const double q = std::abs(p.q_tau());
    m.A_diff_linf = std::max(m.A_diff_linf, a_diff);
    m.div_linf = std::max(m.div_linf, div);
    m.A_diff_l2 += a_diff * a_diff * dv;
    m.div_l2 += div * div * dv;
    m.gamma_diff_linf = std::max(m.gamma_diff_linf, std::abs(g - e));
    m.grad_gamma_diff_linf = std::max(m.grad_gamma_diff_linf, (dg - e * p.grad_tau).norm());
    m.q_linf = std::max(m.q_linf, q);
    m.q_l2 += q * q * dv;
  }
  m.A_diff_l2 = std::sqrt(m.A_diff_l2);
  m.div_l2 = std::sqrt(m.div_l2);
  m.q_l2 = std::sqrt(m.q_l2);
  return m;
}

MollifiedFamily::MollifiedFamily(Conductivity gamma, double eta, double scale_constant)
    : gamma_(std::move(gamma)), eta_(eta), scale_constant_(scale_constant) {
  if (!(eta > 0.0)) throw DomainError("MollifiedFamily: eta must be positive");
}

std::shared_ptr<const MollifiedField> MollifiedFamily::at(double tau) const {
  return std::make_shared<const MollifiedField>(gamma_, tau, scale(tau));
}

std::vector<RateReport> mollifier_rate_reports(const MollifiedFamily& family,
                                               const std::vector<double>& tau_ladder, double slack) {
  if (tau_ladder.size() < 5) throw PreconditionError("rate_report: ladder needs at least 5 points");
  for (std::size_t i = 2; i < tau_ladder.size(); ++i) {
    const double r0 = tau_ladder[1] / tau_ladder[0], r = tau_ladder[i] / tau_ladder[i - 1];
    if (!(r0 > 1.0) || std::abs(r / r0 - 1.0) > 0.02) {
      throw PreconditionError("rate_report: ladder is not geometric");
    }
  }
  const double eta = family.eta();
  const std::vector<std::pair<std::string, double>> spec = {
      {"A-A_tau Linf", 0.0},           {"div A_tau Linf", 1.0},
      {"A-A_tau L2", -0.5 - eta},      {"div A_tau L2", 1.0},
      {"gamma-exp(phi_tau) Linf", -1.0 - eta}, {"grad(gamma-exp(phi_tau)) Linf", -eta},
      {"q_tau Linf", 1.0},             {"q_tau L2", 0.5 - eta}};
  std::vector<std::vector<std::pair<double, double>>> samples(spec.size());
  for (double tau : tau_ladder) {
    const MollifierNorms m = mollifier_norms(*family.at(tau));
    const double v[] = {m.A_diff_linf, m.div_linf, m.A_diff_l2, m.div_l2,
                        m.gamma_diff_linf, m.grad_gamma_diff_linf, m.q_linf, m.q_l2};
    for (std::size_t q = 0; q < spec.size(); ++q) samples[q].push_back({tau, v[q]});
  }
  std::vector<RateReport> out;
  for (std::size_t q = 0; q < spec.size(); ++q) {
    out.push_back(make_rate_report(spec[q].first, samples[q], spec[q].second, slack));
  }
  return out;
}

}  // namespace geotomo
