#include "geotomo/carleman.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "geotomo/errors.hpp"

namespace geotomo {

namespace {

using Complex = std::complex<double>;
constexpr double kPi = 3.14159265358979323846;

// Rows of the one-sided fourth-order stencils at offsets 0 and 1 from a face.
constexpr double kD1Edge[2][5] = {{-25, 48, -36, 16, -3}, {-3, -10, 18, -6, 1}};
constexpr double kD1Center[5] = {1, -8, 0, 8, -1};
constexpr double kD2Edge[2][6] = {{45, -154, 214, -156, 61, -10}, {10, -15, -4, 14, -6, 1}};
constexpr double kD2Center[5] = {-1, 16, -30, 16, -1};

std::size_t stride(const CarlemanGrid& g, int axis) {
  const std::size_t m = g.nodes();
  return axis == 0 ? 1 : (axis == 1 ? m : m * m);
}

template <class Line>
void for_each_line(const CarlemanGrid& g, int axis, Line line) {
  const int m = g.nodes();
  for (int b = 0; b < m; ++b)
    for (int a = 0; a < m; ++a) {
      std::size_t base;
      if (axis == 0) base = g.index(0, a, b);
      else if (axis == 1) base = g.index(a, 0, b);
      else base = g.index(a, b, 0);
      line(base);
    }
}

std::vector<double> simpson_weights(int n, double h) {
  if (n % 2 != 0) throw PreconditionError("carleman: Simpson rule needs an even interval count");
  std::vector<double> w(n + 1);
  for (int i = 0; i <= n; ++i) w[i] = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
  for (double& x : w) x *= h / 3.0;
  return w;
}

/// Calls body(idx, axis, sign, weight) for every node of every face.
template <class Body>
void for_each_face_node(const CarlemanGrid& g, Body body) {
  const std::vector<double> w = simpson_weights(g.n, g.h());
  for (int axis = 0; axis < 3; ++axis) {
    for (int side = 0; side < 2; ++side) {
      const int fixed = side == 0 ? 0 : g.n;
      const double sign = side == 0 ? -1.0 : 1.0;
      for (int b = 0; b <= g.n; ++b)
        for (int a = 0; a <= g.n; ++a) {
          std::size_t idx;
          if (axis == 0) idx = g.index(fixed, a, b);
          else if (axis == 1) idx = g.index(a, fixed, b);
          else idx = g.index(a, b, fixed);
          body(idx, axis, sign, w[a] * w[b]);
        }
    }
  }
}

}  // namespace

Eigen::Vector3d CarlemanGrid::point(std::size_t idx) const {
  const std::size_t m = nodes();
  return point(static_cast<int>(idx % m), static_cast<int>((idx / m) % m), static_cast<int>(idx / (m * m)));
}

Eigen::VectorXcd sample(const CarlemanGrid& grid, const ComplexFn& f) {
  Eigen::VectorXcd v(static_cast<Eigen::Index>(grid.size()));
  for (std::size_t i = 0; i < grid.size(); ++i) v(static_cast<Eigen::Index>(i)) = f(grid.point(i));
  return v;
}

Eigen::VectorXcd fd_derivative(const CarlemanGrid& grid, const Eigen::VectorXcd& v, int axis) {
  if (grid.n < 6) throw PreconditionError("carleman: grid too coarse for fourth-order stencils");
  Eigen::VectorXcd out(v.size());
  const std::size_t s = stride(grid, axis);
  const int n = grid.n;
  const double inv = 1.0 / (12.0 * grid.h());
  for_each_line(grid, axis, [&](std::size_t base) {
    auto at = [&](int i) { return v(static_cast<Eigen::Index>(base + i * s)); };
    for (int i = 0; i <= n; ++i) {
      Complex acc = 0.0;
      if (i <= 1) {
        for (int t = 0; t < 5; ++t) acc += kD1Edge[i][t] * at(t);
      } else if (i >= n - 1) {
        const int r = n - i;
        for (int t = 0; t < 5; ++t) acc -= kD1Edge[r][t] * at(n - t);
      } else {
        for (int t = 0; t < 5; ++t) acc += kD1Center[t] * at(i - 2 + t);
      }
      out(static_cast<Eigen::Index>(base + i * s)) = acc * inv;
    }
  });
  return out;
}

Eigen::VectorXcd fd_second_derivative(const CarlemanGrid& grid, const Eigen::VectorXcd& v, int axis) {
  if (grid.n < 6) throw PreconditionError("carleman: grid too coarse for fourth-order stencils");
  Eigen::VectorXcd out(v.size());
  const std::size_t s = stride(grid, axis);
  const int n = grid.n;
  const double inv = 1.0 / (12.0 * grid.h() * grid.h());
  for_each_line(grid, axis, [&](std::size_t base) {
    auto at = [&](int i) { return v(static_cast<Eigen::Index>(base + i * s)); };
    for (int i = 0; i <= n; ++i) {
      Complex acc = 0.0;
      if (i <= 1) {
        for (int t = 0; t < 6; ++t) acc += kD2Edge[i][t] * at(t);
      } else if (i >= n - 1) {
        const int r = n - i;
        for (int t = 0; t < 6; ++t) acc += kD2Edge[r][t] * at(n - t);
      } else {
        for (int t = 0; t < 5; ++t) acc += kD2Center[t] * at(i - 2 + t);
      }
      out(static_cast<Eigen::Index>(base + i * s)) = acc * inv;
    }
  });
  return out;
}

Eigen::VectorXcd fd_laplacian(const CarlemanGrid& grid, const Eigen::VectorXcd& v) {
  return fd_second_derivative(grid, v, 0) + fd_second_derivative(grid, v, 1) +
         fd_second_derivative(grid, v, 2);
}

double simpson_volume(const CarlemanGrid& grid, const Eigen::VectorXd& f) {
  const std::vector<double> w = simpson_weights(grid.n, grid.h());
  double acc = 0.0;
  for (int k = 0; k <= grid.n; ++k)
    for (int j = 0; j <= grid.n; ++j)
      for (int i = 0; i <= grid.n; ++i)
        acc += w[i] * w[j] * w[k] * f(static_cast<Eigen::Index>(grid.index(i, j, k)));
  return acc;
}

double simpson_flux(const CarlemanGrid& grid, const std::array<Eigen::VectorXd, 3>& f) {
  double acc = 0.0;
  for_each_face_node(grid, [&](std::size_t idx, int axis, double sign, double w) {
    acc += w * sign * f[axis](static_cast<Eigen::Index>(idx));
  });
  return acc;
}

double simpson_surface(const CarlemanGrid& grid, const Eigen::VectorXd& f,
                       const std::function<bool(const Eigen::Vector3d&)>& keep_normal) {
  double acc = 0.0;
  for_each_face_node(grid, [&](std::size_t idx, int axis, double sign, double w) {
    if (keep_normal) {
      Eigen::Vector3d nu = Eigen::Vector3d::Zero();
      nu(axis) = sign;
      if (!keep_normal(nu)) return;
    }
    acc += w * f(static_cast<Eigen::Index>(idx));
  });
  return acc;
}

DivergenceCheck divergence_identity_check(const CarlemanGrid& grid, const Eigen::VectorXcd& v, double tau) {
  std::array<Eigen::VectorXcd, 3> g;
  for (int a = 0; a < 3; ++a) g[a] = fd_derivative(grid, v, a);
  const Eigen::VectorXcd lap = fd_laplacian(grid, v);
  const Eigen::Index n = v.size();
  const Eigen::VectorXd grad2 = g[0].cwiseAbs2() + g[1].cwiseAbs2() + g[2].cwiseAbs2();
  const Eigen::VectorXd v2 = v.cwiseAbs2();

  std::array<Eigen::VectorXd, 3> F;
  for (int a = 0; a < 3; ++a) F[a] = 4.0 * tau * (g[0].conjugate().cwiseProduct(g[a])).real();
  F[0] += -2.0 * tau * grad2 + 2.0 * tau * tau * tau * v2;

  Eigen::VectorXd div = Eigen::VectorXd::Zero(n);
  for (int a = 0; a < 3; ++a) div += fd_derivative(grid, F[a].cast<Complex>(), a).real();

  const Eigen::VectorXcd shifted = lap + tau * tau * v;
  DivergenceCheck out;
  out.vol = simpson_volume(grid, div);
  out.surf = simpson_flux(grid, F);
  out.left = simpson_volume(grid, 4.0 * tau * (shifted.cwiseProduct(g[0].conjugate())).real());
  const Eigen::VectorXd fmag = (F[0].cwiseAbs2() + F[1].cwiseAbs2() + F[2].cwiseAbs2()).cwiseSqrt();
  out.scale = simpson_volume(grid, fmag) + simpson_surface(grid, fmag);
  if (out.scale > 0.0) {
    out.rel_err = std::abs(out.vol - out.surf) / out.scale;
    out.left_rel_err = std::abs(out.left - out.surf) / out.scale;
  }
  return out;
}

CarlemanConstants frozen_carleman_constants() {
  CarlemanConstants c;
  c.C = 0.125;
  c.C1 = 0.0424;
  c.C2 = 0.0;
  return c;
}

double CarlemanReport::boundary_sum() const {
  double s = 0.0;
  for (const auto& [name, value] : boundary_terms) s += value;
  return s;
}

namespace {

struct EstimateParts {
  double interior = 0.0;  // tau^2 ||v||^2 + ||grad v||^2
  double trace = 0.0;     // int_dM |v|^2
  double flux = 0.0;      // Re int_dM conj(v) d_nu v
  double cross = 0.0, gradient = 0.0, cubic = 0.0;
  double rhs = 0.0;
  double hypothesis = 0.0;
};

EstimateParts estimate_parts(const CarlemanGrid& grid, const Eigen::VectorXcd& v, double tau,
                             const LowerOrder& lower) {
  std::array<Eigen::VectorXcd, 3> g;
  for (int a = 0; a < 3; ++a) g[a] = fd_derivative(grid, v, a);
  const Eigen::VectorXd grad2 = g[0].cwiseAbs2() + g[1].cwiseAbs2() + g[2].cwiseAbs2();
  const Eigen::VectorXd v2 = v.cwiseAbs2();

  EstimateParts p;
  p.interior = tau * tau * simpson_volume(grid, v2) + simpson_volume(grid, grad2);

  for_each_face_node(grid, [&](std::size_t idx, int axis, double sign, double w) {
    const auto i = static_cast<Eigen::Index>(idx);
    const Complex dnu = sign * g[axis](i);
    const double nu1 = axis == 0 ? sign : 0.0;
    p.trace += w * v2(i);
    p.flux += w * std::real(std::conj(v(i)) * dnu);
    p.cross += w * 4.0 * tau * std::real(dnu * std::conj(g[0](i)));
    p.gradient += w * (-2.0 * tau * nu1 * grad2(i));
    p.cubic += w * 2.0 * tau * tau * tau * nu1 * v2(i);
  });

  Eigen::VectorXcd op = -fd_laplacian(grid, v) - tau * tau * v - 2.0 * tau * g[0];
  double a_inf = 0.0, q_inf = 0.0;
  if (lower.A[0].size() > 0) {
    for (int a = 0; a < 3; ++a) {
      Eigen::VectorXcd shifted = g[a];
      if (a == 0) shifted += tau * v;
      op += lower.A[a].cast<Complex>().cwiseProduct(shifted);
    }
    a_inf = (lower.A[0].cwiseAbs2() + lower.A[1].cwiseAbs2() + lower.A[2].cwiseAbs2()).cwiseSqrt().maxCoeff();
  }
  if (lower.q.size() > 0) {
    op += lower.q.cast<Complex>().cwiseProduct(v);
    q_inf = lower.q.cwiseAbs().maxCoeff();
  }
  p.rhs = simpson_volume(grid, op.cwiseAbs2());
  p.hypothesis = a_inf * a_inf + q_inf * q_inf / (tau * tau);
  return p;
}

}  // namespace

CarlemanReport estimate_check(const CarlemanGrid& grid, const Eigen::VectorXcd& v, double tau,
                              const LowerOrder& lower, const CarlemanConstants& constants,
                              double tolerance) {
  const EstimateParts p = estimate_parts(grid, v, tau, lower);
  CarlemanReport r;
  r.tau = tau;
  r.interior_lhs = constants.C * p.interior;
  r.boundary_terms = {{"trace", -constants.C1 * tau * tau * p.trace},
                      {"flux", -constants.C2 * p.flux},
                      {"cross", p.cross},
                      {"gradient", p.gradient},
                      {"cubic", p.cubic}};
  r.rhs = p.rhs;
  r.hypothesis = p.hypothesis;
  r.slack = r.rhs - r.interior_lhs - r.boundary_sum();
  r.scale = r.rhs + r.interior_lhs;
  for (const auto& [name, value] : r.boundary_terms) r.scale += std::abs(value);
  r.pass = r.slack >= -tolerance * r.scale;
  return r;
}

std::vector<CarlemanTestFn> carleman_family(int count, unsigned seed, bool compact) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> freq(-6.0, 6.0), coef(-1.0, 1.0), angle(0.0, 2.0 * kPi);
  std::vector<CarlemanTestFn> out;
  const int generic = (3 * count + 4) / 5;
  auto envelope = [compact](const Eigen::Vector3d& x) {
    if (!compact) return 1.0;
    const double e = std::sin(kPi * x(0)) * std::sin(kPi * (x(1) + 0.5)) * std::sin(kPi * (x(2) + 0.5));
    return std::pow(e, 6);
  };
  for (int f = 0; f < count; ++f) {
    if (f < generic) {
      std::vector<std::pair<Eigen::Vector3d, Complex>> waves(4);
      for (auto& [k, c] : waves) {
        k = Eigen::Vector3d(freq(rng), freq(rng), freq(rng));
        c = Complex(coef(rng), coef(rng));
      }
      const Complex c0(coef(rng), coef(rng));
      const Eigen::Vector3d lin(coef(rng), coef(rng), coef(rng));
      out.push_back([waves, c0, lin, envelope](const Eigen::Vector3d& x, double) {
        Complex s = c0 + lin.dot(x);
        for (const auto& [k, c] : waves) s += c * std::exp(Complex(0.0, k.dot(x)));
        return s * envelope(x);
      });
    } else {
      const double th = angle(rng);
      const Eigen::Vector3d omega(0.0, std::cos(th), std::sin(th));
      Eigen::Matrix3d quad;
      for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) quad(a, b) = coef(rng);
      const Eigen::Vector3d lin(coef(rng), coef(rng), coef(rng));
      const double eps = 0.1 * (1.0 + coef(rng));
      out.push_back([omega, quad, lin, eps, envelope](const Eigen::Vector3d& x, double tau) {
        const double p = x.dot(quad * x) + lin.dot(x);
        return std::exp(Complex(0.0, tau * omega.dot(x))) * (1.0 + eps * p) * envelope(x);
      });
    }
  }
  return out;
}

CarlemanGrid carleman_grid_for(double tau, int n_min) {
  int n = std::max(n_min, 2 * static_cast<int>(std::ceil(std::abs(tau))));
  if (n % 2) ++n;
  return CarlemanGrid{n};
}

CarlemanConstants calibrate_carleman(const std::vector<CarlemanTestFn>& family,
                                     const std::vector<double>& tau_ladder, int n_min, double C,
                                     double c2_max, double margin) {
  struct Item {
    double deficit, trace, flux;
  };
  std::vector<Item> items;
  for (double tau : tau_ladder) {
    const CarlemanGrid grid = carleman_grid_for(tau, n_min);
    for (const auto& f : family) {
      const Eigen::VectorXcd v = sample(grid, [&](const Eigen::Vector3d& x) { return f(x, tau); });
      const EstimateParts p = estimate_parts(grid, v, tau, LowerOrder{});
      items.push_back({C * p.interior + p.cross + p.gradient + p.cubic - p.rhs, tau * tau * p.trace, p.flux});
    }
  }
  CarlemanConstants best;
  best.C = C;
  double best_c1 = std::numeric_limits<double>::infinity();
  const int steps = 400;
  for (int s = 0; s <= steps; ++s) {
    const double c2 = c2_max * s / steps;
    double c1 = 0.0;
    bool feasible = true;
    for (const Item& it : items) {
      const double need = it.deficit - c2 * it.flux;
      if (it.trace > 0.0) c1 = std::max(c1, need / it.trace);
      else if (need > 0.0) feasible = false;
    }
    if (feasible && c1 < best_c1) {
      best_c1 = c1;
      best.C2 = c2;
    }
  }
  if (!std::isfinite(best_c1)) throw NonconvergenceError("carleman: no feasible constants on the sweep", 0.0);
  best.C1 = best_c1 * margin;
  return best;
}

}  // namespace geotomo
