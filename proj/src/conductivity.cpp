#include "geotomo/conductivity.hpp"

#include <cmath>

namespace geotomo {

namespace {

double psi(double t) { return t > 0.0 ? std::exp(-1.0 / t) : 0.0; }
double dpsi(double t) { return t > 0.0 ? std::exp(-1.0 / t) / (t * t) : 0.0; }

}  // namespace

double smooth_cutoff(double s, double lo, double hi) {
  const double t = (s - lo) / (hi - lo);
  const double a = psi(1.0 - t), b = psi(t);
  return a / (a + b);
}

double smooth_cutoff_derivative(double s, double lo, double hi) {
  const double t = (s - lo) / (hi - lo);
  const double a = psi(1.0 - t), b = psi(t);
  const double da = -dpsi(1.0 - t), db = dpsi(t);
  return (da * b - a * db) / ((a + b) * (a + b)) / (hi - lo);
}

Conductivity constant_conductivity(double c, int dim) {
  Conductivity k;
  k.support_center = Vec::Zero(dim);
  k.support_radius = c == 1.0 ? 0.0 : -1.0;
  k.value = [c](const Vec&) { return c; };
  k.gradient = [dim](const Vec&) { return Vec(Vec::Zero(dim)); };
  return k;
}

Conductivity bump_conductivity(const Vec& center, double radius, double amplitude) {
  Conductivity k;
  k.support_center = center;
  k.support_radius = radius;
  k.value = [=](const Vec& x) {
    const double s2 = (x - center).squaredNorm() / (radius * radius);
    return s2 < 1.0 ? 1.0 + amplitude * std::exp(1.0 - 1.0 / (1.0 - s2)) : 1.0;
  };
  k.gradient = [=](const Vec& x) {
    const Vec d = x - center;
    const double s2 = d.squaredNorm() / (radius * radius);
    if (s2 >= 1.0) return Vec(Vec::Zero(x.size()));
    const double u = 1.0 - s2;
    const double f = amplitude * std::exp(1.0 - 1.0 / u);
    return Vec(f * (-2.0 / (u * u * radius * radius)) * d);
  };
  return k;
}

Conductivity cusp_conductivity(const Vec& x0, double kappa, double beta, double R) {
  Conductivity k;
  k.tag = "cusp";
  k.eta_prime = beta - 1.5;
  k.support_center = x0;
  k.support_radius = R;
  k.value = [=](const Vec& x) {
    const double rho = (x - x0).norm();
    return 1.0 + kappa * std::pow(rho, beta) * smooth_cutoff(rho / R, 0.5, 1.0);
  };
  k.gradient = [=](const Vec& x) {
    const Vec d = x - x0;
    const double rho = d.norm();
    if (rho == 0.0 || rho >= R) return Vec(Vec::Zero(x.size()));
    const double s = rho / R;
    const double dr = kappa * (beta * std::pow(rho, beta - 1.0) * smooth_cutoff(s, 0.5, 1.0) +
                               std::pow(rho, beta) * smooth_cutoff_derivative(s, 0.5, 1.0) / R);
    return Vec(dr * d / rho);
  };
  return k;
}

Conductivity face_cusp_conductivity(int axis, double face, const Vec& p, double kappa, double beta,
                                    double R) {
  Conductivity k;
  k.tag = "cusp";
  k.eta_prime = beta - 1.5;
  k.support_center = p;
  k.support_radius = R;
  k.value = [=](const Vec& x) {
    const double d = face - x(axis);
    if (d <= 0.0) return 1.0;
    return 1.0 + kappa * std::pow(d, beta) * smooth_cutoff((x - p).norm() / R, 0.5, 1.0);
  };
  k.gradient = [=](const Vec& x) {
    Vec g = Vec::Zero(x.size());
    const double d = face - x(axis);
    const Vec e = x - p;
    const double rho = e.norm();
    if (d <= 0.0 || rho >= R) return g;
    const double s = rho / R;
    g(axis) = -kappa * beta * std::pow(d, beta - 1.0) * smooth_cutoff(s, 0.5, 1.0);
    if (rho > 0.0) g += kappa * std::pow(d, beta) * smooth_cutoff_derivative(s, 0.5, 1.0) / R * e / rho;
    return g;
  };
  return k;
}

Conductivity product(const Conductivity& a, const Conductivity& b) {
  Conductivity k;
  k.tag = (a.tag == "cusp" || b.tag == "cusp") ? "cusp" : "smooth";
  k.eta_prime = std::max(a.eta_prime, b.eta_prime);
  if (a.support_radius == 0.0) {
    k.support_center = b.support_center;
    k.support_radius = b.support_radius;
  } else if (b.support_radius == 0.0) {
    k.support_center = a.support_center;
    k.support_radius = a.support_radius;
  } else if (a.support_radius > 0.0 && b.support_radius > 0.0) {
    const double d = (a.support_center - b.support_center).norm();
    k.support_center = 0.5 * (a.support_center + b.support_center);
    k.support_radius = 0.5 * d + std::max(a.support_radius, b.support_radius);
  }
  k.value = [a, b](const Vec& x) { return a(x) * b(x); };
  k.gradient = [a, b](const Vec& x) { return Vec(a.grad(x) * b(x) + a(x) * b.grad(x)); };
  return k;
}

Conductivity reflect_x1(const Conductivity& a) {
  Conductivity k = a;
  if (k.support_radius >= 0.0) k.support_center(0) = -k.support_center(0);
  k.value = [a](const Vec& x) {
    Vec y = x;
    y(0) = -y(0);
    return a(y);
  };
  k.gradient = [a](const Vec& x) {
    Vec y = x;
    y(0) = -y(0);
    Vec g = a.grad(y);
    g(0) = -g(0);
    return g;
  };
  return k;
}

Conductivity layered_conductivity(std::function<double(double)> profile,
                                  std::function<double(double)> derivative, int dim) {
  Conductivity k;
  k.value = [profile](const Vec& x) { return profile(x(0)); };
  k.gradient = [derivative, dim](const Vec& x) {
    Vec g = Vec::Zero(dim);
    g(0) = derivative(x(0));
    return g;
  };
  return k;
}

}  // namespace geotomo
