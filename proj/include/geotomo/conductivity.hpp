#pragma once

#include <functional>
#include <string>

#include "geotomo/geometry.hpp"

namespace geotomo {

/// Smooth transition: 1 for s <= lo, 0 for s >= hi, C-infinity in between.
double smooth_cutoff(double s, double lo, double hi);
/// d/ds of smooth_cutoff.
double smooth_cutoff_derivative(double s, double lo, double hi);

/// Positive scalar conductivity with an analytic gradient.
struct Conductivity {
  /// "smooth" or "cusp".
  std::string tag = "smooth";
  /// Cusp exponent beta - 3/2 for cusp conductivities.
  double eta_prime = 0.0;
  std::function<double(const Vec&)> value;
  std::function<Vec(const Vec&)> gradient;
  /// Ball containing supp(gamma - 1); negative radius when unknown.
  Vec support_center;
  double support_radius = -1.0;

  double operator()(const Vec& x) const { return value(x); }
  Vec grad(const Vec& x) const { return gradient(x); }
};

Conductivity constant_conductivity(double c = 1.0, int dim = 3);

/// 1 + amplitude * exp(1 - 1 / (1 - s^2)), s = |x - center| / radius.
Conductivity bump_conductivity(const Vec& center, double radius, double amplitude);

/// 1 + kappa |x - x0|^beta chi(|x - x0| / R) with chi = 1 on [0, 1/2], 0 on [1, inf).
Conductivity cusp_conductivity(const Vec& x0, double kappa, double beta, double R);

/// 1 + kappa d^beta chi(|x - p| / R) with d = face - x_axis clipped at 0:
/// a cusp along the face {x_axis = face} of a box lying below it.  Trace
/// 1 and normal derivative 0 on the face.
Conductivity face_cusp_conductivity(int axis, double face, const Vec& p, double kappa, double beta,
                                    double R);

/// a(x) b(x).
Conductivity product(const Conductivity& a, const Conductivity& b);

/// x -> gamma(-x_1, x').
Conductivity reflect_x1(const Conductivity& a);

/// Profile depending on x_1 only.
Conductivity layered_conductivity(std::function<double(double)> profile,
                                  std::function<double(double)> derivative, int dim = 3);

}  // namespace geotomo
