#include "geotomo/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "geotomo/errors.hpp"

namespace geotomo {

Vec vec2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

Vec vec3(double a, double b, double c) {
  Vec v(3);
  v << a, b, c;
  return v;
}

double MetricChart::scale() const {
  if (domain.kind == DomainKind::Disc) return domain.radius;
  return (domain.hi - domain.lo).maxCoeff();
}

bool MetricChart::in_chart(const Vec& x) const {
  if (x.size() != dim || !x.allFinite()) return false;
  if (domain.kind == DomainKind::Disc) {
    return x.norm() <= domain.radius * (1.0 + domain.margin);
  }
  const Vec pad = domain.margin * (domain.hi - domain.lo);
  for (int i = 0; i < dim; ++i) {
    if (x(i) < domain.lo(i) - pad(i) || x(i) > domain.hi(i) + pad(i)) return false;
  }
  return true;
}

Mat MetricChart::metric(const Vec& x) const {
  if (!in_chart(x)) throw DomainError("point outside chart '" + id + "'");
  return g_eval(x);
}

namespace {

double disc_sdf(const Vec& x, double radius) { return x.norm() - radius; }

double box_sdf(const Vec& x, const Vec& lo, const Vec& hi) {
  double d = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < x.size(); ++i) {
    const double c = 0.5 * (lo(i) + hi(i));
    const double h = 0.5 * (hi(i) - lo(i));
    d = std::max(d, std::abs(x(i) - c) - h);
  }
  return d;
}

}  // namespace

MetricChart euclidean_disc(double radius, double margin) {
  MetricChart c;
  c.id = "euclidean_disc";
  c.dim = 2;
  c.domain.kind = DomainKind::Disc;
  c.domain.radius = radius;
  c.domain.margin = margin;
  c.g_eval = [](const Vec&) -> Mat { return Mat::Identity(2, 2); };
  c.boundary_sdf = [radius](const Vec& x) { return disc_sdf(x, radius); };
  return c;
}

MetricChart constant_curvature_disc(double curvature, double radius, double margin) {
  if (curvature < 0.0 && -curvature * std::pow(radius * (1.0 + margin), 2) >= 1.0) {
    throw DomainError("constant_curvature_disc: chart exceeds the hyperbolic model disc");
  }
  MetricChart c;
  c.id = "curvature_disc";
  c.dim = 2;
  c.domain.kind = DomainKind::Disc;
  c.domain.radius = radius;
  c.domain.margin = margin;
  c.g_eval = [curvature](const Vec& x) -> Mat {
    const double s = 2.0 / (1.0 + curvature * x.squaredNorm());
    return Mat::Identity(2, 2) * (s * s);
  };
  c.boundary_sdf = [radius](const Vec& x) { return disc_sdf(x, radius); };
  return c;
}

MetricChart spherical_cap(double chart_radius, double margin) {
  MetricChart c = constant_curvature_disc(1.0, chart_radius, margin);
  c.id = "spherical_cap";
  return c;
}

MetricChart conformal_cylinder(const Vec& lo, const Vec& hi, double margin) {
  MetricChart c;
  c.id = "conformal_cylinder";
  c.dim = 3;
  c.domain.kind = DomainKind::Box;
  c.domain.lo = lo;
  c.domain.hi = hi;
  c.domain.margin = margin;
  c.g_eval = [](const Vec& x) -> Mat { return Mat::Identity(3, 3) * std::exp(2.0 * x(0)); };
  c.boundary_sdf = [lo, hi](const Vec& x) { return box_sdf(x, lo, hi); };
  return c;
}

MetricChart product_cylinder(const MetricChart& base, double x1_lo, double x1_hi) {
  if (base.dim != 2 || base.domain.kind != DomainKind::Disc) {
    throw DomainError("product_cylinder: base must be a 2D disc chart");
  }
  MetricChart c;
  c.id = "cylinder_" + base.id;
  c.dim = 3;
  c.domain.kind = DomainKind::Box;
  const double r = base.domain.radius;
  c.domain.lo = vec3(x1_lo, -r, -r);
  c.domain.hi = vec3(x1_hi, r, r);
  c.domain.margin = base.domain.margin;
  auto g0 = base.g_eval;
  c.g_eval = [g0](const Vec& x) -> Mat {
    Mat g = Mat::Zero(3, 3);
    g(0, 0) = 1.0;
    g.bottomRightCorner(2, 2) = g0(vec2(x(1), x(2)));
    return g;
  };
  c.boundary_sdf = [x1_lo, x1_hi, r](const Vec& x) {
    const double axial = std::abs(x(0) - 0.5 * (x1_lo + x1_hi)) - 0.5 * (x1_hi - x1_lo);
    return std::max(axial, std::hypot(x(1), x(2)) - r);
  };
  return c;
}

Christoffel christoffel(const MetricChart& chart, const Vec& x) {
  if (!chart.in_chart(x)) throw DomainError("christoffel: point outside chart '" + chart.id + "'");
  const int n = chart.dim;
  const double h = 1e-5 * chart.scale();
  std::array<Mat, 3> dg;
  for (int k = 0; k < n; ++k) {
    Vec xp = x, xm = x;
    xp(k) += h;
    xm(k) -= h;
    dg[k] = (chart.g_eval(xp) - chart.g_eval(xm)) / (2.0 * h);
  }
  const Mat ginv = chart.g_eval(x).inverse();
  Christoffel gamma;
  gamma.dim = n;
  for (int k = 0; k < n; ++k) {
    for (int i = 0; i < n; ++i) {
      for (int j = i; j < n; ++j) {
        double s = 0.0;
        for (int l = 0; l < n; ++l) {
          s += ginv(k, l) * (dg[i](l, j) + dg[j](l, i) - dg[l](i, j));
        }
        gamma(k, i, j) = 0.5 * s;
        gamma(k, j, i) = 0.5 * s;
      }
    }
  }
  return gamma;
}

Vec geodesic_acceleration(const MetricChart& chart, const Vec& x, const Vec& xi) {
  const Christoffel gamma = christoffel(chart, x);
  const int n = chart.dim;
  Vec a = Vec::Zero(n);
  for (int k = 0; k < n; ++k) {
    double s = 0.0;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) s += gamma(k, i, j) * xi(i) * xi(j);
    }
    a(k) = -s;
  }
  return a;
}

double inner_g(const MetricChart& chart, const Vec& x, const Vec& u, const Vec& v) {
  return u.dot(chart.g_eval(x) * v);
}

double norm_g(const MetricChart& chart, const Vec& x, const Vec& v) {
  return std::sqrt(inner_g(chart, x, v, v));
}

PhaseState normalized(const MetricChart& chart, PhaseState s) {
  const double n = norm_g(chart, s.x, s.xi);
  if (!(n > 0.0)) throw DomainError("normalized: zero direction");
  s.xi /= n;
  return s;
}

std::vector<Vec> orthonormal_frame(const MetricChart& chart, const Vec& x) {
  const Mat g = chart.g_eval(x);
  std::vector<Vec> frame;
  for (int a = 0; a < chart.dim; ++a) {
    Vec e = Vec::Zero(chart.dim);
    e(a) = 1.0;
    for (const Vec& f : frame) e -= f.dot(g * e) * f;
    e /= std::sqrt(e.dot(g * e));
    frame.push_back(e);
  }
  return frame;
}

Vec outward_normal(const MetricChart& chart, const Vec& x) {
  const int n = chart.dim;
  const double h = 1e-6 * chart.scale();
  Vec grad(n);
  for (int k = 0; k < n; ++k) {
    Vec xp = x, xm = x;
    xp(k) += h;
    xm(k) -= h;
    grad(k) = (chart.sdf(xp) - chart.sdf(xm)) / (2.0 * h);
  }
  const Mat ginv = chart.g_eval(x).inverse();
  Vec nu = ginv * grad;
  return nu / std::sqrt(grad.dot(nu));
}

PhaseState rk4_step(const MetricChart& chart, const PhaseState& s, double h) {
  auto accel = [&](const Vec& x, const Vec& xi) { return geodesic_acceleration(chart, x, xi); };
  const Vec k1x = s.xi;
  const Vec k1v = accel(s.x, s.xi);
  const Vec x2 = s.x + 0.5 * h * k1x, v2 = s.xi + 0.5 * h * k1v;
  const Vec k2x = v2;
  const Vec k2v = accel(x2, v2);
  const Vec x3 = s.x + 0.5 * h * k2x, v3 = s.xi + 0.5 * h * k2v;
  const Vec k3x = v3;
  const Vec k3v = accel(x3, v3);
  const Vec x4 = s.x + h * k3x, v4 = s.xi + h * k3v;
  const Vec k4x = v4;
  const Vec k4v = accel(x4, v4);
  PhaseState out;
  out.x = s.x + (h / 6.0) * (k1x + 2.0 * k2x + 2.0 * k3x + k4x);
  out.xi = s.xi + (h / 6.0) * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
  return out;
}

GeodesicTrace geodesic_trace(const MetricChart& chart, const PhaseState& start,
                             const TraceOptions& opts) {
  if (!(opts.step > 0.0)) throw DomainError("geodesic_trace: step must be positive");
  if (!chart.in_chart(start.x) || chart.sdf(start.x) > 1e-8 * chart.scale()) {
    throw DomainError("geodesic_trace: start point outside M0");
  }
  const double budget = opts.max_time > 0.0 ? opts.max_time : 50.0 * chart.scale();
  GeodesicTrace trace;
  PhaseState s = normalized(chart, start);
  double t = 0.0;
  if (opts.keep_samples) trace.samples.push_back({t, s.x, s.xi});

  while (true) {
    if (t > budget) {
      throw TrappedGeodesicError("geodesic_trace: no exit within time budget on chart '" +
                                 chart.id + "'");
    }
    PhaseState next = normalized(chart, rk4_step(chart, s, opts.step));
    if (chart.sdf(next.x) > 0.0) {
      double lo = 0.0, hi = opts.step;
      PhaseState at_hi = next;
      while (hi - lo > 1e-13) {
        const double mid = 0.5 * (lo + hi);
        PhaseState m = rk4_step(chart, s, mid);
        const double f = chart.sdf(m.x);
        if (f > 0.0) {
          hi = mid;
          at_hi = m;
        } else {
          lo = mid;
        }
        if (std::abs(f) <= opts.exit_tolerance && f <= 0.0) break;
      }
      // Take the inside endpoint unless the outside one is within tolerance.
      PhaseState m = rk4_step(chart, s, lo);
      if (std::abs(chart.sdf(at_hi.x)) < std::abs(chart.sdf(m.x))) {
        m = at_hi;
        lo = hi;
      }
      m = normalized(chart, m);
      trace.exit_time = t + lo;
      trace.exit_point = m.x;
      trace.exit_direction = m.xi;
      if (opts.keep_samples) trace.samples.push_back({trace.exit_time, m.x, m.xi});
      return trace;
    }
    s = next;
    t += opts.step;
    if (opts.keep_samples) trace.samples.push_back({t, s.x, s.xi});
  }
}

Vec direction_from_angle(const MetricChart& chart, const Vec& omega, double theta) {
  const auto frame = orthonormal_frame(chart, omega);
  return std::cos(theta) * frame[0] + std::sin(theta) * frame[1];
}

namespace {

PhaseState shoot(const MetricChart& chart, const Vec& omega, double r, const Vec& direction,
                 double step) {
  if (!chart.in_chart(omega)) throw DomainError("exp_map: base point outside chart");
  if (r < 0.0) throw RangeError("exp_map: negative radius");
  PhaseState s = normalized(chart, {omega, direction});
  if (r == 0.0) return s;
  const int n = std::max(1, static_cast<int>(std::ceil(r / step)));
  const double h = r / n;
  for (int i = 0; i < n; ++i) {
    try {
      s = rk4_step(chart, s, h);
    } catch (const DomainError&) {
      throw RangeError("exp_map: geodesic left the enlarged chart before arc length r");
    }
    if (!chart.in_chart(s.x)) {
      throw RangeError("exp_map: geodesic left the enlarged chart before arc length r");
    }
    s = normalized(chart, s);
  }
  return s;
}

}  // namespace

Vec exp_map(const MetricChart& chart, const Vec& omega, double r, const Vec& direction,
            double step) {
  return shoot(chart, omega, r, direction, step).x;
}

Vec exp_map(const MetricChart& chart, const Vec& omega, double r, double theta, double step) {
  return exp_map(chart, omega, r, direction_from_angle(chart, omega, theta), step);
}

double polar_metric_det(const MetricChart& chart, const Vec& omega, double r, double theta,
                        double step) {
  const double d = 1e-5;
  const Vec xp = exp_map(chart, omega, r, theta + d, step);
  const Vec xm = exp_map(chart, omega, r, theta - d, step);
  const Vec x = exp_map(chart, omega, r, theta, step);
  const Vec dtheta = (xp - xm) / (2.0 * d);
  return inner_g(chart, x, dtheta, dtheta);
}

PolarPoint polar_coords(const MetricChart& chart, const Vec& omega, const Vec& x, double step,
                        double tol) {
  if (chart.dim != 2) throw DomainError("polar_coords: 2D charts only");
  const auto frame = orthonormal_frame(chart, omega);
  const Mat g0 = chart.g_eval(omega);
  const Vec v = x - omega;
  PolarPoint p;
  p.r = std::sqrt(v.dot(g0 * v));
  p.theta = std::atan2(frame[1].dot(g0 * v), frame[0].dot(g0 * v));
  if (p.r == 0.0) return p;

  auto endpoint = [&](double r, double theta) {
    return shoot(chart, omega, r, direction_from_angle(chart, omega, theta), step);
  };
  PhaseState end = endpoint(p.r, p.theta);
  Vec res = end.x - x;
  const double d = 1e-7;
  for (p.iterations = 0; p.iterations < 50; ++p.iterations) {
    p.residual = res.norm();
    if (p.residual <= tol * chart.scale()) break;
    Eigen::Matrix2d jac;
    jac.col(0) = end.xi;
    jac.col(1) = (endpoint(p.r, p.theta + d).x - end.x) / d;
    const Eigen::Vector2d delta = jac.fullPivLu().solve(-Eigen::Vector2d(res(0), res(1)));
    double damping = 1.0;
    bool improved = false;
    for (int k = 0; k < 20; ++k) {
      const double r_new = std::max(1e-12, p.r + damping * delta(0));
      const double th_new = p.theta + damping * delta(1);
      try {
        PhaseState trial = endpoint(r_new, th_new);
        const Vec trial_res = trial.x - x;
        if (trial_res.norm() < p.residual) {
          p.r = r_new;
          p.theta = th_new;
          end = trial;
          res = trial_res;
          improved = true;
          break;
        }
      } catch (const RangeError&) {
      }
      damping *= 0.5;
    }
    if (!improved) break;
  }
  p.residual = res.norm();
  if (p.residual > tol * chart.scale() * 10.0) {
    throw NonconvergenceError("polar_coords: shooting did not converge", p.residual);
  }
  p.theta = std::remainder(p.theta, 2.0 * std::numbers::pi);
  if (p.theta < 0.0) p.theta += 2.0 * std::numbers::pi;
  p.det_g0 = polar_metric_det(chart, omega, p.r, p.theta, step);
  return p;
}

SimplicityReport simplicity_check(const MetricChart& chart, int n_samples) {
  if (chart.dim != 2 || chart.domain.kind != DomainKind::Disc) {
    throw DomainError("simplicity_check: 2D disc charts only");
  }
  SimplicityReport rep;
  const double R = chart.domain.radius;
  rep.min_second_fundamental_form = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n_samples; ++i) {
    const double psi = 2.0 * std::numbers::pi * i / n_samples;
    const Vec p = vec2(R * std::cos(psi), R * std::sin(psi));
    const Vec dc = vec2(-R * std::sin(psi), R * std::cos(psi));
    const Vec ddc = -p;
    const Vec accel = ddc - geodesic_acceleration(chart, p, dc);
    const Vec nu = outward_normal(chart, p);
    const double kappa = -inner_g(chart, p, accel, nu) / inner_g(chart, p, dc, dc);
    rep.min_second_fundamental_form = std::min(rep.min_second_fundamental_form, kappa);
  }

  const int n_angles = std::max(3, n_samples / 2);
  const double delta = 1e-4;
  const double step = 0.01 * chart.scale();
  for (int i = 0; i < n_samples && !rep.trapped; ++i) {
    const double psi = 2.0 * std::numbers::pi * i / n_samples;
    const Vec p = vec2(R * std::cos(psi), R * std::sin(psi));
    const Vec nu = outward_normal(chart, p);
    const auto frame = orthonormal_frame(chart, p);
    Vec tangent = frame[0] - inner_g(chart, p, frame[0], nu) * nu;
    if (tangent.norm() < 1e-8) tangent = frame[1] - inner_g(chart, p, frame[1], nu) * nu;
    tangent /= norm_g(chart, p, tangent);
    for (int j = 0; j < n_angles; ++j) {
      const double alpha = -0.5 * std::numbers::pi + std::numbers::pi * (j + 0.5) / n_angles;
      auto dir = [&](double a) { return Vec(-std::cos(a) * nu + std::sin(a) * tangent); };
      GeodesicTrace tr;
      try {
        TraceOptions opts;
        opts.step = step;
        opts.keep_samples = false;
        tr = geodesic_trace(chart, {p, dir(alpha)}, opts);
      } catch (const TrappedGeodesicError&) {
        rep.trapped = true;
        break;
      }
      rep.max_exit_time = std::max(rep.max_exit_time, tr.exit_time);
      // Jacobi field from varying the initial angle; a sign change of its
      // normal component marks a conjugate point.
      PhaseState c = normalized(chart, {p, dir(alpha)});
      PhaseState a = normalized(chart, {p, dir(alpha + delta)});
      PhaseState b = normalized(chart, {p, dir(alpha - delta)});
      const int steps = static_cast<int>(tr.exit_time / step);
      double initial_sign = 0.0;
      for (int k = 1; k <= steps; ++k) {
        c = normalized(chart, rk4_step(chart, c, step));
        a = normalized(chart, rk4_step(chart, a, step));
        b = normalized(chart, rk4_step(chart, b, step));
        if (!chart.in_chart(a.x) || !chart.in_chart(b.x)) break;
        const Vec J = (a.x - b.x) / (2.0 * delta);
        const Mat g = chart.g_eval(c.x);
        Vec normal = vec2(-c.xi(1), c.xi(0));
        normal -= normal.dot(g * c.xi) * c.xi;
        const double perp = J.dot(g * normal);
        if (k == 2) initial_sign = perp > 0.0 ? 1.0 : -1.0;
        if (k > 2 && perp * initial_sign <= 0.0) {
          rep.conjugate_points = true;
          break;
        }
      }
    }
  }
  rep.pass = rep.min_second_fundamental_form > 0.0 && !rep.conjugate_points && !rep.trapped;
  return rep;
}

}  // namespace geotomo
