#include "geotomo/sphere_bundle.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "geotomo/errors.hpp"
#include "geotomo/quadrature.hpp"

namespace geotomo {

namespace {

constexpr double kPi = std::numbers::pi;

void require_disc(const MetricChart& chart, const char* who) {
  if (chart.dim != 2 || chart.domain.kind != DomainKind::Disc) {
    throw DomainError(std::string(who) + ": 2D disc charts only");
  }
}

}  // namespace

std::pair<Vec, Vec> boundary_frame(const MetricChart& chart, const Vec& base) {
  const Vec nu = outward_normal(chart, base);
  Vec tangent = vec2(-base(1), base(0));
  tangent -= inner_g(chart, base, tangent, nu) * nu;
  tangent /= norm_g(chart, base, tangent);
  return {Vec(-nu), tangent};
}

std::pair<double, double> influx_coordinates(const MetricChart& chart, const Vec& base,
                                             const Vec& xi) {
  double psi = std::atan2(base(1), base(0));
  if (psi < 0.0) psi += 2.0 * kPi;
  const auto [e1, e2] = boundary_frame(chart, base);
  const double alpha = std::atan2(inner_g(chart, base, xi, e2), inner_g(chart, base, xi, e1));
  return {psi, alpha};
}

InfluxGrid build_influx(const MetricChart& chart, int n_boundary, int n_angles) {
  require_disc(chart, "build_influx");
  if (n_boundary < 1 || n_angles < 1) throw DomainError("build_influx: empty grid");
  const double R = chart.domain.radius;
  InfluxGrid grid;
  grid.n_boundary = n_boundary;
  grid.n_angles = n_angles;
  grid.samples.reserve(static_cast<std::size_t>(n_boundary) * n_angles);
  const double dpsi = 2.0 * kPi / n_boundary;
  const double dalpha = kPi / n_angles;
  for (int i = 0; i < n_boundary; ++i) {
    const double psi = dpsi * i;
    const Vec base = vec2(R * std::cos(psi), R * std::sin(psi));
    const Vec dbase = vec2(-R * std::sin(psi), R * std::cos(psi));
    const double arc = norm_g(chart, base, dbase) * dpsi;
    const auto [e1, e2] = boundary_frame(chart, base);
    for (int j = 0; j < n_angles; ++j) {
      InfluxSample s;
      s.base = base;
      s.psi = psi;
      s.alpha = -0.5 * kPi + dalpha * (j + 0.5);
      s.xi = std::cos(s.alpha) * e1 + std::sin(s.alpha) * e2;
      s.mu = std::max(0.0, std::cos(s.alpha));
      s.weight = arc * dalpha;
      grid.samples.push_back(s);
    }
  }
  return grid;
}

BundleQuadrature build_bundle_quadrature(const MetricChart& chart, int n_boundary, int n_angles,
                                         int n_radial, int n_polar, int n_fiber) {
  require_disc(chart, "build_bundle_quadrature");
  BundleQuadrature q;
  q.influx = build_influx(chart, n_boundary, n_angles);
  q.n_fiber = n_fiber;
  const QuadratureRule radial = gauss_legendre(n_radial, 0.0, chart.domain.radius);
  const double dpsi = 2.0 * kPi / n_polar;
  for (int a = 0; a < n_radial; ++a) {
    for (int b = 0; b < n_polar; ++b) {
      const double rho = radial.nodes[a];
      const double psi = dpsi * (b + 0.5);
      const Vec x = vec2(rho * std::cos(psi), rho * std::sin(psi));
      q.interior_points.push_back(x);
      q.interior_weights.push_back(radial.weights[a] * rho * dpsi *
                                   std::sqrt(chart.g_eval(x).determinant()));
    }
  }
  return q;
}

RayNodes ray_nodes(const GeodesicTrace& trace, double step) {
  RayNodes nodes;
  const double tau = trace.exit_time;
  if (!(tau > 0.0) || trace.samples.size() < 2) return nodes;
  const int n = std::max(2, 2 * static_cast<int>(std::ceil(tau / (2.0 * step))));
  const double h = tau / n;
  nodes.w = simpson_weights(n, h);
  nodes.t.resize(n + 1);
  nodes.x.resize(n + 1);
  nodes.xi.resize(n + 1);
  const auto& s = trace.samples;
  std::size_t k = 0;
  for (int j = 0; j <= n; ++j) {
    const double t = (j == n) ? tau : j * h;
    while (k + 2 < s.size() && s[k + 1].t < t) ++k;
    const double dt = s[k + 1].t - s[k].t;
    const double u = dt > 0.0 ? std::clamp((t - s[k].t) / dt, 0.0, 1.0) : 0.0;
    const double u2 = u * u, u3 = u2 * u;
    const double h00 = 2 * u3 - 3 * u2 + 1, h10 = u3 - 2 * u2 + u;
    const double h01 = -2 * u3 + 3 * u2, h11 = u3 - u2;
    const double d00 = 6 * u2 - 6 * u, d10 = 3 * u2 - 4 * u + 1;
    const double d01 = -6 * u2 + 6 * u, d11 = 3 * u2 - 2 * u;
    nodes.t[j] = t;
    nodes.x[j] = h00 * s[k].x + h10 * dt * s[k].xi + h01 * s[k + 1].x + h11 * dt * s[k + 1].xi;
    if (dt > 0.0) {
      nodes.xi[j] = (d00 * s[k].x + d10 * dt * s[k].xi + d01 * s[k + 1].x + d11 * dt * s[k + 1].xi) / dt;
    } else {
      nodes.xi[j] = s[k].xi;
    }
  }
  return nodes;
}

double bundle_integral(const MetricChart& chart, const BundleField& F, const BundleQuadrature& quad) {
  double total = 0.0;
  const double dtheta = 2.0 * kPi / quad.n_fiber;
  for (std::size_t p = 0; p < quad.interior_points.size(); ++p) {
    const Vec& x = quad.interior_points[p];
    const auto frame = orthonormal_frame(chart, x);
    double fiber = 0.0;
    for (int k = 0; k < quad.n_fiber; ++k) {
      const double theta = dtheta * k;
      fiber += F(x, Vec(std::cos(theta) * frame[0] + std::sin(theta) * frame[1]));
    }
    total += quad.interior_weights[p] * fiber * dtheta;
  }
  return total;
}

SantaloResult santalo_check(const MetricChart& chart, const BundleField& F,
                            const BundleQuadrature& quad, double step) {
  SantaloResult res;
  res.lhs = bundle_integral(chart, F, quad);
  const auto& samples = quad.influx.samples;
  std::vector<double> contrib(samples.size(), 0.0);
  parallel_for(samples.size(), [&](std::size_t i) {
    const InfluxSample& s = samples[i];
    if (s.mu <= 0.0) return;
    TraceOptions opts;
    opts.step = step;
    const GeodesicTrace tr = geodesic_trace(chart, {s.base, s.xi}, opts);
    const RayNodes nodes = ray_nodes(tr, step);
    double line = 0.0;
    for (std::size_t j = 0; j < nodes.t.size(); ++j) line += nodes.w[j] * F(nodes.x[j], nodes.xi[j]);
    contrib[i] = s.weight * s.mu * line;
  });
  for (double c : contrib) res.rhs += c;
  const double denom = std::max(std::abs(res.lhs), std::abs(res.rhs));
  res.rel_err = denom > 0.0 ? std::abs(res.lhs - res.rhs) / denom : 0.0;
  return res;
}

}  // namespace geotomo
