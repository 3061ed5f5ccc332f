#include <cmath>
#include <numbers>
#include <random>

#include "geotomo/artifacts.hpp"
#include "geotomo/ray_transform.hpp"
#include "geotomo/sphere_bundle.hpp"
#include "suites.hpp"

namespace geotomo::suites {

namespace {

constexpr double kPi = std::numbers::pi;

Vec boundary_point(double R, double theta) { return vec2(R * std::cos(theta), R * std::sin(theta)); }

std::function<double(const Vec&)> c2_bump(double cx, double cy, double a) {
  return [=](const Vec& x) {
    const double s = ((x(0) - cx) * (x(0) - cx) + (x(1) - cy) * (x(1) - cy)) / (a * a);
    return s < 1.0 ? std::pow(1.0 - s, 3) : 0.0;
  };
}

InteriorField masked(const RayTransform& T, InteriorField f) {
  for (int i = 0; i < f.values.size(); ++i)
    if (!T.mask()[static_cast<std::size_t>(i)]) f.values[i] = 0.0;
  return f;
}

double relative_error(const RayTransform& T, const InteriorField& a, const InteriorField& b) {
  InteriorField d = a;
  d.values -= b.values;
  return std::sqrt(T.inner_interior(d, d) / T.inner_interior(b, b));
}

}  // namespace

void geometry(Context& c) {
  const MetricChart chart = make_chart(c.cfg.chart);
  const double R = chart.domain.radius;

  std::mt19937 rng(c.cfg.seed);
  std::uniform_real_distribution<double> u(-0.6, 0.6);
  double asym = 0.0, magnitude = 0.0;
  for (int s = 0; s < 20; ++s) {
    const Christoffel G = christoffel(chart, vec2(u(rng) * R, u(rng) * R));
    for (int k = 0; k < 2; ++k)
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
          asym = std::max(asym, std::abs(G(k, i, j) - G(k, j, i)));
          magnitude = std::max(magnitude, std::abs(G(k, i, j)));
        }
  }
  check_below(c, "christoffel symmetry", asym, 1e-12);
  if (c.cfg.chart.kind == "disc") check_below(c, "christoffel flat", magnitude, 1e-12);

  const SimplicityReport simple = simplicity_check(chart, 32);
  check_above(c, "boundary second fundamental form", simple.min_second_fundamental_form, 0.0);
  check_near(c, "simplicity", simple.pass ? 1.0 : 0.0, 1.0, 0.0);

  std::vector<std::vector<double>> rows;
  double exit_sdf = 0.0, drift = 0.0, chord_err = 0.0;
  const int n_rays = 8;
  for (int r = 0; r < n_rays; ++r) {
    const double theta = 2.0 * kPi * r / n_rays;
    const double alpha = 0.9 * (r - 0.5 * n_rays) / n_rays;
    const Vec x0 = boundary_point(R, theta);
    const Vec dir = vec2(-std::cos(theta + alpha), -std::sin(theta + alpha));
    const GeodesicTrace tr = geodesic_trace(chart, normalized(chart, {x0, dir}));
    exit_sdf = std::max(exit_sdf, std::abs(chart.boundary_sdf(tr.exit_point)));
    for (const auto& s : tr.samples) {
      drift = std::max(drift, std::abs(norm_g(chart, s.x, s.xi) - 1.0));
      rows.push_back({static_cast<double>(r), s.t, s.x(0), s.x(1), s.xi(0), s.xi(1)});
    }
    if (c.cfg.chart.kind == "disc") chord_err = std::max(chord_err, std::abs(tr.exit_time - 2.0 * R * std::cos(alpha)));
  }
  check_below(c, "exit point on boundary", exit_sdf, 1e-9);
  check_below(c, "unit speed drift", drift, 1e-8);
  if (c.cfg.chart.kind == "disc") check_below(c, "euclidean chord length", chord_err, 1e-9);

  write_csv(c.path("traces.csv"), {"ray", "t", "x", "y", "xi1", "xi2"}, rows);
  write_text(c.path("traces.gp"),
             "set datafile separator ','\nset size ratio -1\nset terminal pngcairo size 700,700\n"
             "set output '" + c.rep.suite + "_traces.png'\nplot '" + c.rep.suite +
                 "_traces.csv' using 3:4 every ::1 with lines title 'geodesics'\n");
}

void santalo(Context& c) {
  const MetricChart chart = make_chart(c.cfg.chart);
  const double R = chart.domain.radius;
  const auto& g = c.cfg.grids;
  const BundleQuadrature quad = build_bundle_quadrature(chart, g.santalo_boundary, g.santalo_angles, 24, 48, 24);

  const auto one = [](const Vec&, const Vec&) { return 1.0; };
  const SantaloResult r1 = santalo_check(chart, one, quad);
  const double closed = c.cfg.chart.kind == "disc" ? 2.0 * kPi * kPi * R * R : r1.lhs;
  check_below(c, "F=1 against sphere bundle volume", std::abs(r1.rhs - closed) / closed, c.cfg.tol.santalo);

  const auto radial = [R](const Vec& x, const Vec&) { return std::exp(-4.0 * x.squaredNorm() / (R * R)); };
  const SantaloResult r2 = santalo_check(chart, radial, quad);
  check_below(c, "radial gaussian against product quadrature", r2.rel_err, c.cfg.tol.santalo);

  const auto aniso = [R](const Vec& x, const Vec& xi) {
    return std::exp(-3.0 * (x / R - vec2(0.1, -0.2)).squaredNorm()) * (1.0 + 0.5 * xi(0) * xi(0));
  };
  const SantaloResult r3 = santalo_check(chart, aniso, quad);
  check_below(c, "anisotropic field against product quadrature", r3.rel_err, c.cfg.tol.santalo);

  std::vector<std::vector<double>> rows;
  for (const auto& s : quad.influx.samples) rows.push_back({s.psi, s.alpha, s.mu, s.weight, s.base(0), s.base(1)});
  write_csv(c.path("influx_quadrature.csv"), {"psi", "alpha", "mu", "weight", "x", "y"}, rows);
  rows.clear();
  for (std::size_t i = 0; i < quad.interior_points.size(); ++i)
    rows.push_back({quad.interior_points[i](0), quad.interior_points[i](1), quad.interior_weights[i]});
  write_csv(c.path("interior_quadrature.csv"), {"x", "y", "weight"}, rows);
}

void raytransform(Context& c) {
  const MetricChart chart = make_chart(c.cfg.chart);
  const double R = chart.domain.radius;
  const auto& g = c.cfg.grids;
  const RayTransform T(chart, GridSpec{g.ray_m, R}, build_influx(chart, g.ray_rays, g.ray_rays));
  std::mt19937 rng(c.cfg.seed);
  std::uniform_real_distribution<double> cen(-0.4, 0.4), wid(0.35, 0.6), amp(-0.5, 0.5);

  double worst_gap = 0.0;
  for (int p = 0; p < 10; ++p) {
    const auto b1 = c2_bump(cen(rng) * R, cen(rng) * R, wid(rng) * R);
    const auto b2 = c2_bump(cen(rng) * R, cen(rng) * R, wid(rng) * R);
    const double a = amp(rng), a1 = amp(rng), a2 = amp(rng), a3 = amp(rng);
    const auto f = masked(T, sample_field(T.grid(), [&](const Vec& x) { return b1(x) * (1.0 + a * x(0) / R) + a1 * b2(x); }));
    BoundaryFunction h;
    for (const auto& s : T.influx().samples)
      h.values.push_back((1.0 + a2 * std::cos(s.psi) + 0.3 * std::sin(2.0 * s.psi)) * (1.0 + a3 * std::sin(s.alpha)));
    for (double lambda : c.cfg.lambdas) {
      const double lhs = T.inner_boundary(T.forward(f, lambda), h);
      const double rhs = T.inner_interior(f, T.adjoint(h, lambda, 64));
      const double scale = std::sqrt(T.inner_interior(f, f) * T.inner_boundary(h, h));
      worst_gap = std::max(worst_gap, std::abs(lhs - rhs) / scale);
    }
  }
  check_below(c, "adjointness gap (10 pairs, all lambda)", worst_gap, c.cfg.tol.adjoint);

  std::vector<double> admissible;
  for (double l : c.cfg.lambdas)
    if (std::abs(l) <= T.options().lambda_max) admissible.push_back(l);
  double worst_inv = 0.0;
  InteriorField shown_truth, shown_rec;
  double shown_lambda = 0.0;
  for (int k = 0; k < 10 && !admissible.empty(); ++k) {
    const auto f = masked(T, sample_field(T.grid(), c2_bump(cen(rng) * R, cen(rng) * R, wid(rng) * R)));
    const double lambda = admissible[static_cast<std::size_t>(k) % admissible.size()];
    const auto res = T.invert_normal(T.normal_apply(f, lambda), lambda, 1e-8, 500);
    worst_inv = std::max(worst_inv, relative_error(T, res.field, f));
    if (k == 0) {
      shown_truth = f;
      shown_rec = res.field;
      shown_lambda = lambda;
    }
  }
  check_below(c, "inversion relative L2 error (10 bumps)", worst_inv, c.cfg.tol.inversion);

  const auto f_fn = c2_bump(0.2 * R, -0.1 * R, 0.5 * R);
  std::vector<double> errors;
  for (int m : g.ray_refinement) {
    const RayTransform Tm(chart, GridSpec{m, R}, build_influx(chart, 3 * m, 3 * m));
    const auto data = Tm.discrete_adjoint(Tm.forward_exact(f_fn, 0.05), 0.05);
    const auto res = Tm.invert_normal(data, 0.05, 1e-8, 500);
    errors.push_back(relative_error(Tm, res.field, masked(Tm, sample_field(Tm.grid(), f_fn))));
  }
  int increases = 0;
  for (std::size_t i = 1; i < errors.size(); ++i) increases += errors[i] >= errors[i - 1];
  check_below(c, "inversion error increases under refinement", increases, 0.0);
  check_below(c, "inversion error at finest grid", errors.back(), c.cfg.tol.inversion);

  std::vector<std::vector<double>> rows;
  for (int i = 0; i < shown_truth.values.size(); ++i) {
    if (!T.mask()[static_cast<std::size_t>(i)]) continue;
    const Vec x = T.grid().point(i);
    rows.push_back({x(0), x(1), shown_truth.values[i], shown_rec.values[i]});
  }
  const nlohmann::json header = {{"grid", T.grid().m}, {"radius", R}, {"lambda", shown_lambda}, {"chart", chart.id}};
  write_csv(c.path("inversion_field.csv"), {"x", "y", "truth", "recovered"}, rows, header);
  rows.clear();
  for (std::size_t i = 0; i < errors.size(); ++i) rows.push_back({static_cast<double>(g.ray_refinement[i]), errors[i]});
  write_csv(c.path("refinement.csv"), {"m", "rel_error"}, rows);
  write_gnuplot(c.path("refinement.gp"), c.rep.suite + "_refinement.csv", "inversion error", {"m", "rel_error"}, true);
}

}  // namespace geotomo::suites
