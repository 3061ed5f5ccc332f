#include <cmath>

#include "geotomo/artifacts.hpp"
#include "geotomo/forward.hpp"
#include "suites.hpp"

namespace geotomo::suites {

namespace {

FemGrid grid_of(int n) {
  FemGrid g;
  g.n = n;
  return g;
}

Conductivity smooth_one() { return bump_conductivity(vec3(0.05, 0.05, -0.05), 0.45, 0.4); }
Conductivity smooth_two() { return bump_conductivity(vec3(-0.05, 0.0, 0.05), 0.45, -0.25); }

double data_one(const Eigen::Vector3d& x) { return std::exp(2 * x(0)) * std::cos(2 * x(1)) + 0.5 * x(2); }
double data_two(const Eigen::Vector3d& x) { return std::exp(1.5 * x(1)) * std::cos(1.5 * x(2)) + x(0); }

}  // namespace

void forward(Context& c) {
  const auto& g = c.cfg.grids;
  const auto& tol = c.cfg.tol;

  const DNMap dn = dn_map(ConductivitySolver(grid_of(g.dn_n), smooth_one()), c.cfg.epsilon);
  check_below(c, "DN map symmetry", dn.symmetry_error(10, c.cfg.seed), tol.dn_symmetry);
  check_below(c, "DN map total flux", dn.total_flux_error(10, c.cfg.seed + 1), tol.dn_symmetry);
  write_dn_csv(dn, c.path("dn_map.csv"), c.path("dn_manifest.json"));

  const DNMap other = dn_map(
      ConductivitySolver(grid_of(g.dn_n), product(smooth_one(), bump_conductivity(vec3(0.1, -0.1, 0.0), 0.3, 0.2))),
      c.cfg.epsilon);
  check_below(c, "partial data residual, identical maps", partial_data_residual(dn, dn, c.cfg.epsilon), 0.0);
  const double scale = Eigen::JacobiSVD<Eigen::MatrixXd>(dn.matrix).singularValues()(0);
  check_above(c, "partial data residual, distinct maps (relative)",
              partial_data_residual(dn, other, c.cfg.epsilon) / scale, 1e-8);

  std::vector<std::pair<double, double>> errs;
  std::vector<std::vector<double>> rows;
  for (int n : g.fem_n) {
    const AlessandriniReport r = alessandrini_check(grid_of(n), smooth_one(), smooth_two(), data_one, data_two);
    errs.emplace_back(1.0 / n, r.rel_err);
    rows.push_back({static_cast<double>(n), r.lhs, r.rhs, r.rel_err});
  }
  check_below(c, "integral identity lhs/rhs relative error", errs.back().second, tol.alessandrini);
  check_above(c, "integral identity refinement order", fit_slope(errs).slope, tol.refinement_order);
  write_csv(c.path("identity.csv"), {"n", "lhs", "rhs", "rel_err"}, rows);
  write_gnuplot(c.path("identity.gp"), c.rep.suite + "_identity.csv", "integral identity", {"n", "rel_err"}, true);

  const FemGrid lq_grid = grid_of(g.log_quotient_n);
  const LogQuotientReport lq = log_quotient_pde_residual(lq_grid, smooth_one(), smooth_two());
  check_below(c, "log quotient route agreement", lq.agreement, tol.log_quotient);
  rows.clear();
  {
    Eigen::Index k = 0;
    for (std::size_t i = 0; i < lq_grid.size(); ++i) {
      if (lq_grid.on_boundary(i)) continue;
      const Eigen::Vector3d x = lq_grid.point(i);
      rows.push_back({x(0), x(1), x(2), lq.from_logs(k), lq.from_divergence(k)});
      ++k;
    }
  }
  write_csv(c.path("log_quotient_field.csv"), {"x1", "x2", "x3", "from_logs", "from_divergence"}, rows,
            nlohmann::json{{"grid", g.log_quotient_n}, {"box", {-0.5, 0.5}}, {"agreement", lq.agreement}});

  const ConformalReport cr = conformal_reduction_check(
      grid_of(g.conformal_n), [](const Eigen::Vector3d& x) { return std::exp(2.0 * x(0)); }, smooth_one(), data_one);
  check_below(c, "conformal flux ratio against c^-1/2", cr.flux_ratio_err, tol.conformal);
  check_below(c, "conformal operator identity", cr.operator_identity_err, tol.conformal);

  const Conductivity g1 = face_cusp_conductivity(1, 0.5, vec3(0.15, 0.5, 0.0), 0.8, 1.5 + c.cfg.eta_prime, 0.3);
  BoundaryProbeOptions opt;
  opt.params.eta = c.cfg.eta;
  opt.epsilon = c.cfg.epsilon;
  opt.slack = tol.probe_slack;
  const BoundaryProbeReport probe = boundary_term_probe(g1, reflect_x1(g1), c.cfg.probe_ladder.values(), opt);
  const RateReport& integral = probe.integral;
  add_rate(c, integral);
  add_rate(c, probe.claim_value);
  add_rate(c, probe.claim_gradient);
  rows.clear();
  for (const auto& p : probe.points)
    rows.push_back({p.tau, p.via_identity.real(), p.via_identity.imag(), p.direct_fem.real(), p.direct_fem.imag(),
                    p.delta_u, p.grad_delta_u});
  const std::vector<std::string> cols{"tau", "re_identity", "im_identity", "re_fem", "im_fem", "delta_u", "grad_delta_u"};
  write_csv(c.path("probe.csv"), cols, rows);
  write_rate_json(c.path("probe_rates.json"), {integral, probe.claim_value, probe.claim_gradient});
}

void theorem2(Context& c) {
  const LogPolarReport r = logpolar_map(BallDomain{}, Eigen::Vector3d(0.1, -0.2, 0.0), c.cfg.grids.logpolar_boundary,
                                        c.cfg.epsilon);
  check_near(c, "partial boundary masks equal", r.masks_equal ? 1.0 : 0.0, 1.0, 0.0);
  check_below(c, "log-polar metric factorization", r.metric_err, 1e-8);
  check_below(c, "weight equals log distance", r.phi_err, 1e-14);
  check_above(c, "front set nonempty", static_cast<double>(r.minus_x.size()), 1.0);
  check_above(c, "back set nonempty", static_cast<double>(r.plus_x.size()), 1.0);

  std::vector<int> in_minus(r.x.size(), 0);
  for (int i : r.minus_x) in_minus[static_cast<std::size_t>(i)] = 1;
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < r.x.size(); ++i)
    rows.push_back({r.x[i](0), r.x[i](1), r.x[i](2), r.y[i](0), r.y[i](1), r.y[i](2), r.dphi_x(static_cast<Eigen::Index>(i)),
                    r.dphi_y(static_cast<Eigen::Index>(i)), static_cast<double>(in_minus[i])});
  write_csv(c.path("logpolar.csv"), {"x1", "x2", "x3", "y1", "y2", "y3", "dphi_x", "dphi_y", "minus"}, rows,
            nlohmann::json{{"epsilon", c.cfg.epsilon}, {"chart", r.chart.id}});
}

}  // namespace geotomo::suites
