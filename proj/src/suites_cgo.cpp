#include <cmath>
#include <cstdio>

#include "geotomo/artifacts.hpp"
#include "geotomo/carleman.hpp"
#include "geotomo/cgo.hpp"
#include "geotomo/errors.hpp"
#include "geotomo/mollify.hpp"
#include "suites.hpp"

namespace geotomo::suites {

namespace {

Conductivity cusp(const ExperimentConfig& cfg) {
  return cusp_conductivity(vec3(0.02, -0.03, 0.01), 0.5, 1.5 + cfg.eta_prime, 0.45);
}

/// Samples of several reports side by side, one row per tau.
void write_rates_csv(Context& c, const std::string& name, const std::vector<RateReport>& reps) {
  if (reps.empty()) return;
  std::vector<std::string> cols{"tau"};
  for (const auto& r : reps) cols.push_back(r.quantity);
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < reps[0].samples.size(); ++i) {
    std::vector<double> row{reps[0].samples[i].first};
    for (const auto& r : reps) row.push_back(i < r.samples.size() ? r.samples[i].second : std::nan(""));
    rows.push_back(row);
  }
  for (auto& col : cols)
    for (auto& ch : col)
      if (ch == ',') ch = ';';
  write_csv(c.path(name + ".csv"), cols, rows);
  write_rate_json(c.path(name + "_rates.json"), reps);
  write_gnuplot(c.path(name + ".gp"), c.rep.suite + "_" + name + ".csv", name, cols, true);
}

std::string tau_label(double tau) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", tau);
  return buf;
}

}  // namespace

void mollify(Context& c) {
  const MollifiedFamily family(cusp(c.cfg), c.cfg.eta);
  const auto reps = mollifier_rate_reports(family, c.cfg.mollify_ladder.values(), c.cfg.tol.rate_slack);
  for (const auto& r : reps) add_rate(c, r);
  write_rates_csv(c, "norms", reps);
}

void g0(Context& c) {
  const SpectralBox box;
  std::vector<RateReport> reps;
  for (int s = 0; s <= 2; ++s) {
    std::vector<std::pair<double, double>> samples;
    int skipped = 0;
    for (double tau : c.cfg.g0_ladder.values()) {
      try {
        samples.emplace_back(tau, g0_operator_norm(box, tau, s));
      } catch (const ExceptionalTauError&) {
        ++skipped;
      }
    }
    RateReport r = make_rate_report("G0 norm L2 to H^" + std::to_string(s), samples, -1.0 + s,
                                    c.cfg.tol.g0_slack, 1e-14, false);
    r.pass = r.pass && std::abs(r.slope - r.target) <= r.slack;
    if (skipped) r.note += "skipped " + std::to_string(skipped) + " exceptional tau";
    add_rate(c, r);
    reps.push_back(r);
  }
  write_rates_csv(c, "norms", reps);
}

void cgo(Context& c) {
  const MollifiedFamily family(cusp(c.cfg), c.cfg.eta);
  CGOParams p;
  p.eta = c.cfg.eta;
  p.lambda = c.cfg.lambdas.front();
  const auto ladder = c.cfg.cgo_ladder.values();
  const CGOLadder lad = cgo_ladder(p, family, ladder);
  add_rate(c, lad.remainder);

  std::vector<std::vector<double>> rows;
  for (const auto& pt : lad.points) {
    check_below(c, "weak residual within discretization error at tau " + tau_label(pt.tau),
                pt.weak_residual, pt.discretization);
    check_below(c, "Neumann series contraction at tau " + tau_label(pt.tau), pt.k_norm, 1.0);
    rows.push_back({pt.tau, pt.r_l2, pt.r_h1, pt.r_h2, pt.weak_residual, pt.weak_residual_coarse,
                    pt.discretization, pt.k_norm});
  }
  const std::vector<std::string> cols{"tau", "r_l2", "r_h1", "r_h2", "weak_residual", "weak_residual_coarse",
                                      "discretization", "k_norm"};
  write_csv(c.path("ladder.csv"), cols, rows);
  write_gnuplot(c.path("ladder.gp"), c.rep.suite + "_ladder.csv", "CGO remainder", cols, true);

  p.tau = ladder.front();
  write_cgo_csv(c.path("solution.csv"), build_cgo(p, family));
}

void carleman(Context& c) {
  const auto sample_at = [](const CarlemanGrid& g, const CarlemanTestFn& f, double tau) {
    return sample(g, [&](const Eigen::Vector3d& x) { return f(x, tau); });
  };

  // Generic members only: near-kernel ones have a vanishing identity.
  auto family = carleman_family(5, c.cfg.seed);
  family.resize(3);
  std::vector<std::vector<double>> rows;
  for (double tau : {2.0, 8.0}) {
    std::vector<std::pair<double, double>> errs;
    for (int n : c.cfg.grids.carleman_n) {
      const CarlemanGrid g{n};
      double worst = 0.0;
      for (const auto& f : family) {
        const DivergenceCheck d = divergence_identity_check(g, sample_at(g, f, tau), tau);
        worst = std::max({worst, d.rel_err, d.left_rel_err});
      }
      errs.emplace_back(1.0 / n, worst);
      rows.push_back({tau, static_cast<double>(n), worst});
    }
    const std::string at = " at tau " + tau_label(tau);
    check_below(c, "divergence identity two-route error" + at, errs.back().second, c.cfg.tol.carleman_identity);
    check_above(c, "divergence identity refinement order" + at, fit_slope(errs).slope, c.cfg.tol.refinement_order);
  }
  write_csv(c.path("identity_refinement.csv"), {"tau", "n", "rel_err"}, rows);

  const CarlemanConstants k = frozen_carleman_constants();
  int violations = 0;
  rows.clear();
  const auto members = carleman_family(20, c.cfg.seed);
  for (double tau : c.cfg.carleman_ladder.values()) {
    const CarlemanGrid g = carleman_grid_for(tau);
    for (std::size_t m = 0; m < members.size(); ++m) {
      const CarlemanReport r = estimate_check(g, sample_at(g, members[m], tau), tau, {}, k);
      violations += !r.pass;
      rows.push_back({tau, static_cast<double>(m), r.interior_lhs, r.boundary_sum(), r.rhs, r.slack});
    }
  }
  check_below(c, "estimate violations with frozen constants", violations, 0.0);
  write_csv(c.path("estimate.csv"), {"tau", "member", "interior_lhs", "boundary_sum", "rhs", "slack"}, rows,
            nlohmann::json{{"C", k.C}, {"C1", k.C1}, {"C2", k.C2}});
}

}  // namespace geotomo::suites
