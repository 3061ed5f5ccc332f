#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "geotomo/cgo.hpp"
#include "geotomo/errors.hpp"
#include "geotomo/forward.hpp"
#include "geotomo/geometry.hpp"
#include "geotomo/harness.hpp"
#include "geotomo/sphere_bundle.hpp"

namespace py = pybind11;
using namespace geotomo;

namespace {

MetricChart chart_of(const std::string& kind, double radius, double curvature) {
  ChartSpec spec;
  spec.kind = kind;
  spec.radius = radius;
  spec.curvature = curvature;
  return make_chart(spec);
}

}  // namespace

PYBIND11_MODULE(_geotomo, m) {
  m.doc() = "geotomo core bindings";

  // Translators run last-registered first, so the base class goes first.
  py::register_exception<Error>(m, "GeotomoError", PyExc_RuntimeError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<PreconditionError>(m, "PreconditionError", PyExc_ValueError);

  m.def("geometric_ladder", &geometric_ladder, py::arg("start"), py::arg("ratio"), py::arg("count"));

  m.def(
      "fit_slope",
      [](const std::vector<std::pair<double, double>>& pairs) {
        const SlopeFit f = fit_slope(pairs);
        return py::make_tuple(f.slope, f.band);
      },
      py::arg("pairs"), "Least-squares log-log slope and its 95% half-band.");

  m.def(
      "christoffel",
      [](const std::vector<double>& x, const std::string& kind, double radius, double curvature) {
        const Christoffel G = christoffel(chart_of(kind, radius, curvature), vec2(x.at(0), x.at(1)));
        std::vector<std::vector<std::vector<double>>> out(2, std::vector<std::vector<double>>(2, std::vector<double>(2)));
        for (int k = 0; k < 2; ++k)
          for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) out[k][i][j] = G(k, i, j);
        return out;
      },
      py::arg("x"), py::arg("kind") = "disc", py::arg("radius") = 1.0, py::arg("curvature") = 0.0,
      "Gamma[k][i][j] at a 2D chart point.");

  m.def(
      "geodesic_exit_time",
      [](const std::vector<double>& x, const std::vector<double>& xi, const std::string& kind, double radius,
         double curvature) {
        const MetricChart chart = chart_of(kind, radius, curvature);
        TraceOptions opts;
        opts.keep_samples = false;
        return geodesic_trace(chart, normalized(chart, {vec2(x.at(0), x.at(1)), vec2(xi.at(0), xi.at(1))}), opts)
            .exit_time;
      },
      py::arg("x"), py::arg("xi"), py::arg("kind") = "disc", py::arg("radius") = 1.0, py::arg("curvature") = 0.0);

  m.def(
      "santalo_relative_error",
      [](const std::string& kind, double radius, double curvature, int n_boundary, int n_angles) {
        const MetricChart chart = chart_of(kind, radius, curvature);
        const BundleQuadrature quad = build_bundle_quadrature(chart, n_boundary, n_angles, 24, 48, 24);
        return santalo_check(chart, [](const Vec& p, const Vec&) { return std::exp(-p.squaredNorm()); }, quad).rel_err;
      },
      py::arg("kind") = "disc", py::arg("radius") = 1.0, py::arg("curvature") = 0.0, py::arg("n_boundary") = 32,
      py::arg("n_angles") = 32);

  m.def("g0_operator_norm", [](double tau, int s) { return g0_operator_norm(SpectralBox{}, tau, s); }, py::arg("tau"),
        py::arg("s") = 0);

  m.def(
      "dn_map",
      [](int n, double epsilon, double bump_amplitude) {
        FemGrid g;
        g.n = n;
        const Conductivity gamma = bump_amplitude == 0.0 ? constant_conductivity()
                                                         : bump_conductivity(vec3(0.0, 0.0, 0.0), 0.4, bump_amplitude);
        const DNMap dn = dn_map(ConductivitySolver(g, gamma), epsilon);
        Eigen::MatrixXd nodes(static_cast<Eigen::Index>(dn.boundary.size()), 3);
        for (std::size_t b = 0; b < dn.boundary.size(); ++b)
          nodes.row(static_cast<Eigen::Index>(b)) = g.point(dn.boundary[b]).transpose();
        py::dict out;
        out["matrix"] = dn.matrix;
        out["mass"] = dn.mass;
        out["nodes"] = nodes;
        out["dnu_phi"] = dn.dphi;
        out["mask_minus"] = dn.mask_minus;
        out["mask_plus"] = dn.mask_plus;
        return out;
      },
      py::arg("n") = 6, py::arg("epsilon") = 0.05, py::arg("bump_amplitude") = 0.0,
      "Discrete DN map on the unit box for 1 + a bump conductivity.");

  m.def(
      "run_suite_json",
      [](const std::string& config_path, const std::string& suite, const std::string& out_dir) {
        ExperimentConfig cfg = load_config(config_path);
        if (!out_dir.empty()) cfg.out_dir = out_dir;
        py::gil_scoped_release release;
        return report_json(run_suite(cfg, suite));
      },
      py::arg("config_path"), py::arg("suite"), py::arg("out_dir") = "");
}
