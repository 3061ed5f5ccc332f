#include <cmath>
#include <fstream>
#include <sstream>

#include "toml.hpp"

#include "geotomo/errors.hpp"
#include "geotomo/harness.hpp"

namespace geotomo {

namespace {

template <typename T>
void read(const toml::node_view<const toml::node>& node, T& out, const std::string& key) {
  if (!node) return;
  if constexpr (std::is_same_v<T, double>) {
    if (auto v = node.value<double>()) {
      out = *v;
      return;
    }
  } else if constexpr (std::is_same_v<T, bool>) {
    if (auto v = node.value<bool>()) {
      out = *v;
      return;
    }
  } else if constexpr (std::is_integral_v<T>) {
    if (auto v = node.value<int64_t>()) {
      out = static_cast<T>(*v);
      return;
    }
  } else if constexpr (std::is_same_v<T, std::string>) {
    if (auto v = node.value<std::string>()) {
      out = *v;
      return;
    }
  } else {
    if (const auto* arr = node.as_array()) {
      T values;
      for (const auto& el : *arr) {
        auto v = el.template value<typename T::value_type>();
        if (!v) throw ConfigError("config: bad element in '" + key + "'");
        values.push_back(*v);
      }
      out = values;
      return;
    }
  }
  throw ConfigError("config: wrong type for '" + key + "'");
}

void read_ladder(const toml::node_view<const toml::node>& node, LadderSpec& out, const std::string& key) {
  if (!node) return;
  if (!node.is_table()) throw ConfigError("config: '" + key + "' must be a table {start, ratio, count}");
  read(node["start"], out.start, key + ".start");
  read(node["ratio"], out.ratio, key + ".ratio");
  read(node["count"], out.count, key + ".count");
}

void check_ladder(const LadderSpec& l, const std::string& key) {
  if (!(l.start > 0.0)) throw ConfigError("config: " + key + ".start must be positive");
  if (!(l.ratio >= std::sqrt(2.0) * (1.0 - 1e-12)))
    throw ConfigError("config: " + key + ".ratio must be at least sqrt(2)");
  if (l.count < 5) throw ConfigError("config: " + key + ".count must be at least 5");
}

}  // namespace

void validate(const ExperimentConfig& c) {
  check_ladder(c.mollify_ladder, "tau.mollify");
  check_ladder(c.g0_ladder, "tau.g0");
  check_ladder(c.cgo_ladder, "tau.cgo");
  check_ladder(c.carleman_ladder, "tau.carleman");
  check_ladder(c.probe_ladder, "tau.probe");
  if (c.chart.kind != "disc" && c.chart.kind != "cap" && c.chart.kind != "curved")
    throw ConfigError("config: unknown chart kind '" + c.chart.kind + "'");
  if (!(c.chart.radius > 0.0)) throw ConfigError("config: chart.radius must be positive");
  if (c.lambdas.empty()) throw ConfigError("config: lambda list is empty");
  if (!(c.epsilon > 0.0)) throw ConfigError("config: epsilon must be positive");
  if (!(c.eta > 0.0 && c.eta < 0.5)) throw ConfigError("config: eta must lie in (0, 1/2)");
  if (!(c.eta_prime > 0.0 && c.eta_prime < 0.5)) throw ConfigError("config: eta_prime must lie in (0, 1/2)");
  if (c.out_dir.empty()) throw ConfigError("config: out_dir is empty");
}

ExperimentConfig parse_config(const std::string& text) {
  toml::table tbl;
  try {
    tbl = toml::parse(text);
  } catch (const toml::parse_error& e) {
    std::ostringstream msg;
    msg << "config parse error: " << e.description() << " at line " << e.source().begin.line;
    throw ConfigError(msg.str());
  }
  const toml::node_view<const toml::node> root{static_cast<const toml::node&>(tbl)};
  ExperimentConfig c;
  read(root["seed"], c.seed, "seed");
  read(root["out_dir"], c.out_dir, "out_dir");
  read(root["record_wallclock"], c.record_wallclock, "record_wallclock");
  read(root["lambda"], c.lambdas, "lambda");
  read(root["epsilon"], c.epsilon, "epsilon");
  read(root["eta"], c.eta, "eta");
  read(root["eta_prime"], c.eta_prime, "eta_prime");

  read(root["chart"]["kind"], c.chart.kind, "chart.kind");
  read(root["chart"]["radius"], c.chart.radius, "chart.radius");
  read(root["chart"]["curvature"], c.chart.curvature, "chart.curvature");

  const auto g = root["grids"];
  read(g["santalo_boundary"], c.grids.santalo_boundary, "grids.santalo_boundary");
  read(g["santalo_angles"], c.grids.santalo_angles, "grids.santalo_angles");
  read(g["ray_m"], c.grids.ray_m, "grids.ray_m");
  read(g["ray_rays"], c.grids.ray_rays, "grids.ray_rays");
  read(g["ray_refinement"], c.grids.ray_refinement, "grids.ray_refinement");
  read(g["carleman_n"], c.grids.carleman_n, "grids.carleman_n");
  read(g["dn_n"], c.grids.dn_n, "grids.dn_n");
  read(g["fem_n"], c.grids.fem_n, "grids.fem_n");
  read(g["conformal_n"], c.grids.conformal_n, "grids.conformal_n");
  read(g["log_quotient_n"], c.grids.log_quotient_n, "grids.log_quotient_n");
  read(g["logpolar_boundary"], c.grids.logpolar_boundary, "grids.logpolar_boundary");

  read_ladder(root["tau"]["mollify"], c.mollify_ladder, "tau.mollify");
  read_ladder(root["tau"]["g0"], c.g0_ladder, "tau.g0");
  read_ladder(root["tau"]["cgo"], c.cgo_ladder, "tau.cgo");
  read_ladder(root["tau"]["carleman"], c.carleman_ladder, "tau.carleman");
  read_ladder(root["tau"]["probe"], c.probe_ladder, "tau.probe");

  const auto t = root["tolerances"];
  read(t["santalo"], c.tol.santalo, "tolerances.santalo");
  read(t["adjoint"], c.tol.adjoint, "tolerances.adjoint");
  read(t["inversion"], c.tol.inversion, "tolerances.inversion");
  read(t["rate_slack"], c.tol.rate_slack, "tolerances.rate_slack");
  read(t["g0_slack"], c.tol.g0_slack, "tolerances.g0_slack");
  read(t["carleman_identity"], c.tol.carleman_identity, "tolerances.carleman_identity");
  read(t["refinement_order"], c.tol.refinement_order, "tolerances.refinement_order");
  read(t["dn_symmetry"], c.tol.dn_symmetry, "tolerances.dn_symmetry");
  read(t["alessandrini"], c.tol.alessandrini, "tolerances.alessandrini");
  read(t["log_quotient"], c.tol.log_quotient, "tolerances.log_quotient");
  read(t["conformal"], c.tol.conformal, "tolerances.conformal");
  read(t["probe_slack"], c.tol.probe_slack, "tolerances.probe_slack");

  validate(c);
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

MetricChart make_chart(const ChartSpec& spec) {
  if (spec.kind == "disc") return euclidean_disc(spec.radius);
  if (spec.kind == "cap") return spherical_cap(spec.radius);
  if (spec.kind == "curved") return constant_curvature_disc(spec.curvature, spec.radius);
  throw ConfigError("config: unknown chart kind '" + spec.kind + "'");
}

}  // namespace geotomo
