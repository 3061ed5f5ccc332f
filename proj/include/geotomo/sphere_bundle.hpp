#pragma once

#include <functional>
#include <vector>

#include "geotomo/geometry.hpp"

namespace geotomo {

/// One inward-pointing unit vector at a boundary point of M0.
struct InfluxSample {
  Vec base;
  Vec xi;
  /// -<xi, nu>_g, in [0, 1].
  double mu = 0.0;
  /// Boundary arc length x inward-angle quadrature weight (no mu factor).
  double weight = 0.0;
  /// Boundary parameter (polar angle of the base point in the chart).
  double psi = 0.0;
  /// Angle of xi from the inward normal, in (-pi/2, pi/2).
  double alpha = 0.0;
};

/// Tensor grid over boundary parameter x inward angle; sample (i, j) lives
/// at index i * n_angles + j.
struct InfluxGrid {
  int n_boundary = 0;
  int n_angles = 0;
  std::vector<InfluxSample> samples;

  const InfluxSample& at(int i, int j) const { return samples[i * n_angles + j]; }
  std::size_t size() const { return samples.size(); }
};

/// Uniform boundary parameter x midpoint rule in alpha.  Disc charts only.
InfluxGrid build_influx(const MetricChart& chart, int n_boundary, int n_angles);

/// Inward frame (e_1 = -nu, e_2 = unit tangent) at a boundary point.
std::pair<Vec, Vec> boundary_frame(const MetricChart& chart, const Vec& base);

/// Boundary parameter and inward angle of an inward vector at a boundary point.
std::pair<double, double> influx_coordinates(const MetricChart& chart, const Vec& base,
                                             const Vec& xi);

struct BundleQuadrature {
  InfluxGrid influx;
  /// Product quadrature over M0 (polar chart coordinates, Gauss-Legendre
  /// radially) with weights carrying sqrt(det g).
  std::vector<Vec> interior_points;
  std::vector<double> interior_weights;
  /// Uniform fiber angles over S_x.
  int n_fiber = 0;
};

BundleQuadrature build_bundle_quadrature(const MetricChart& chart, int n_boundary, int n_angles,
                                         int n_radial, int n_polar, int n_fiber);

using BundleField = std::function<double(const Vec& x, const Vec& xi)>;

/// Positions and directions at n + 1 uniform times on [0, exit_time]
/// (n even) with Simpson weights, by cubic Hermite resampling of a trace.
struct RayNodes {
  std::vector<double> t;
  std::vector<Vec> x;
  std::vector<Vec> xi;
  std::vector<double> w;
};
RayNodes ray_nodes(const GeodesicTrace& trace, double step);

/// Integral of F over SM0 by the interior product quadrature.
double bundle_integral(const MetricChart& chart, const BundleField& F, const BundleQuadrature& quad);

struct SantaloResult {
  double lhs = 0.0;
  double rhs = 0.0;
  double rel_err = 0.0;
};

/// lhs = int_{SM0} F; rhs = int_{influx} mu int_0^tau F(phi_t) dt.
SantaloResult santalo_check(const MetricChart& chart, const BundleField& F,
                            const BundleQuadrature& quad, double step = 0.02);

}  // namespace geotomo
