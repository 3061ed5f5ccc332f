#pragma once

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "geotomo/geometry.hpp"
#include "geotomo/sphere_bundle.hpp"

namespace geotomo {

/// Uniform square grid over [-R, R]^2 with spacing h = 2R / m and two guard
/// nodes on each side, so cubic stencils reach every point of the disc.
struct GridSpec {
  int m = 64;
  double radius = 1.0;

  int n() const { return m + 5; }
  double h() const { return 2.0 * radius / m; }
  double coord(int i) const { return -radius + (i - 2) * h(); }
  int index(int ix, int iy) const { return iy * n() + ix; }
  Vec point(int idx) const { return vec2(coord(idx % n()), coord(idx / n())); }
};

struct InteriorField {
  GridSpec grid;
  Eigen::VectorXd values;
};

InteriorField sample_field(const GridSpec& grid, const std::function<double(const Vec&)>& f);

/// Tensor cubic Lagrange interpolation; DomainError if the stencil leaves the grid.
double interpolate(const InteriorField& f, const Vec& x);

/// Per-influx-sample values, aligned with InfluxGrid::samples.
struct BoundaryFunction {
  std::vector<double> values;
};

struct RayTransformOptions {
  double step = 0.01;
  double tangency_cutoff = 1e-3;
  double lambda_max = 0.1;
};

struct InversionResult {
  InteriorField field;
  int iterations = 0;
  double residual = 0.0;
};

/// Attenuated ray transform on a 2D disc chart with a fixed interior grid and
/// influx sampling.  Ray nodes are traced once at construction.
class RayTransform {
 public:
  RayTransform(MetricChart chart, GridSpec grid, InfluxGrid influx, RayTransformOptions opts = {});

  const MetricChart& chart() const { return chart_; }
  const GridSpec& grid() const { return grid_; }
  const InfluxGrid& influx() const { return influx_; }
  const RayTransformOptions& options() const { return opts_; }

  /// Nodes inside the closed disc (inversion unknowns).
  const std::vector<char>& mask() const { return mask_; }
  /// Quadrature weights on masked nodes (approximately sqrt(det g) h^2): the
  /// Santalo integral of each interpolation basis function over 2 pi.
  const Eigen::VectorXd& area_weights() const { return area_; }

  BoundaryFunction forward(const InteriorField& f, double lambda) const;
  /// Same rays and nodes, with f evaluated pointwise instead of interpolated.
  BoundaryFunction forward_exact(const std::function<double(const Vec&)>& f, double lambda) const;

  /// Fiber integral of e^{-lambda tau(x,-xi)} h at the backward footprint,
  /// h interpolated over (psi, alpha).  Evaluated on masked nodes.
  InteriorField adjoint(const BoundaryFunction& h, double lambda, int n_fiber = 64) const;
  /// Exact adjoint of forward() for the discrete inner products.
  InteriorField discrete_adjoint(const BoundaryFunction& h, double lambda) const;

  InteriorField normal_apply(const InteriorField& f, double lambda) const;
  InversionResult invert_normal(const InteriorField& data, double lambda, double tol,
                                int max_iter) const;

  double inner_interior(const InteriorField& f, const InteriorField& g) const;
  double inner_boundary(const BoundaryFunction& a, const BoundaryFunction& b) const;

  /// Footprints that could not be located during adjoint().
  long footprint_failures() const { return failures_; }

 private:
  struct Node {
    double x, y, t, w;
  };
  struct Footprint {
    double psi, alpha, tau;
    bool valid;
  };

  const std::vector<Footprint>& footprints(int n_fiber) const;
  double boundary_interp(const BoundaryFunction& h, double psi, double alpha) const;
  InteriorField masked(const InteriorField& f) const;

  MetricChart chart_;
  GridSpec grid_;
  InfluxGrid influx_;
  RayTransformOptions opts_;
  std::vector<char> mask_;
  Eigen::VectorXd area_;
  std::vector<std::size_t> row_start_;
  std::vector<Node> nodes_;

  mutable std::mutex cache_mutex_;
  mutable std::map<int, std::shared_ptr<const std::vector<Footprint>>> footprint_cache_;
  mutable long failures_ = 0;
};

struct PairingOptions {
  /// Cartesian nodes per axis over the chart disc for the volume route.
  int n_grid = 120;
  /// Fan angles over [0, 2 pi) for the fan-beam route.
  int n_theta = 720;
  double step = 0.01;
  /// Arc length traced from omega on the fan-beam route.
  double max_length = 4.0;
};

struct PairingResult {
  double volume_route = 0.0;
  double fan_route = 0.0;
  double rel_diff = 0.0;
};

/// <F, e^{-lambda r} b(theta) |g0|^{-1/2}> by polar coordinates about omega,
/// and the same number as int b(theta) T_lambda F(omega, theta) dtheta.
PairingResult pairing_test(const MetricChart& chart, const std::function<double(const Vec&)>& F,
                           const Vec& omega, double lambda,
                           const std::function<double(double)>& b, PairingOptions opts = {});

/// T_lambda F along the geodesic from omega with angle theta.
double fan_beam(const MetricChart& chart, const std::function<double(const Vec&)>& F,
                const Vec& omega, double theta, double lambda, const PairingOptions& opts = {});

}  // namespace geotomo
