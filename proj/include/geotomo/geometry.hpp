#pragma once

#include <array>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace geotomo {

/// Chart coordinates / tangent vectors in dimension 2 or 3 (no heap).
using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, 3, 1>;
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 3, 3>;

Vec vec2(double a, double b);
Vec vec3(double a, double b, double c);

enum class DomainKind { Disc, Box };

/// Coordinate region of a chart.  For discs, M0 = {|x - center| <= radius}
/// and the chart (the enlarged manifold) extends to radius * (1 + margin).
/// For boxes, M0 = [lo, hi] and the chart extends by margin * extent.
struct ChartDomain {
  DomainKind kind = DomainKind::Disc;
  double radius = 1.0;
  Vec lo;
  Vec hi;
  /// Relative enlargement of the chart beyond M0; the enlarged simple
  /// manifold is only required to be "slightly larger", so this is a knob.
  double margin = 0.25;
};

/// A coordinate chart carrying a smooth positive-definite metric field.
struct MetricChart {
  std::string id;
  int dim = 2;
  ChartDomain domain;
  std::function<Mat(const Vec&)> g_eval;
  /// Signed distance-like function to the boundary of M0, negative inside.
  std::function<double(const Vec&)> boundary_sdf;

  /// Length scale used for finite-difference steps and time budgets.
  double scale() const;
  /// True when x lies in the (enlarged) chart domain.
  bool in_chart(const Vec& x) const;
  /// Metric at x; throws DomainError outside the chart.
  Mat metric(const Vec& x) const;
  double sdf(const Vec& x) const { return boundary_sdf(x); }
};

MetricChart euclidean_disc(double radius = 1.0, double margin = 0.25);
/// Disc |x| <= radius carrying g = 4 / (1 + K |x|^2)^2 e, of constant
/// Gaussian curvature K.  For K = 1 this is a stereographic spherical cap.
MetricChart constant_curvature_disc(double curvature, double radius, double margin = 0.25);
MetricChart spherical_cap(double chart_radius, double margin = 0.25);
/// g = e^{2 x_1} e on a box in R^3.
MetricChart conformal_cylinder(const Vec& lo, const Vec& hi, double margin = 0.25);
/// g = e (+) g_0 on [x1_lo, x1_hi] x base (base must be a 2D disc chart).
MetricChart product_cylinder(const MetricChart& base, double x1_lo, double x1_hi);

/// Christoffel symbols of the second kind, gamma(k, i, j) = Gamma^k_ij.
struct Christoffel {
  int dim = 2;
  std::array<double, 27> data{};
  double& operator()(int k, int i, int j) { return data[(k * 3 + i) * 3 + j]; }
  double operator()(int k, int i, int j) const { return data[(k * 3 + i) * 3 + j]; }
};

/// Central differences of g with step 1e-5 of the chart scale.
Christoffel christoffel(const MetricChart& chart, const Vec& x);

/// Geodesic acceleration -Gamma^k_ij xi^i xi^j.
Vec geodesic_acceleration(const MetricChart& chart, const Vec& x, const Vec& xi);

struct PhaseState {
  Vec x;
  Vec xi;
};

double norm_g(const MetricChart& chart, const Vec& x, const Vec& v);
double inner_g(const MetricChart& chart, const Vec& x, const Vec& u, const Vec& v);
/// Rescales xi to unit g-length at x.
PhaseState normalized(const MetricChart& chart, PhaseState s);
/// Gram-Schmidt of the chart axes under g(x).
std::vector<Vec> orthonormal_frame(const MetricChart& chart, const Vec& x);
/// Outward unit normal (under g) from the gradient of boundary_sdf.
Vec outward_normal(const MetricChart& chart, const Vec& x);

struct TraceSample {
  double t;
  Vec x;
  Vec xi;
};

struct GeodesicTrace {
  std::vector<TraceSample> samples;
  double exit_time = 0.0;
  Vec exit_point;
  Vec exit_direction;
};

struct TraceOptions {
  double step = 0.02;
  /// Time budget; <= 0 means 50 * chart scale.
  double max_time = 0.0;
  double exit_tolerance = 1e-10;
  bool keep_samples = true;
};

/// Fixed-step RK4 on the geodesic flow, renormalizing xi every step; the
/// exit time is located by bisection on boundary_sdf.
GeodesicTrace geodesic_trace(const MetricChart& chart, const PhaseState& start,
                             const TraceOptions& opts = {});

/// Single RK4 step of size h (no renormalization).
PhaseState rk4_step(const MetricChart& chart, const PhaseState& s, double h);

/// Integrates the unit-speed geodesic from omega with initial direction
/// `direction` (chart vector, normalized internally) for arc length r.
/// Throws RangeError when it leaves the enlarged chart first.
Vec exp_map(const MetricChart& chart, const Vec& omega, double r, const Vec& direction,
            double step = 0.01);
/// 2D convenience: direction given as an angle in the orthonormal frame at omega.
Vec exp_map(const MetricChart& chart, const Vec& omega, double r, double theta,
            double step = 0.01);
Vec direction_from_angle(const MetricChart& chart, const Vec& omega, double theta);

/// Polar normal coordinates of x about omega (2D charts).
struct PolarPoint {
  double r = 0.0;
  double theta = 0.0;
  /// Determinant of g_0 in (r, theta) coordinates, i.e. |d exp / d theta|_g^2.
  double det_g0 = 0.0;
  int iterations = 0;
  double residual = 0.0;
};

/// Shooting by damped Newton on (r, theta); NonconvergenceError after 50 steps.
PolarPoint polar_coords(const MetricChart& chart, const Vec& omega, const Vec& x,
                        double step = 0.01, double tol = 1e-11);

/// det g_0 at polar coordinates (r, theta) about omega.
double polar_metric_det(const MetricChart& chart, const Vec& omega, double r, double theta,
                        double step = 0.01);

struct SimplicityReport {
  double min_second_fundamental_form = 0.0;
  bool conjugate_points = false;
  bool trapped = false;
  double max_exit_time = 0.0;
  bool pass = false;
};

/// Boundary convexity (geodesic curvature of the boundary circle), Jacobi
/// field sign changes along sampled geodesics, and max exit time.
SimplicityReport simplicity_check(const MetricChart& chart, int n_samples);

}  // namespace geotomo
