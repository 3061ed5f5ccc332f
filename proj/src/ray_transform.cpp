#include "geotomo/ray_transform.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include "geotomo/errors.hpp"
#include "geotomo/quadrature.hpp"

namespace geotomo {

namespace {

constexpr double kPi = std::numbers::pi;

struct Stencil {
  int ix, iy;
  std::array<double, 4> wx, wy;
};

Stencil stencil_at(const GridSpec& grid, double x, double y) {
  const double h = grid.h();
  const double u = (x + grid.radius) / h + 2.0;
  const double v = (y + grid.radius) / h + 2.0;
  Stencil s;
  s.ix = static_cast<int>(std::floor(u));
  s.iy = static_cast<int>(std::floor(v));
  if (s.ix < 1 || s.iy < 1 || s.ix + 2 > grid.n() - 1 || s.iy + 2 > grid.n() - 1) {
    throw DomainError("interpolation stencil leaves the interior grid");
  }
  s.wx = cubic_lagrange_weights(u - s.ix);
  s.wy = cubic_lagrange_weights(v - s.iy);
  return s;
}

double apply_stencil(const GridSpec& grid, const Stencil& s, const Eigen::VectorXd& f) {
  double acc = 0.0;
  for (int b = 0; b < 4; ++b) {
    const int row = grid.index(s.ix - 1, s.iy - 1 + b);
    double line = 0.0;
    for (int a = 0; a < 4; ++a) line += s.wx[a] * f[row + a];
    acc += s.wy[b] * line;
  }
  return acc;
}

void scatter_stencil(const GridSpec& grid, const Stencil& s, double c, Eigen::VectorXd& out) {
  for (int b = 0; b < 4; ++b) {
    const int row = grid.index(s.ix - 1, s.iy - 1 + b);
    for (int a = 0; a < 4; ++a) out[row + a] += c * s.wx[a] * s.wy[b];
  }
}

}  // namespace

InteriorField sample_field(const GridSpec& grid, const std::function<double(const Vec&)>& f) {
  InteriorField out{grid, Eigen::VectorXd(grid.n() * grid.n())};
  for (int i = 0; i < out.values.size(); ++i) out.values[i] = f(grid.point(i));
  return out;
}

double interpolate(const InteriorField& f, const Vec& x) {
  return apply_stencil(f.grid, stencil_at(f.grid, x(0), x(1)), f.values);
}

RayTransform::RayTransform(MetricChart chart, GridSpec grid, InfluxGrid influx,
                           RayTransformOptions opts)
    : chart_(std::move(chart)), grid_(grid), influx_(std::move(influx)), opts_(opts) {
  if (chart_.dim != 2 || chart_.domain.kind != DomainKind::Disc) {
    throw DomainError("RayTransform: 2D disc charts only");
  }
  if (std::abs(grid_.radius - chart_.domain.radius) > 1e-12) {
    throw DomainError("RayTransform: grid radius differs from chart radius");
  }
  const int total = grid_.n() * grid_.n();
  mask_.assign(total, 0);
  area_ = Eigen::VectorXd::Zero(total);
  for (int i = 0; i < total; ++i) mask_[i] = chart_.sdf(grid_.point(i)) <= 0.0;

  const auto& samples = influx_.samples;
  std::vector<std::vector<Node>> rows(samples.size());
  parallel_for(samples.size(), [&](std::size_t r) {
    const InfluxSample& s = samples[r];
    if (s.mu < opts_.tangency_cutoff) return;
    TraceOptions topts;
    topts.step = opts_.step;
    const RayNodes rn = ray_nodes(geodesic_trace(chart_, {s.base, s.xi}, topts), opts_.step);
    rows[r].reserve(rn.t.size());
    for (std::size_t j = 0; j < rn.t.size(); ++j) {
      rows[r].push_back({rn.x[j](0), rn.x[j](1), rn.t[j], rn.w[j]});
    }
  });
  row_start_.assign(samples.size() + 1, 0);
  for (std::size_t r = 0; r < samples.size(); ++r) row_start_[r + 1] = row_start_[r] + rows[r].size();
  nodes_.reserve(row_start_.back());
  for (auto& row : rows) nodes_.insert(nodes_.end(), row.begin(), row.end());

  // Interior weights: the discrete Santalo measure of each interpolation basis
  // function over 2 pi, so that the discrete adjoint maps 1 to 2 pi.
  Eigen::VectorXd coverage = Eigen::VectorXd::Zero(total);
  for (std::size_t r = 0; r < samples.size(); ++r) {
    const double c = samples[r].mu * samples[r].weight;
    for (std::size_t k = row_start_[r]; k < row_start_[r + 1]; ++k) {
      const Node& nd = nodes_[k];
      scatter_stencil(grid_, stencil_at(grid_, nd.x, nd.y), c * nd.w, coverage);
    }
  }
  for (int i = 0; i < total; ++i) {
    if (mask_[i] && coverage[i] > 0.0) {
      area_[i] = coverage[i] / (2.0 * kPi);
    } else {
      mask_[i] = 0;
      area_[i] = 0.0;
    }
  }
}

InteriorField RayTransform::masked(const InteriorField& f) const {
  InteriorField out = f;
  for (int i = 0; i < out.values.size(); ++i) {
    if (!mask_[i]) out.values[i] = 0.0;
  }
  return out;
}

BoundaryFunction RayTransform::forward(const InteriorField& f, double lambda) const {
  BoundaryFunction out{std::vector<double>(influx_.size(), 0.0)};
  parallel_for(influx_.size(), [&](std::size_t r) {
    double acc = 0.0;
    for (std::size_t k = row_start_[r]; k < row_start_[r + 1]; ++k) {
      const Node& nd = nodes_[k];
      acc += nd.w * std::exp(-lambda * nd.t) * apply_stencil(grid_, stencil_at(grid_, nd.x, nd.y), f.values);
    }
    out.values[r] = acc;
  });
  return out;
}

BoundaryFunction RayTransform::forward_exact(const std::function<double(const Vec&)>& f,
                                             double lambda) const {
  BoundaryFunction out{std::vector<double>(influx_.size(), 0.0)};
  parallel_for(influx_.size(), [&](std::size_t r) {
    double acc = 0.0;
    for (std::size_t k = row_start_[r]; k < row_start_[r + 1]; ++k) {
      const Node& nd = nodes_[k];
      acc += nd.w * std::exp(-lambda * nd.t) * f(vec2(nd.x, nd.y));
    }
    out.values[r] = acc;
  });
  return out;
}

InteriorField RayTransform::discrete_adjoint(const BoundaryFunction& h, double lambda) const {
  const int total = grid_.n() * grid_.n();
  const std::size_t n_rows = influx_.size();
  const std::size_t n_chunks = std::max<std::size_t>(1, std::min<std::size_t>(thread_count(), n_rows));
  std::vector<Eigen::VectorXd> partial(n_chunks, Eigen::VectorXd::Zero(total));
  parallel_for(n_chunks, [&](std::size_t c) {
    const std::size_t lo = n_rows * c / n_chunks, hi = n_rows * (c + 1) / n_chunks;
    for (std::size_t r = lo; r < hi; ++r) {
      const InfluxSample& s = influx_.samples[r];
      const double hr = s.mu * s.weight * h.values[r];
      if (hr == 0.0) continue;
      for (std::size_t k = row_start_[r]; k < row_start_[r + 1]; ++k) {
        const Node& nd = nodes_[k];
        scatter_stencil(grid_, stencil_at(grid_, nd.x, nd.y), hr * nd.w * std::exp(-lambda * nd.t),
                        partial[c]);
      }
    }
  });
  InteriorField out{grid_, Eigen::VectorXd::Zero(total)};
  for (const auto& p : partial) out.values += p;
  for (int i = 0; i < total; ++i) out.values[i] = mask_[i] ? out.values[i] / area_[i] : 0.0;
  return out;
}

const std::vector<RayTransform::Footprint>& RayTransform::footprints(int n_fiber) const {
  std::lock_guard<std::mutex> lock(cache_mutex_);
  auto it = footprint_cache_.find(n_fiber);
  if (it != footprint_cache_.end()) return *it->second;

  const int total = grid_.n() * grid_.n();
  auto fp = std::make_shared<std::vector<Footprint>>(static_cast<std::size_t>(total) * n_fiber,
                                                     Footprint{0, 0, 0, false});
  std::vector<long> failed(total, 0);
  TraceOptions topts;
  topts.step = opts_.step;
  topts.keep_samples = false;
  parallel_for(total, [&](std::size_t p) {
    if (!mask_[p]) return;
    const Vec x = grid_.point(static_cast<int>(p));
    const auto frame = orthonormal_frame(chart_, x);
    for (int k = 0; k < n_fiber; ++k) {
      const double theta = 2.0 * kPi * k / n_fiber;
      const Vec xi = std::cos(theta) * frame[0] + std::sin(theta) * frame[1];
      Footprint& f = (*fp)[p * n_fiber + k];
      try {
        const GeodesicTrace tr = geodesic_trace(chart_, {x, Vec(-xi)}, topts);
        const auto [psi, alpha] = influx_coordinates(chart_, tr.exit_point, Vec(-tr.exit_direction));
        f = {psi, alpha, tr.exit_time, true};
      } catch (const Error&) {
        ++failed[p];
      }
    }
  });
  for (long c : failed) failures_ += c;
  return *footprint_cache_.emplace(n_fiber, fp).first->second;
}

double RayTransform::boundary_interp(const BoundaryFunction& h, double psi, double alpha) const {
  const int nb = influx_.n_boundary, na = influx_.n_angles;
  const double u = psi / (2.0 * kPi / nb);
  const double v = (alpha + 0.5 * kPi) / (kPi / na) - 0.5;
  const int i0 = static_cast<int>(std::floor(u));
  const int j0 = static_cast<int>(std::floor(v));
  const auto wu = cubic_lagrange_weights(u - i0);
  const auto wv = cubic_lagrange_weights(v - j0);
  double acc = 0.0;
  for (int a = 0; a < 4; ++a) {
    const int i = ((i0 - 1 + a) % nb + nb) % nb;
    for (int b = 0; b < 4; ++b) {
      const int j = std::clamp(j0 - 1 + b, 0, na - 1);
      acc += wu[a] * wv[b] * h.values[i * na + j];
    }
  }
  return acc;
}

InteriorField RayTransform::adjoint(const BoundaryFunction& h, double lambda, int n_fiber) const {
  const auto& fp = footprints(n_fiber);
  const int total = grid_.n() * grid_.n();
  InteriorField out{grid_, Eigen::VectorXd::Zero(total)};
  const double dtheta = 2.0 * kPi / n_fiber;
  parallel_for(total, [&](std::size_t p) {
    if (!mask_[p]) return;
    double acc = 0.0;
    for (int k = 0; k < n_fiber; ++k) {
      const Footprint& f = fp[p * n_fiber + k];
      if (f.valid) acc += std::exp(-lambda * f.tau) * boundary_interp(h, f.psi, f.alpha);
    }
    out.values[p] = acc * dtheta;
  });
  return out;
}

InteriorField RayTransform::normal_apply(const InteriorField& f, double lambda) const {
  return discrete_adjoint(forward(masked(f), lambda), lambda);
}

double RayTransform::inner_interior(const InteriorField& f, const InteriorField& g) const {
  return (f.values.array() * g.values.array() * area_.array()).sum();
}

double RayTransform::inner_boundary(const BoundaryFunction& a, const BoundaryFunction& b) const {
  double acc = 0.0;
  for (std::size_t r = 0; r < influx_.size(); ++r) {
    const auto& s = influx_.samples[r];
    acc += s.mu * s.weight * a.values[r] * b.values[r];
  }
  return acc;
}

InversionResult RayTransform::invert_normal(const InteriorField& data, double lambda, double tol,
                                            int max_iter) const {
  if (std::abs(lambda) > opts_.lambda_max) {
    throw PreconditionError("invert_normal: |lambda| exceeds lambda_max");
  }
  const int total = grid_.n() * grid_.n();
  InversionResult res;
  res.field = {grid_, Eigen::VectorXd::Zero(total)};
  InteriorField r = masked(data);
  const double norm_d = std::sqrt(inner_interior(r, r));
  if (norm_d == 0.0) return res;

  // Preconditioner I + h (-Delta_h) with zero Dirichlet data off the mask; it
  // is self-adjoint in the area-weighted inner product.
  const int n = grid_.n();
  const double h = grid_.h();
  const double h2 = h * h;
  auto precondition = [&](const InteriorField& v) {
    InteriorField z = v;
    for (int iy = 1; iy + 1 < n; ++iy) {
      for (int ix = 1; ix + 1 < n; ++ix) {
        const int i = grid_.index(ix, iy);
        if (!mask_[i]) continue;
        double lap = 4.0 * v.values[i];
        for (int j : {i - 1, i + 1, i - n, i + n}) {
          if (mask_[j]) lap -= v.values[j];
        }
        z.values[i] += h * lap * h2 / area_[i];
      }
    }
    return z;
  };

  InteriorField z = precondition(r);
  InteriorField p = z;
  double rz = inner_interior(r, z);
  double best = std::sqrt(inner_interior(r, r)) / norm_d;
  int best_iter = 0;
  res.residual = best;
  for (res.iterations = 0; res.iterations < max_iter; ++res.iterations) {
    if (res.residual <= tol) return res;
    const InteriorField Ap = normal_apply(p, lambda);
    const double pAp = inner_interior(p, Ap);
    if (!(pAp > 0.0)) break;
    const double step = rz / pAp;
    res.field.values += step * p.values;
    r.values -= step * Ap.values;
    z = precondition(r);
    const double rz_new = inner_interior(r, z);
    p.values = z.values + (rz_new / rz) * p.values;
    rz = rz_new;
    res.residual = std::sqrt(inner_interior(r, r)) / norm_d;
    if (res.residual < best) {
      best = res.residual;
      best_iter = res.iterations;
    } else if (res.iterations - best_iter >= 50) {
      throw NonconvergenceError("invert_normal: CG residual plateau", res.residual);
    }
  }
  if (res.residual <= tol) return res;
  throw NonconvergenceError("invert_normal: no convergence within max_iter", res.residual);
}

double fan_beam(const MetricChart& chart, const std::function<double(const Vec&)>& F,
                const Vec& omega, double theta, double lambda, const PairingOptions& opts) {
  const int n = 2 * static_cast<int>(std::ceil(opts.max_length / (2.0 * opts.step)));
  const double h = opts.max_length / n;
  PhaseState s = normalized(chart, {omega, direction_from_angle(chart, omega, theta)});
  double acc = F(s.x);
  for (int j = 1; j <= n; ++j) {
    try {
      s = normalized(chart, rk4_step(chart, s, h));
    } catch (const DomainError&) {
      break;
    }
    if (!chart.in_chart(s.x)) break;
    const double w = (j == n) ? 1.0 : (j % 2 ? 4.0 : 2.0);
    acc += w * F(s.x) * std::exp(-lambda * j * h);
  }
  return acc * h / 3.0;
}

PairingResult pairing_test(const MetricChart& chart, const std::function<double(const Vec&)>& F,
                           const Vec& omega, double lambda, const std::function<double(double)>& b,
                           PairingOptions opts) {
  if (chart.dim != 2 || chart.domain.kind != DomainKind::Disc) {
    throw DomainError("pairing_test: 2D disc charts only");
  }
  const double R = chart.domain.radius;
  const int n = opts.n_grid;
  const double h = 2.0 * R / n;
  std::vector<double> cell(static_cast<std::size_t>(n) * n, 0.0);
  parallel_for(cell.size(), [&](std::size_t k) {
    const Vec x = vec2(-R + h * (k % n + 0.5), -R + h * (k / n + 0.5));
    if (chart.sdf(x) > 0.0) return;
    const double fx = F(x);
    if (fx == 0.0) return;
    const PolarPoint pp = polar_coords(chart, omega, x);
    cell[k] = fx * std::exp(-lambda * pp.r) * b(pp.theta) / std::sqrt(pp.det_g0) *
              std::sqrt(chart.g_eval(x).determinant()) * h * h;
  });
  PairingResult res;
  for (double c : cell) res.volume_route += c;

  std::vector<double> fan(opts.n_theta, 0.0);
  const double dtheta = 2.0 * kPi / opts.n_theta;
  parallel_for(fan.size(), [&](std::size_t k) {
    const double theta = dtheta * k;
    const double bk = b(theta);
    if (bk != 0.0) fan[k] = bk * fan_beam(chart, F, omega, theta, lambda, opts) * dtheta;
  });
  for (double c : fan) res.fan_route += c;
  const double denom = std::max(std::abs(res.volume_route), std::abs(res.fan_route));
  res.rel_diff = denom > 0.0 ? std::abs(res.volume_route - res.fan_route) / denom : 0.0;
  return res;
}

}  // namespace geotomo
