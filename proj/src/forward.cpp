#include "geotomo/forward.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <memory>
#include <random>

#include <Eigen/Geometry>
#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>

#include "geotomo/errors.hpp"
#include "geotomo/quadrature.hpp"
#include "json.hpp"

namespace geotomo {

namespace {

Vec to_vec(const Eigen::Vector3d& x) { return vec3(x(0), x(1), x(2)); }

Eigen::Vector3d grad3(const Conductivity& c, const Eigen::Vector3d& x) {
  const Vec g = c.grad(to_vec(x));
  return {g(0), g(1), g(2)};
}

// Trilinear shape function gradients on an element of sides h at the
// reference point (s0, s1, s2) in [-1, 1]^3; corner a has bits (a&1, a&2, a&4).
std::array<Eigen::Vector3d, 8> shape_gradients(const Eigen::Vector3d& s, const Eigen::Vector3d& h) {
  std::array<Eigen::Vector3d, 8> out;
  for (int a = 0; a < 8; ++a) {
    const double c0 = (a & 1) ? 1.0 : -1.0, c1 = (a & 2) ? 1.0 : -1.0, c2 = (a & 4) ? 1.0 : -1.0;
    const double f0 = 1.0 + c0 * s(0), f1 = 1.0 + c1 * s(1), f2 = 1.0 + c2 * s(2);
    out[a] = Eigen::Vector3d(c0 * f1 * f2 * 2.0 / h(0), f0 * c1 * f2 * 2.0 / h(1),
                             f0 * f1 * c2 * 2.0 / h(2)) / 8.0;
  }
  return out;
}

std::array<double, 8> shape_values(const Eigen::Vector3d& s) {
  std::array<double, 8> out;
  for (int a = 0; a < 8; ++a) {
    const double c0 = (a & 1) ? 1.0 : -1.0, c1 = (a & 2) ? 1.0 : -1.0, c2 = (a & 4) ? 1.0 : -1.0;
    out[a] = (1.0 + c0 * s(0)) * (1.0 + c1 * s(1)) * (1.0 + c2 * s(2)) / 8.0;
  }
  return out;
}

std::array<std::size_t, 8> element_nodes(const FemGrid& g, int i, int j, int k) {
  std::array<std::size_t, 8> out;
  for (int a = 0; a < 8; ++a) out[a] = g.index(i + (a & 1), j + ((a >> 1) & 1), k + ((a >> 2) & 1));
  return out;
}

struct GaussPoint {
  Eigen::Vector3d s;
  double w;
};

const std::vector<GaussPoint>& gauss3() {
  static const std::vector<GaussPoint> pts = [] {
    const QuadratureRule r = gauss_legendre(3);
    std::vector<GaussPoint> p;
    for (int c = 0; c < 3; ++c)
      for (int b = 0; b < 3; ++b)
        for (int a = 0; a < 3; ++a)
          p.push_back({Eigen::Vector3d(r.nodes[a], r.nodes[b], r.nodes[c]),
                       r.weights[a] * r.weights[b] * r.weights[c]});
    return p;
  }();
  return pts;
}

// body(point, volume weight, shape values, shape gradients) at each Gauss
// point of element (i, j, k).
template <class Body>
void for_each_quadrature_point(const FemGrid& g, int i, int j, int k, Body&& body) {
  const Eigen::Vector3d h(g.h(0), g.h(1), g.h(2));
  const Eigen::Vector3d corner = g.lo + Eigen::Vector3d(i * h(0), j * h(1), k * h(2));
  const double jac = h.prod() / 8.0;
  for (const GaussPoint& q : gauss3()) {
    const Eigen::Vector3d x = corner + 0.5 * (q.s + Eigen::Vector3d::Ones()).cwiseProduct(h);
    body(x, q.w * jac, shape_values(q.s), shape_gradients(q.s, h));
  }
}

// c |g|^{1/2} g^{-1}; sets ok = false when det g <= 0.
Eigen::Matrix3d coefficient_tensor(const MetricFn& metric, double c, const Eigen::Vector3d& x,
                                   bool& ok) {
  const Eigen::Matrix3d G = metric_at(metric, x);
  const double det = G.determinant();
  if (!(det > 0.0)) {
    ok = false;
    return Eigen::Matrix3d::Zero();
  }
  return c * std::sqrt(det) * G.inverse();
}

Eigen::SparseMatrix<double> assemble(const FemGrid& grid, const ScalarFn& c, const MetricFn& metric,
                                     bool check_positive) {
  const int n = grid.n;
  const std::size_t ne = static_cast<std::size_t>(n) * n * n;
  std::vector<Eigen::Matrix<double, 8, 8>> local(ne);
  std::vector<char> bad(ne, 0);
  parallel_for(ne, [&](std::size_t e) {
    const int i = static_cast<int>(e % n), j = static_cast<int>((e / n) % n),
              k = static_cast<int>(e / (static_cast<std::size_t>(n) * n));
    Eigen::Matrix<double, 8, 8> m = Eigen::Matrix<double, 8, 8>::Zero();
    for_each_quadrature_point(grid, i, j, k, [&](const Eigen::Vector3d& x, double w,
                                                 const std::array<double, 8>&,
                                                 const std::array<Eigen::Vector3d, 8>& dN) {
      const double cv = c(x);
      bool ok = true;
      if (check_positive && !(cv > 0.0)) ok = false;
      const Eigen::Matrix3d D = coefficient_tensor(metric, cv, x, ok);
      if (!ok) bad[e] = 1;
      for (int a = 0; a < 8; ++a) {
        const Eigen::Vector3d Da = D * dN[a];
        for (int b = 0; b < 8; ++b) m(a, b) += w * Da.dot(dN[b]);
      }
    });
    local[e] = m;
  });
  if (std::any_of(bad.begin(), bad.end(), [](char b) { return b != 0; }))
    throw AssemblyError("nonpositive conductivity or metric determinant at a quadrature point");
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(ne * 64);
  for (std::size_t e = 0; e < ne; ++e) {
    const int i = static_cast<int>(e % n), j = static_cast<int>((e / n) % n),
              k = static_cast<int>(e / (static_cast<std::size_t>(n) * n));
    const auto nodes = element_nodes(grid, i, j, k);
    for (int a = 0; a < 8; ++a)
      for (int b = 0; b < 8; ++b)
        trip.emplace_back(static_cast<int>(nodes[a]), static_cast<int>(nodes[b]), local[e](a, b));
  }
  Eigen::SparseMatrix<double> K(static_cast<Eigen::Index>(grid.size()),
                                static_cast<Eigen::Index>(grid.size()));
  K.setFromTriplets(trip.begin(), trip.end());
  return K;
}

// Outward unit normals (Euclidean) of the faces containing a boundary node.
std::vector<Eigen::Vector3d> face_normals(const FemGrid& g, std::size_t idx) {
  const auto c = g.ijk(idx);
  std::vector<Eigen::Vector3d> out;
  for (int a = 0; a < 3; ++a) {
    if (c[a] == 0) out.push_back(-Eigen::Vector3d::Unit(a));
    if (c[a] == g.n) out.push_back(Eigen::Vector3d::Unit(a));
  }
  return out;
}

}  // namespace

std::array<int, 3> FemGrid::ijk(std::size_t idx) const {
  const std::size_t m = static_cast<std::size_t>(n + 1);
  return {static_cast<int>(idx % m), static_cast<int>((idx / m) % m), static_cast<int>(idx / (m * m))};
}

Eigen::Vector3d FemGrid::point(std::size_t idx) const {
  const auto c = ijk(idx);
  return {lo(0) + c[0] * h(0), lo(1) + c[1] * h(1), lo(2) + c[2] * h(2)};
}

bool FemGrid::on_boundary(std::size_t idx) const {
  const auto c = ijk(idx);
  for (int a = 0; a < 3; ++a)
    if (c[a] == 0 || c[a] == n) return true;
  return false;
}

std::vector<std::size_t> FemGrid::boundary_nodes() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < size(); ++i)
    if (on_boundary(i)) out.push_back(i);
  return out;
}

Eigen::Matrix3d metric_at(const MetricFn& metric, const Eigen::Vector3d& x) {
  return metric ? metric(x) : Eigen::Matrix3d::Identity();
}

Eigen::SparseMatrix<double> assemble_stiffness(const FemGrid& grid, const ScalarFn& c,
                                               const MetricFn& metric) {
  return assemble(grid, c, metric, false);
}

Eigen::VectorXd boundary_mass(const FemGrid& grid, const MetricFn& metric) {
  const std::vector<std::size_t> bnd = grid.boundary_nodes();
  std::vector<long> slot(grid.size(), -1);
  for (std::size_t b = 0; b < bnd.size(); ++b) slot[bnd[b]] = static_cast<long>(b);
  Eigen::VectorXd m = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(bnd.size()));
  const QuadratureRule r = gauss_legendre(3);
  const int n = grid.n;
  // Faces: axis a fixed at index 0 or n; bilinear quadrature on each cell.
  for (int a = 0; a < 3; ++a) {
    const int b = (a + 1) % 3, c = (a + 2) % 3;
    for (int side : {0, n}) {
      for (int p = 0; p < n; ++p) {
        for (int q = 0; q < n; ++q) {
          for (int u = 0; u < 3; ++u) {
            for (int v = 0; v < 3; ++v) {
              const double su = r.nodes[u], sv = r.nodes[v];
              Eigen::Vector3d x;
              x(a) = grid.lo(a) + side * grid.h(a);
              x(b) = grid.lo(b) + (p + 0.5 * (su + 1.0)) * grid.h(b);
              x(c) = grid.lo(c) + (q + 0.5 * (sv + 1.0)) * grid.h(c);
              const Eigen::Matrix3d G = metric_at(metric, x);
              const double dS = std::sqrt(G.determinant() * G.inverse()(a, a)) * grid.h(b) *
                                grid.h(c) / 4.0 * r.weights[u] * r.weights[v];
              for (int cb = 0; cb < 2; ++cb) {
                for (int cc = 0; cc < 2; ++cc) {
                  const double phi = 0.25 * (1.0 + (cb ? su : -su)) * (1.0 + (cc ? sv : -sv));
                  std::array<int, 3> ijk{};
                  ijk[a] = side;
                  ijk[b] = p + cb;
                  ijk[c] = q + cc;
                  m(slot[grid.index(ijk[0], ijk[1], ijk[2])]) += phi * dS;
                }
              }
            }
          }
        }
      }
    }
  }
  return m;
}

Eigen::VectorXd boundary_dphi(const FemGrid& grid, const MetricFn& metric) {
  const std::vector<std::size_t> bnd = grid.boundary_nodes();
  Eigen::VectorXd out(static_cast<Eigen::Index>(bnd.size()));
  for (std::size_t b = 0; b < bnd.size(); ++b) {
    Eigen::Vector3d nsum = Eigen::Vector3d::Zero();
    for (const auto& nf : face_normals(grid, bnd[b])) nsum += nf;
    const Eigen::Matrix3d Ginv = metric_at(metric, grid.point(bnd[b])).inverse();
    // Covector n; nu = G^{-1} n / |n|_{G^{-1}}; d_nu x_1 = nu^1.
    out(static_cast<Eigen::Index>(b)) = (Ginv * nsum)(0) / std::sqrt(nsum.dot(Ginv * nsum));
  }
  return out;
}

ConductivitySolver::ConductivitySolver(FemGrid grid, const Conductivity& gamma, MetricFn metric)
    : grid_(grid), metric_(std::move(metric)) {
  K_ = assemble(grid_, [&](const Eigen::Vector3d& x) { return gamma(to_vec(x)); }, metric_, true);
  interior_slot_.assign(grid_.size(), -1);
  for (std::size_t i = 0; i < grid_.size(); ++i) {
    if (grid_.on_boundary(i)) {
      boundary_.push_back(i);
    } else {
      interior_slot_[i] = static_cast<long>(interior_.size());
      interior_.push_back(i);
    }
  }
  std::vector<long> bslot(grid_.size(), -1);
  for (std::size_t b = 0; b < boundary_.size(); ++b) bslot[boundary_[b]] = static_cast<long>(b);
  std::vector<Eigen::Triplet<double>> tii, tib;
  for (int col = 0; col < K_.outerSize(); ++col) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(K_, col); it; ++it) {
      const long ri = interior_slot_[static_cast<std::size_t>(it.row())];
      if (ri < 0) continue;
      const long ci = interior_slot_[static_cast<std::size_t>(col)];
      if (ci >= 0)
        tii.emplace_back(static_cast<int>(ri), static_cast<int>(ci), it.value());
      else
        tib.emplace_back(static_cast<int>(ri), static_cast<int>(bslot[static_cast<std::size_t>(col)]),
                         it.value());
    }
  }
  const auto ni = static_cast<Eigen::Index>(interior_.size());
  const auto nb = static_cast<Eigen::Index>(boundary_.size());
  K_ii_.resize(ni, ni);
  K_ii_.setFromTriplets(tii.begin(), tii.end());
  K_ib_.resize(ni, nb);
  K_ib_.setFromTriplets(tib.begin(), tib.end());
  mass_ = geotomo::boundary_mass(grid_, metric_);
}

Eigen::VectorXd ConductivitySolver::solve(const Eigen::VectorXd& data) const {
  return solve(data, Eigen::VectorXd());
}

Eigen::VectorXd ConductivitySolver::solve(const Eigen::VectorXd& data, const Eigen::VectorXd& load) const {
  Eigen::VectorXd ub(static_cast<Eigen::Index>(boundary_.size()));
  for (std::size_t b = 0; b < boundary_.size(); ++b)
    ub(static_cast<Eigen::Index>(b)) = data(static_cast<Eigen::Index>(boundary_[b]));
  Eigen::VectorXd rhs = -(K_ib_ * ub);
  if (load.size() > 0)
    for (std::size_t i = 0; i < interior_.size(); ++i)
      rhs(static_cast<Eigen::Index>(i)) += load(static_cast<Eigen::Index>(interior_[i]));
  Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper,
                           Eigen::IncompleteCholesky<double>>
      cg;
  cg.setTolerance(1e-13);
  cg.setMaxIterations(20000);
  cg.compute(K_ii_);
  const Eigen::VectorXd ui = cg.solve(rhs);
  if (cg.info() != Eigen::Success && cg.error() > 1e-10)
    throw NonconvergenceError("interior conductivity solve", cg.error());
  Eigen::VectorXd u = data;
  for (std::size_t i = 0; i < interior_.size(); ++i)
    u(static_cast<Eigen::Index>(interior_[i])) = ui(static_cast<Eigen::Index>(i));
  return u;
}

Eigen::VectorXcd ConductivitySolver::solve(const Eigen::VectorXcd& data,
                                            const Eigen::VectorXcd& load) const {
  const Eigen::VectorXd re = solve(Eigen::VectorXd(data.real()), Eigen::VectorXd(load.real()));
  const Eigen::VectorXd im = solve(Eigen::VectorXd(data.imag()), Eigen::VectorXd(load.imag()));
  Eigen::VectorXcd out(re.size());
  for (Eigen::Index i = 0; i < re.size(); ++i) out(i) = std::complex<double>(re(i), im(i));
  return out;
}

Eigen::VectorXd ConductivitySolver::solve_boundary(
    const std::function<double(const Eigen::Vector3d&)>& f) const {
  Eigen::VectorXd data = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(grid_.size()));
  for (std::size_t b : boundary_) data(static_cast<Eigen::Index>(b)) = f(grid_.point(b));
  return solve(data);
}

double ConductivitySolver::weak_residual(const Eigen::VectorXd& u) const {
  Eigen::VectorXd ub(static_cast<Eigen::Index>(boundary_.size())),
      ui(static_cast<Eigen::Index>(interior_.size()));
  for (std::size_t b = 0; b < boundary_.size(); ++b)
    ub(static_cast<Eigen::Index>(b)) = u(static_cast<Eigen::Index>(boundary_[b]));
  for (std::size_t i = 0; i < interior_.size(); ++i)
    ui(static_cast<Eigen::Index>(i)) = u(static_cast<Eigen::Index>(interior_[i]));
  const Eigen::VectorXd drive = K_ib_ * ub;
  const double scale = drive.norm();
  const double r = (K_ii_ * ui + drive).norm();
  return scale > 0.0 ? r / scale : r;
}

Eigen::VectorXd ConductivitySolver::flux(const Eigen::VectorXd& u) const {
  const Eigen::VectorXd Ku = K_ * u;
  Eigen::VectorXd out(static_cast<Eigen::Index>(boundary_.size()));
  for (std::size_t b = 0; b < boundary_.size(); ++b)
    out(static_cast<Eigen::Index>(b)) =
        Ku(static_cast<Eigen::Index>(boundary_[b])) / mass_(static_cast<Eigen::Index>(b));
  return out;
}

double DNMap::inner(const Eigen::VectorXd& f, const Eigen::VectorXd& h) const {
  return (mass.array() * f.array() * h.array()).sum();
}

double DNMap::symmetry_error(int pairs, unsigned seed) const {
  std::mt19937 rng(seed);
  std::normal_distribution<double> nd;
  double worst = 0.0;
  for (int p = 0; p < pairs; ++p) {
    Eigen::VectorXd f(matrix.rows()), h(matrix.rows());
    for (Eigen::Index i = 0; i < f.size(); ++i) {
      f(i) = nd(rng);
      h(i) = nd(rng);
    }
    const Eigen::VectorXd Lf = apply(f), Lh = apply(h);
    const double scale = std::sqrt(inner(Lf, Lf) * inner(h, h));
    worst = std::max(worst, std::abs(inner(Lf, h) - inner(f, Lh)) / scale);
  }
  return worst;
}

double DNMap::total_flux_error(int samples, unsigned seed) const {
  std::mt19937 rng(seed);
  std::normal_distribution<double> nd;
  double worst = 0.0;
  const Eigen::VectorXd one = Eigen::VectorXd::Ones(matrix.rows());
  for (int p = 0; p < samples; ++p) {
    Eigen::VectorXd f(matrix.rows());
    for (Eigen::Index i = 0; i < f.size(); ++i) f(i) = nd(rng);
    worst = std::max(worst, std::abs(inner(one, apply(f))) / std::sqrt(inner(f, f)));
  }
  return worst;
}

void set_masks(DNMap& map, double epsilon) {
  map.epsilon = epsilon;
  map.mask_minus.clear();
  map.mask_plus.clear();
  for (Eigen::Index b = 0; b < map.dphi.size(); ++b)
    (map.dphi(b) < epsilon ? map.mask_minus : map.mask_plus).push_back(static_cast<int>(b));
}

DNMap dn_map(const ConductivitySolver& solver, double epsilon) {
  DNMap map;
  map.grid = solver.grid();
  map.boundary = solver.boundary();
  map.mass = solver.boundary_mass();
  map.dphi = boundary_dphi(map.grid, solver.metric());
  set_masks(map, epsilon);

  // Schur complement K_BB - K_BI K_II^{-1} K_IB, columns in parallel.
  const auto& K = solver.stiffness();
  const auto& bnd = solver.boundary();
  const auto& inr = solver.interior();
  const auto nb = static_cast<Eigen::Index>(bnd.size());
  const auto ni = static_cast<Eigen::Index>(inr.size());
  std::vector<long> islot(map.grid.size(), -1), bslot(map.grid.size(), -1);
  for (std::size_t i = 0; i < inr.size(); ++i) islot[inr[i]] = static_cast<long>(i);
  for (std::size_t b = 0; b < bnd.size(); ++b) bslot[bnd[b]] = static_cast<long>(b);
  std::vector<Eigen::Triplet<double>> tii, tib, tbb;
  for (int col = 0; col < K.outerSize(); ++col) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(K, col); it; ++it) {
      const auto r = static_cast<std::size_t>(it.row()), c = static_cast<std::size_t>(col);
      if (islot[r] >= 0 && islot[c] >= 0) tii.emplace_back(islot[r], islot[c], it.value());
      if (islot[r] >= 0 && bslot[c] >= 0) tib.emplace_back(islot[r], bslot[c], it.value());
      if (bslot[r] >= 0 && bslot[c] >= 0) tbb.emplace_back(bslot[r], bslot[c], it.value());
    }
  }
  Eigen::SparseMatrix<double> Kii(ni, ni), Kib(ni, nb), Kbb(nb, nb);
  Kii.setFromTriplets(tii.begin(), tii.end());
  Kib.setFromTriplets(tib.begin(), tib.end());
  Kbb.setFromTriplets(tbb.begin(), tbb.end());
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(Kii);
  if (ldlt.info() != Eigen::Success) throw AssemblyError("interior stiffness is not positive definite");

  Eigen::MatrixXd S = Eigen::MatrixXd(Kbb);
  const Eigen::SparseMatrix<double> Kbi = Kib.transpose();
  constexpr Eigen::Index kBlock = 64;
  const auto blocks = static_cast<std::size_t>((nb + kBlock - 1) / kBlock);
  parallel_for(blocks, [&](std::size_t blk) {
    const Eigen::Index c0 = static_cast<Eigen::Index>(blk) * kBlock;
    const Eigen::Index w = std::min(kBlock, nb - c0);
    const Eigen::MatrixXd rhs = Eigen::MatrixXd(Kib.middleCols(c0, w));
    const Eigen::MatrixXd X = ldlt.solve(rhs);
    S.middleCols(c0, w) -= Kbi * X;
  });
  map.matrix = map.mass.cwiseInverse().asDiagonal() * S;
  return map;
}


namespace {

// Weights of the derivative at offset 0 from samples at offsets o, o+1, ..., o+4.
std::array<double, 5> fd_weights(int o) {
  Eigen::Matrix<double, 5, 5> V;
  for (int r = 0; r < 5; ++r)
    for (int c = 0; c < 5; ++c) V(r, c) = std::pow(static_cast<double>(o + c), r);
  Eigen::Matrix<double, 5, 1> e = Eigen::Matrix<double, 5, 1>::Zero();
  e(1) = 1.0;
  const Eigen::Matrix<double, 5, 1> w = V.partialPivLu().solve(e);
  return {w(0), w(1), w(2), w(3), w(4)};
}

// Derivative of node data along an axis by a five-point stencil kept
// inside the grid.
double grid_derivative(const FemGrid& g, const Eigen::VectorXd& u, std::size_t idx, int axis) {
  auto c = g.ijk(idx);
  const int at = c[axis];
  const int o = std::clamp(-2, -at, g.n - at - 4);
  const auto w = fd_weights(o);
  double d = 0.0;
  for (int t = 0; t < 5; ++t) {
    auto cc = c;
    cc[axis] = at + o + t;
    d += w[t] * u(static_cast<Eigen::Index>(g.index(cc[0], cc[1], cc[2])));
  }
  return d / g.h(axis);
}

// Fourth-order central derivative of a scalar function along an axis.
template <class F>
double central(F&& f, const Eigen::Vector3d& x, int axis, double step) {
  const Eigen::Vector3d e = step * Eigen::Vector3d::Unit(axis);
  return (f(x - 2.0 * e) - 8.0 * f(x - e) + 8.0 * f(x + e) - f(x + 2.0 * e)) / (12.0 * step);
}

// |g|^{-1/2} d_i(|g|^{1/2} g^{ij} V_j) for a covector field V.
template <class F>
double covector_divergence(const MetricFn& metric, F&& V, const Eigen::Vector3d& x, double step) {
  double sum = 0.0;
  for (int i = 0; i < 3; ++i) {
    sum += central(
        [&](const Eigen::Vector3d& y) {
          const Eigen::Matrix3d G = metric_at(metric, y);
          return std::sqrt(G.determinant()) * (G.inverse() * V(y))(i);
        },
        x, i, step);
  }
  return sum / std::sqrt(metric_at(metric, x).determinant());
}

std::vector<std::array<int, 3>> monomial_exponents(int count) {
  std::vector<std::array<int, 3>> out;
  for (int d = 0; static_cast<int>(out.size()) < count; ++d)
    for (int a = d; a >= 0; --a)
      for (int b = d - a; b >= 0; --b)
        if (static_cast<int>(out.size()) < count) out.push_back({a, b, d - a - b});
  return out;
}

}  // namespace

double partial_data_residual(const DNMap& a, const DNMap& b, double epsilon, int basis_size) {
  DNMap ma = a;
  set_masks(ma, epsilon);
  const auto nb = static_cast<Eigen::Index>(a.boundary.size());
  const auto ex = monomial_exponents(basis_size);
  Eigen::MatrixXd B(nb, static_cast<Eigen::Index>(ex.size()));
  for (Eigen::Index r = 0; r < nb; ++r) {
    const Eigen::Vector3d x = a.grid.point(a.boundary[static_cast<std::size_t>(r)]);
    for (std::size_t c = 0; c < ex.size(); ++c)
      B(r, static_cast<Eigen::Index>(c)) =
          std::pow(x(0), ex[c][0]) * std::pow(x(1), ex[c][1]) * std::pow(x(2), ex[c][2]);
  }
  // Orthonormal basis in the lumped inner product.
  const Eigen::VectorXd sq = a.mass.cwiseSqrt();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(sq.asDiagonal() * B);
  const Eigen::MatrixXd Q = qr.householderQ() * Eigen::MatrixXd::Identity(nb, B.cols());
  const Eigen::MatrixXd basis = sq.cwiseInverse().asDiagonal() * Q;
  const Eigen::MatrixXd D = (a.matrix - b.matrix) * basis;
  if (ma.mask_minus.empty()) return 0.0;
  Eigen::MatrixXd R(static_cast<Eigen::Index>(ma.mask_minus.size()), D.cols());
  for (std::size_t r = 0; r < ma.mask_minus.size(); ++r)
    R.row(static_cast<Eigen::Index>(r)) = sq(ma.mask_minus[r]) * D.row(ma.mask_minus[r]);
  return Eigen::JacobiSVD<Eigen::MatrixXd>(R).singularValues()(0);
}

void write_dn_csv(const DNMap& map, const std::string& csv_path, const std::string& manifest_path) {
  std::ofstream csv(csv_path);
  if (!csv) throw Error("cannot write " + csv_path);
  csv.precision(17);
  for (Eigen::Index r = 0; r < map.matrix.rows(); ++r) {
    for (Eigen::Index c = 0; c < map.matrix.cols(); ++c) csv << (c ? "," : "") << map.matrix(r, c);
    csv << '\n';
  }
  nlohmann::json j;
  j["grid"] = {{"lo", {map.grid.lo(0), map.grid.lo(1), map.grid.lo(2)}},
               {"hi", {map.grid.hi(0), map.grid.hi(1), map.grid.hi(2)}},
               {"n", map.grid.n}};
  j["epsilon"] = map.epsilon;
  nlohmann::json nodes = nlohmann::json::array();
  std::vector<char> minus(map.boundary.size(), 0);
  for (int m : map.mask_minus) minus[static_cast<std::size_t>(m)] = 1;
  for (std::size_t b = 0; b < map.boundary.size(); ++b) {
    const Eigen::Vector3d x = map.grid.point(map.boundary[b]);
    nodes.push_back({{"row", b},
                     {"node", map.boundary[b]},
                     {"x", {x(0), x(1), x(2)}},
                     {"mass", map.mass(static_cast<Eigen::Index>(b))},
                     {"dnu_phi", map.dphi(static_cast<Eigen::Index>(b))},
                     {"mask", minus[b] ? "minus" : "plus"}});
  }
  j["boundary_nodes"] = nodes;
  std::ofstream man(manifest_path);
  if (!man) throw Error("cannot write " + manifest_path);
  man << j.dump(1) << '\n';
}

double metric_divergence(const MetricFn& metric, const ScalarFn& c, const ScalarFn& u,
                         const Eigen::Vector3d& x, double step) {
  const auto flux = [&](const Eigen::Vector3d& y) {
    Eigen::Vector3d du;
    for (int a = 0; a < 3; ++a) du(a) = central(u, y, a, step);
    return Eigen::Vector3d(c(y) * du);
  };
  return covector_divergence(metric, flux, x, step);
}

std::vector<std::pair<std::size_t, double>> fd_normal_derivative(const FemGrid& grid,
                                                                 const MetricFn& metric,
                                                                 const Eigen::VectorXd& u) {
  std::vector<std::pair<std::size_t, double>> out;
  for (std::size_t idx : grid.boundary_nodes()) {
    const auto normals = face_normals(grid, idx);
    if (normals.size() != 1) continue;
    Eigen::Vector3d du;
    for (int a = 0; a < 3; ++a) du(a) = grid_derivative(grid, u, idx, a);
    const Eigen::Matrix3d Ginv = metric_at(metric, grid.point(idx)).inverse();
    const Eigen::Vector3d& n = normals[0];
    out.emplace_back(idx, (Ginv * n).dot(du) / std::sqrt(n.dot(Ginv * n)));
  }
  return out;
}

ConformalReport conformal_reduction_check(const FemGrid& grid, const ScalarFn& c,
                                          const Conductivity& gamma,
                                          const std::function<double(const Eigen::Vector3d&)>& f,
                                          const MetricFn& metric, unsigned seed) {
  ConformalReport rep;
  const MetricFn cg = [&](const Eigen::Vector3d& x) -> Eigen::Matrix3d {
    return c(x) * metric_at(metric, x);
  };
  Conductivity tilde = gamma;
  tilde.value = [&](const Vec& x) { return std::sqrt(c(Eigen::Vector3d(x(0), x(1), x(2)))) * gamma(x); };
  const ConductivitySolver s_cg(grid, gamma, cg);
  const ConductivitySolver s_g(grid, tilde, metric);
  const Eigen::VectorXd u_cg = s_cg.solve_boundary(f);
  const Eigen::VectorXd u_g = s_g.solve_boundary(f);
  rep.solution_diff = (u_cg - u_g).cwiseAbs().maxCoeff() / std::max(u_g.cwiseAbs().maxCoeff(), 1e-300);
  rep.weak_residual = std::max(s_cg.weak_residual(u_cg), s_g.weak_residual(u_g));

  const auto d_cg = fd_normal_derivative(grid, cg, u_cg);
  const auto d_g = fd_normal_derivative(grid, metric, u_g);
  double dmax = 0.0;
  for (const auto& p : d_g) dmax = std::max(dmax, std::abs(p.second));
  for (std::size_t t = 0; t < d_g.size(); ++t) {
    if (std::abs(d_g[t].second) < 1e-3 * dmax) continue;
    const double cx = c(grid.point(d_g[t].first));
    const double ratio = d_cg[t].second / d_g[t].second;
    rep.flux_ratio_err = std::max(rep.flux_ratio_err, std::abs(ratio - 1.0 / std::sqrt(cx)) * std::sqrt(cx));
  }

  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  const Eigen::Vector3d mid = 0.5 * (grid.lo + grid.hi), half = 0.5 * (grid.hi - grid.lo);
  const ScalarFn gam = [&](const Eigen::Vector3d& x) { return gamma(to_vec(x)); };
  const ScalarFn gam_tilde = [&](const Eigen::Vector3d& x) { return std::sqrt(c(x)) * gamma(to_vec(x)); };
  for (int trial = 0; trial < 10; ++trial) {
    const Eigen::Vector3d k(3.0 * U(rng), 3.0 * U(rng), 3.0 * U(rng));
    const Eigen::Vector3d m(U(rng), U(rng), U(rng));
    const double ph = 3.0 * U(rng);
    const ScalarFn u = [=](const Eigen::Vector3d& x) { return std::sin(k.dot(x) + ph) * std::exp(0.5 * m.dot(x)); };
    const Eigen::Vector3d x = mid + 0.8 * Eigen::Vector3d(U(rng), U(rng), U(rng)).cwiseProduct(half);
    const double lhs = std::pow(c(x), 1.5) * metric_divergence(cg, gam, u, x);
    const double rhs = metric_divergence(metric, gam_tilde, u, x);
    rep.operator_identity_err = std::max(rep.operator_identity_err,
                                         std::abs(lhs - rhs) / std::max({std::abs(lhs), std::abs(rhs), 1e-12}));
  }
  return rep;
}

AlessandriniReport alessandrini_check(const FemGrid& grid, const Conductivity& gamma1,
                                      const Conductivity& gamma2,
                                      const std::function<double(const Eigen::Vector3d&)>& f1,
                                      const std::function<double(const Eigen::Vector3d&)>& f2,
                                      const MetricFn& metric) {
  const ConductivitySolver s1(grid, gamma1, metric), s2(grid, gamma2, metric);
  const Eigen::VectorXd u1 = s1.solve_boundary(f1);
  const Eigen::VectorXd u2 = s2.solve_boundary(f2);
  const Eigen::VectorXd ut = s1.solve(u2);
  const Eigen::VectorXd K1ut = s1.stiffness() * ut, K2u2 = s2.stiffness() * u2;

  AlessandriniReport rep;
  for (std::size_t b : s1.boundary()) {
    const auto i = static_cast<Eigen::Index>(b);
    rep.rhs += u1(i) * (K1ut(i) - K2u2(i));
  }

  const int n = grid.n;
  const std::size_t ne = static_cast<std::size_t>(n) * n * n;
  std::vector<double> part(ne, 0.0), mag(ne, 0.0);
  parallel_for(ne, [&](std::size_t e) {
    const int i = static_cast<int>(e % n), j = static_cast<int>((e / n) % n),
              k = static_cast<int>(e / (static_cast<std::size_t>(n) * n));
    const auto nodes = element_nodes(grid, i, j, k);
    for_each_quadrature_point(grid, i, j, k, [&](const Eigen::Vector3d& x, double w,
                                                 const std::array<double, 8>& N,
                                                 const std::array<Eigen::Vector3d, 8>& dN) {
      double v1 = 0.0, v2 = 0.0;
      Eigen::Vector3d g1 = Eigen::Vector3d::Zero(), g2 = Eigen::Vector3d::Zero();
      for (int a = 0; a < 8; ++a) {
        const auto id = static_cast<Eigen::Index>(nodes[a]);
        v1 += N[a] * u1(id);
        v2 += N[a] * u2(id);
        g1 += dN[a] * u1(id);
        g2 += dN[a] * u2(id);
      }
      const double a1 = gamma1(to_vec(x)), a2 = gamma2(to_vec(x));
      const Eigen::Vector3d V = 0.5 * std::sqrt(a1 / a2) * grad3(gamma2, x) -
                                0.5 * std::sqrt(a2 / a1) * grad3(gamma1, x);
      const Eigen::Vector3d gp = v1 * g2 + v2 * g1;
      const Eigen::Matrix3d G = metric_at(metric, x);
      const double vol = std::sqrt(G.determinant()) * w;
      const Eigen::Matrix3d Gi = G.inverse();
      part[e] += V.dot(Gi * gp) * vol;
      mag[e] += std::sqrt(V.dot(Gi * V) * gp.dot(Gi * gp)) * vol;
    });
  });
  for (std::size_t e = 0; e < ne; ++e) {
    rep.lhs += part[e];
    rep.scale += mag[e];
  }
  const double denom = std::max(std::abs(rep.lhs), std::abs(rep.rhs));
  rep.rel_err = denom > 0.0 ? std::abs(rep.lhs - rep.rhs) / denom : 0.0;
  return rep;
}

LogQuotientReport log_quotient_pde_residual(const FemGrid& grid, const Conductivity& gamma1,
                                            const Conductivity& gamma2, const MetricFn& metric,
                                            double step) {
  LogQuotientReport rep;
  std::vector<std::size_t> interior;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (grid.on_boundary(i)) {
      const Vec x = to_vec(grid.point(i));
      rep.boundary_mismatch = std::max(rep.boundary_mismatch, std::abs(std::log(gamma1(x) / gamma2(x))));
    } else {
      interior.push_back(i);
    }
  }
  const auto ni = static_cast<Eigen::Index>(interior.size());
  rep.from_logs.resize(ni);
  rep.from_divergence.resize(ni);
  const auto grad_log = [](const Conductivity& g, const Eigen::Vector3d& y) {
    return Eigen::Vector3d(grad3(g, y) / g(to_vec(y)));
  };
  parallel_for(interior.size(), [&](std::size_t t) {
    const Eigen::Vector3d x = grid.point(interior[t]);
    const Eigen::Vector3d dl = grad_log(gamma1, x) - grad_log(gamma2, x);
    const Eigen::Vector3d sl = grad_log(gamma1, x) + grad_log(gamma2, x);
    const Eigen::Matrix3d Gi = metric_at(metric, x).inverse();
    const double lap = covector_divergence(
        metric, [&](const Eigen::Vector3d& y) { return Eigen::Vector3d(grad_log(gamma1, y) - grad_log(gamma2, y)); },
        x, step);
    rep.from_logs(static_cast<Eigen::Index>(t)) = 0.5 * lap + 0.25 * sl.dot(Gi * dl);
    const double div = covector_divergence(
        metric,
        [&](const Eigen::Vector3d& y) {
          const double a1 = gamma1(to_vec(y)), a2 = gamma2(to_vec(y));
          return Eigen::Vector3d(0.5 * std::sqrt(a2 / a1) * grad3(gamma1, y) -
                                 0.5 * std::sqrt(a1 / a2) * grad3(gamma2, y));
        },
        x, step);
    rep.from_divergence(static_cast<Eigen::Index>(t)) = div / std::sqrt(gamma1(to_vec(x)) * gamma2(to_vec(x)));
  });
  rep.max_field = rep.from_logs.cwiseAbs().maxCoeff();
  const double diff = (rep.from_logs - rep.from_divergence).cwiseAbs().maxCoeff();
  rep.agreement = rep.max_field > 1e-12 ? diff / rep.max_field : diff;
  return rep;
}


LogPolarReport logpolar_map(const BallDomain& domain, const Eigen::Vector3d& x0, int n_boundary,
                            double epsilon, int n_metric_points, unsigned seed) {
  const Eigen::Vector3d axis = domain.center - x0;
  const double dist = axis.norm();
  if (dist <= domain.radius)
    throw PreconditionError("x0 lies in the closed convex hull of the domain");
  const Eigen::Matrix3d R =
      Eigen::Quaterniond::FromTwoVectors(axis / dist, Eigen::Vector3d::UnitZ()).toRotationMatrix();

  const auto forward = [&](const Eigen::Vector3d& x) {
    const Eigen::Vector3d z = R * (x - x0);
    const double r = z.norm();
    const Eigen::Vector3d w = z / r;
    return Eigen::Vector3d(std::log(r), w(0) / (1.0 + w(2)), w(1) / (1.0 + w(2)));
  };
  const auto inverse = [&](const Eigen::Vector3d& y) {
    const double p2 = y(1) * y(1) + y(2) * y(2);
    const Eigen::Vector3d w(2.0 * y(1), 2.0 * y(2), 1.0 - p2);
    return Eigen::Vector3d(x0 + R.transpose() * (std::exp(y(0)) * w / (1.0 + p2)));
  };
  const auto model_metric = [](const Eigen::Vector3d& y) -> Eigen::Matrix3d {
    const double p2 = y(1) * y(1) + y(2) * y(2);
    const double s = 4.0 / ((1.0 + p2) * (1.0 + p2));
    return std::exp(2.0 * y(0)) * Eigen::Vector3d(1.0, s, s).asDiagonal().toDenseMatrix();
  };
  const auto jacobian = [&](const Eigen::Vector3d& y) {
    Eigen::Matrix3d J;
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b)
        J(b, a) = central([&](const Eigen::Vector3d& z) { return inverse(z)(b); }, y, a, 1e-4);
    return J;
  };

  LogPolarReport rep;
  const double alpha = std::asin(domain.radius / dist);
  rep.chart = product_cylinder(constant_curvature_disc(1.0, std::tan(0.5 * alpha)),
                               std::log(dist - domain.radius), std::log(dist + domain.radius));
  rep.chart.id = "logpolar";

  // Pushforward metric at random interior points.
  std::mt19937 rng(seed);
  std::normal_distribution<double> nd;
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (int t = 0; t < n_metric_points; ++t) {
    Eigen::Vector3d d(nd(rng), nd(rng), nd(rng));
    const Eigen::Vector3d x = domain.center + domain.radius * std::cbrt(U(rng)) * d.normalized();
    const Eigen::Vector3d y = forward(x);
    const Eigen::Matrix3d J = jacobian(y);
    const Eigen::Matrix3d G = model_metric(y);
    rep.metric_err = std::max(rep.metric_err, (J.transpose() * J - G).cwiseAbs().maxCoeff() / G.cwiseAbs().maxCoeff());
    rep.phi_err = std::max(rep.phi_err, std::abs(std::log((inverse(y) - x0).norm()) - y(0)));
  }

  // Fibonacci points on the boundary sphere.
  rep.dphi_x.resize(n_boundary);
  rep.dphi_y.resize(n_boundary);
  const double golden = M_PI * (3.0 - std::sqrt(5.0));
  for (int b = 0; b < n_boundary; ++b) {
    const double zc = 1.0 - 2.0 * (b + 0.5) / n_boundary;
    const double rr = std::sqrt(1.0 - zc * zc);
    const Eigen::Vector3d nu(rr * std::cos(golden * b), rr * std::sin(golden * b), zc);
    const Eigen::Vector3d x = domain.center + domain.radius * nu;
    const Eigen::Vector3d y = forward(x);
    rep.x.push_back(x);
    rep.y.push_back(y);
    const Eigen::Vector3d xr = x - x0;
    rep.dphi_x(b) = xr.dot(nu) / xr.squaredNorm();
    // Boundary covector pulled back to y; phi = y_1.
    const Eigen::Vector3d ny = jacobian(y).transpose() * nu;
    const Eigen::Matrix3d Gi = model_metric(y).inverse();
    rep.dphi_y(b) = (Gi * ny)(0) / std::sqrt(ny.dot(Gi * ny));
    (rep.dphi_x(b) < epsilon ? rep.minus_x : rep.plus_x).push_back(b);
    (rep.dphi_y(b) < epsilon ? rep.minus_y : rep.plus_y).push_back(b);
  }
  rep.masks_equal = rep.minus_x == rep.minus_y && rep.plus_x == rep.plus_y;
  return rep;
}

namespace {

struct GridMatch {
  FemGrid grid;
  /// FEM node index of each CGO node of M.
  std::vector<std::size_t> fem;
};

GridMatch match_grid(const CGOSolution& sol) {
  const SpectralBox& box = sol.box;
  const double h = box.h1();
  if (std::abs(box.ht() - h) > 1e-12 * h) throw PreconditionError("CGO grid is not isotropic");
  GridMatch m;
  m.grid.lo = Eigen::Vector3d::Constant(sol.m_lo);
  m.grid.hi = Eigen::Vector3d::Constant(sol.m_hi);
  m.grid.n = static_cast<int>(std::lround((sol.m_hi - sol.m_lo) / h));
  if (std::abs(m.grid.n * h - (sol.m_hi - sol.m_lo)) > 1e-9) throw PreconditionError("M is not a cube of CGO nodes");
  std::vector<char> seen(m.grid.size(), 0);
  for (std::size_t node : sol.nodes) {
    const Eigen::Vector3d x = box.point(node);
    std::array<int, 3> c{};
    for (int a = 0; a < 3; ++a) {
      const double t = (x(a) - sol.m_lo) / h;
      c[a] = static_cast<int>(std::lround(t));
      if (std::abs(t - c[a]) > 1e-6) throw PreconditionError("M is not aligned with CGO nodes");
    }
    const std::size_t f = m.grid.index(c[0], c[1], c[2]);
    seen[f] = 1;
    m.fem.push_back(f);
  }
  if (std::find(seen.begin(), seen.end(), 0) != seen.end()) throw PreconditionError("CGO nodes do not cover M");
  return m;
}

// Trapezoid surface weights of the box faces at the boundary nodes.
std::vector<std::pair<std::size_t, double>> surface_weights(const FemGrid& g) {
  std::vector<std::pair<std::size_t, double>> out;
  for (std::size_t idx : g.boundary_nodes()) {
    const auto c = g.ijk(idx);
    double w = 0.0;
    for (int a = 0; a < 3; ++a) {
      if (c[a] != 0 && c[a] != g.n) continue;
      double f = 1.0;
      for (int b = 0; b < 3; ++b) {
        if (b == a) continue;
        f *= g.h(b) * ((c[b] == 0 || c[b] == g.n) ? 0.5 : 1.0);
      }
      w += f;
    }
    out.emplace_back(idx, w);
  }
  return out;
}

}  // namespace

BoundaryProbeReport boundary_term_probe(const Conductivity& gamma1, const Conductivity& gamma2,
                                        const std::vector<double>& tau_ladder,
                                        const BoundaryProbeOptions& options) {
  BoundaryProbeReport rep;
  const double eta = options.params.eta;
  const MollifiedFamily fam1(gamma1, eta), fam2(gamma2, eta);
  std::unique_ptr<ConductivitySolver> solver;
  Eigen::SparseMatrix<double> Kdiff;
  std::vector<std::pair<double, double>> s_int, s_val, s_grad;
  for (double tau : tau_ladder) {
    CGOParams p1 = options.params, p2 = options.params;
    p1.tau = p2.tau = tau;
    p1.conjugate = false;
    p2.conjugate = true;
    const CGOSolution c1 = build_cgo(p1, fam1, options.cgo);
    const CGOSolution c2 = build_cgo(p2, fam2, options.cgo);
    const GridMatch m = match_grid(c1);
    if (!solver) {
      solver = std::make_unique<ConductivitySolver>(m.grid, gamma1);
      Kdiff = assemble_stiffness(m.grid, [&](const Eigen::Vector3d& x) {
        return gamma1(to_vec(x)) - gamma2(to_vec(x));
      });
    }
    const auto nn = static_cast<Eigen::Index>(m.grid.size());
    Eigen::VectorXcd u1(nn), u2(nn);
    for (std::size_t t = 0; t < m.fem.size(); ++t) {
      u1(static_cast<Eigen::Index>(m.fem[t])) = c1.u(static_cast<Eigen::Index>(t));
      u2(static_cast<Eigen::Index>(m.fem[t])) = c2.u(static_cast<Eigen::Index>(t));
    }

    BoundaryProbePoint pt;
    pt.tau = c2.tau;
    // w = u1~ - u2: K1 w = -F, F = K_diff u2, w = 0 on dM.
    const Eigen::VectorXcd F = Kdiff.cast<std::complex<double>>() * u2;
    const Eigen::VectorXcd w = solver->solve(Eigen::VectorXcd::Zero(nn), Eigen::VectorXcd(-F));
    const Eigen::VectorXcd K1w = solver->stiffness().cast<std::complex<double>>() * w;
    for (std::size_t b : solver->boundary()) {
      const auto i = static_cast<Eigen::Index>(b);
      pt.direct_fem += u1(i) * (K1w(i) + F(i));
    }

    // Volume route and the Claim 1 quantities on the CGO nodes.
    std::vector<double> sw(m.grid.size(), 0.0);
    for (const auto& [idx, wt] : surface_weights(m.grid)) sw[idx] = wt;
    for (std::size_t t = 0; t < m.fem.size(); ++t) {
      const auto ti = static_cast<Eigen::Index>(t);
      const Eigen::Vector3d x = m.grid.point(m.fem[t]);
      const double a1 = gamma1(to_vec(x)), a2 = gamma2(to_vec(x));
      const Eigen::Vector3d V = 0.5 * std::sqrt(a1 / a2) * grad3(gamma2, x) -
                                0.5 * std::sqrt(a2 / a1) * grad3(gamma1, x);
      const Eigen::Vector3cd gp = c1.u(ti) * c2.grad_u[t] + c2.u(ti) * c1.grad_u[t];
      pt.via_identity += c1.weights[t] * (V(0) * gp(0) + V(1) * gp(1) + V(2) * gp(2));

      const double ws = sw[m.fem[t]];
      if (ws == 0.0) continue;
      const double e1 = std::exp(0.5 * c1.phi_tau(ti)), e2 = std::exp(0.5 * c2.phi_tau(ti));
      const double damp = std::exp(-c2.tau * x(0));
      const std::complex<double> du = (e1 - e2) * c2.u(ti) * damp;
      const Eigen::Vector3cd gdu =
          damp * (0.5 * (e1 * c1.grad_phi_tau[t] - e2 * c2.grad_phi_tau[t]).cast<std::complex<double>>() *
                      c2.u(ti) +
                  (e1 - e2) * c2.grad_u[t]);
      pt.delta_u += ws * std::norm(du);
      pt.grad_delta_u += ws * gdu.squaredNorm();
    }
    rep.points.push_back(pt);
    s_int.emplace_back(pt.tau, std::abs(pt.via_identity));
    s_val.emplace_back(pt.tau, pt.delta_u);
    s_grad.emplace_back(pt.tau, pt.grad_delta_u);
  }
  rep.integral = make_rate_report("boundary integral", s_int, 0.0, 0.0, 1e-14, false);
  rep.claim_value = make_rate_report("int e^{-2 tau x1} |du|^2", s_val, -2.0 - 2.0 * eta, options.slack, 1e-14, false);
  rep.claim_gradient = make_rate_report("int e^{-2 tau x1} |grad du|^2", s_grad, -2.0 * eta, options.slack, 1e-14, false);
  rep.integral.pass = rep.integral.pass && rep.integral.slope < 0.0;
  rep.pass = rep.integral.pass && rep.claim_value.pass && rep.claim_gradient.pass;
  return rep;
}

}  // namespace geotomo
