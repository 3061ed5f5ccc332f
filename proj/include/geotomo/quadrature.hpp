#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <vector>

namespace geotomo {

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Gauss-Legendre rule with n points mapped onto [a, b] (Golub-Welsch).
QuadratureRule gauss_legendre(int n, double a = -1.0, double b = 1.0);

/// Composite Simpson weights for n uniform intervals of width h (n even).
std::vector<double> simpson_weights(int n_intervals, double h);

/// Four-point Lagrange weights for interpolating at offset s in [0, 1)
/// between the second and third of four equispaced nodes.
std::array<double, 4> cubic_lagrange_weights(double s);

/// Number of worker threads: GEOTOMO_THREADS if set, else the hardware count.
unsigned thread_count();

/// Runs body(i) for i in [0, n), splitting the range over thread_count()
/// threads.  body must not touch shared mutable state.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace geotomo
