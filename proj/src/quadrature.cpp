#include "geotomo/quadrature.hpp"

#include <algorithm>
#include <cstdlib>
#include <string>
#include <thread>

#include <Eigen/Dense>

#include "geotomo/errors.hpp"

namespace geotomo {

QuadratureRule gauss_legendre(int n, double a, double b) {
  if (n < 1) throw Error("gauss_legendre: n must be positive");
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k) {
    const double beta = k / std::sqrt(4.0 * k * k - 1.0);
    jacobi(k, k - 1) = beta;
    jacobi(k - 1, k) = beta;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(jacobi);
  QuadratureRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const double half = 0.5 * (b - a);
  for (int i = 0; i < n; ++i) {
    const double v0 = eig.eigenvectors()(0, i);
    rule.nodes[i] = a + half * (eig.eigenvalues()(i) + 1.0);
    rule.weights[i] = 2.0 * v0 * v0 * half;
  }
  return rule;
}

std::vector<double> simpson_weights(int n_intervals, double h) {
  if (n_intervals < 2 || n_intervals % 2 != 0) {
    throw Error("simpson_weights: need an even number of intervals");
  }
  std::vector<double> w(n_intervals + 1);
  for (int i = 0; i <= n_intervals; ++i) {
    double c = (i == 0 || i == n_intervals) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
    w[i] = c * h / 3.0;
  }
  return w;
}

std::array<double, 4> cubic_lagrange_weights(double s) {
  // nodes at -1, 0, 1, 2
  return {-s * (s - 1.0) * (s - 2.0) / 6.0, (s + 1.0) * (s - 1.0) * (s - 2.0) / 2.0,
          -(s + 1.0) * s * (s - 2.0) / 2.0, (s + 1.0) * s * (s - 1.0) / 6.0};
}

unsigned thread_count() {
  if (const char* env = std::getenv("GEOTOMO_THREADS")) {
    try {
      const int v = std::stoi(env);
      if (v > 0) return static_cast<unsigned>(v);
    } catch (...) {
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body) {
  const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(thread_count(), n));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < n; i += workers) body(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace geotomo
