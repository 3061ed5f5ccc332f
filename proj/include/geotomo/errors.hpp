#pragma once

#include <cstdio>
#include <stdexcept>
#include <string>

namespace geotomo {

/// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A point or sample fell outside the chart (or grid) it was evaluated on.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A geodesic ran past the time budget without reaching the boundary.
class TrappedGeodesicError : public Error {
 public:
  using Error::Error;
};

/// A geodesic left the enlarged manifold before reaching the requested length.
class RangeError : public Error {
 public:
  using Error::Error;
};

/// An iterative method (Newton, CG, Neumann series) failed to converge.
class NonconvergenceError : public Error {
 public:
  NonconvergenceError(const std::string& what, double residual)
      : Error(with_residual(what, residual)),
        residual_(residual) {}
  double residual() const { return residual_; }

 private:
  static std::string with_residual(const std::string& what, double residual) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3e", residual);
    return what + " (residual " + buf + ")";
  }
  double residual_;
};

/// tau sits on (or numerically too close to) the exceptional set of the
/// shifted Laplacian.
class ExceptionalTauError : public Error {
 public:
  ExceptionalTauError(const std::string& what, double tau, double condition)
      : Error(what), tau_(tau), condition_(condition) {}
  double tau() const { return tau_; }
  double condition() const { return condition_; }

 private:
  double tau_;
  double condition_;
};

/// The perturbation operator K has norm >= 1; the Neumann series diverges.
class NeumannDivergenceError : public Error {
 public:
  NeumannDivergenceError(const std::string& what, double norm)
      : Error(what), norm_(norm) {}
  double norm() const { return norm_; }

 private:
  double norm_;
};

/// Violated operation precondition (e.g. x0 inside the convex hull).
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// Stiffness assembly met a nonpositive coefficient or metric.
class AssemblyError : public Error {
 public:
  using Error::Error;
};

/// Invalid or unparsable experiment configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace geotomo
