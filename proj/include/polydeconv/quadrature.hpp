#pragma once

#include <cstddef>
#include <functional>

namespace polydeconv {

struct QuadratureOptions {
  double abs_tol = 1e-10;
  double rel_tol = 1e-8;
  std::size_t max_subdivisions = 2000;
};

struct QuadratureResult {
  double value = 0.0;
  double abs_error = 0.0;
  std::size_t evaluations = 0;
  std::size_t subdivisions = 0;
  bool converged = false;
};

/// Globally adaptive 15-point Gauss-Kronrod integration of f over [a, b].
///
/// The interval with the largest error estimate is bisected until the summed
/// estimate drops below max(abs_tol, rel_tol * |value|) or the subdivision
/// budget runs out. Never throws; check `converged`.
QuadratureResult integrate(const std::function<double(double)>& f, double a,
                           double b, const QuadratureOptions& options = {});

/// As integrate(), but throws PrecisionError when the tolerance is missed.
double integrate_or_throw(const std::function<double(double)>& f, double a,
                          double b, const QuadratureOptions& options = {});

}  // namespace polydeconv
