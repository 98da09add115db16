#pragma once

// Adaptive Simpson quadrature with a Richardson-corrected error estimate and a
// shared evaluation budget.

#include <cstddef>
#include <functional>

#include "molab/geometry.hpp"

namespace molab {

struct QuadratureBudget {
  std::size_t limit = 1'000'000;
  std::size_t used = 0;
  bool exhausted() const { return used >= limit; }
};

struct QuadratureResult {
  double value = 0.0;
  double err = 0.0;
  bool ok = true;          // false when the budget ran out
  bool nonfinite = false;  // an integrand value was inf or NaN
};

/// Integral of g over [a, b]. Evaluation points stay strictly inside (a, b).
QuadratureResult integrate(const std::function<double(double)>& g, double a, double b, double tol,
                           QuadratureBudget& budget);

/// Iterated integral of g over a rectangle.
QuadratureResult integrate2d(const std::function<double(double, double)>& g, const Box& box, double tol,
                             QuadratureBudget& budget);

}  // namespace molab
