#pragma once

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <sstream>

#include "czgate/errors.hpp"

namespace czgate {

/// Adaptive 61-point Gauss-Kronrod quadrature on [a, b] with an absolute error
/// budget; throws if the reported error estimate exceeds it.
///
/// The integrand is mapped onto [-1, 1] here because Boost (1.74) reports the
/// error of each panel in the reference-interval scale, overstating it by
/// 2 / (b - a) on short intervals.
template <class F>
double integrate(F&& f, double a, double b, double abs_tol = 1e-12) {
  if (a == b) return 0.0;
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  auto mapped = [&](double x) { return half * f(mid + half * x); };
  double error = 0.0;
  const double value = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
      mapped, -1.0, 1.0, 15, 1e-13, &error);
  if (!(error <= abs_tol) || !std::isfinite(value)) {
    std::ostringstream os;
    os << "integrate: error estimate " << error << " exceeds tolerance " << abs_tol;
    throw NumericalError(os.str());
  }
  return value;
}

}  // namespace czgate
