#pragma once

// Time-dependent Schrodinger propagation, i d/dt psi = H(t) psi.
//
// The default path is an adaptive embedded Runge-Kutta-Fehlberg 7(8) stepper
// from Boost.Odeint driven by a hand-rolled step loop, so that breakdown can be
// reported with the time at which it occurred. A fourth-order Magnus
// (piecewise-exponential) propagator on a uniform grid is kept as an oracle.

#include <boost/numeric/odeint/stepper/controlled_runge_kutta.hpp>
#include <boost/numeric/odeint/stepper/generation.hpp>
#include <boost/numeric/odeint/stepper/runge_kutta_fehlberg78.hpp>

#include <cmath>
#include <cstddef>
#include <sstream>
#include <vector>

#include "czgate/linalg.hpp"

namespace czgate {

enum class PropagationMethod { adaptive, piecewise_exponential };

struct PropagationConfig {
  double abs_tol = 1e-12;
  double rel_tol = 1e-12;
  double max_step = 0.05;  // ns
  PropagationMethod method = PropagationMethod::adaptive;
  std::size_t slices = 10000;  // piecewise_exponential only

  void validate() const {
    auto in_range = [](double tol) { return tol > 0.0 && tol <= 1e-6; };
    if (!in_range(abs_tol) || !in_range(rel_tol)) {
      throw ValidationError("PropagationConfig: tolerances must lie in (0, 1e-6]");
    }
    if (!(max_step > 0.0)) throw ValidationError("PropagationConfig: max_step must be > 0");
    if (method == PropagationMethod::piecewise_exponential && slices == 0) {
      throw ValidationError("PropagationConfig: slices must be > 0");
    }
  }
};

namespace detail {

inline const Matrix& as_matrix(const Matrix& m) { return m; }
inline const Matrix& as_matrix(const HermitianOperator& h) { return h.matrix(); }

using OdeState = std::vector<Complex>;

/// Adaptive RKF7(8) integration of d/dt psi = rhs(psi, t) for a matrix of
/// columns; rhs(psi, dpsi, t) receives Eigen maps.
template <class Rhs>
Matrix evolve_adaptive_rhs(Rhs& rhs_fn, const Matrix& initial, double t0, double t1,
                           const PropagationConfig& cfg) {
  namespace odeint = boost::numeric::odeint;
  const Eigen::Index rows = initial.rows();
  const Eigen::Index cols = initial.cols();

  OdeState x(initial.data(), initial.data() + initial.size());
  auto rhs = [&](const OdeState& in, OdeState& out, double t) {
    Eigen::Map<const Matrix> psi(in.data(), rows, cols);
    Eigen::Map<Matrix> dpsi(out.data(), rows, cols);
    rhs_fn(psi, dpsi, t);
  };

  auto stepper = odeint::make_controlled(cfg.abs_tol, cfg.rel_tol, cfg.max_step,
                                         odeint::runge_kutta_fehlberg78<OdeState>());
  const double span = t1 - t0;
  const double min_step = 1e-13 * std::max(1.0, std::abs(span));
  double t = t0;
  double dt = std::min(cfg.max_step, span);
  while (t < t1) {
    const bool last = dt >= t1 - t;
    if (last) dt = t1 - t;
    const double t_before = t;
    if (stepper.try_step(rhs, x, t, dt) == odeint::success) {
      if (!std::isfinite(std::abs(x.front())) || !std::isfinite(std::abs(x.back()))) {
        std::ostringstream os;
        os << "propagate: non-finite state at t = " << t << " ns";
        throw NumericalError(os.str());
      }
      if (last) t = t1;
      continue;
    }
    t = t_before;
    if (dt < min_step) {
      std::ostringstream os;
      os << "propagate: step size underflow at t = " << t << " ns";
      throw StepUnderflowError(os.str(), t);
    }
  }
  return Eigen::Map<const Matrix>(x.data(), rows, cols);
}

template <class HamiltonianFn>
Matrix evolve_adaptive(HamiltonianFn& hamiltonian, const Matrix& initial, double t0, double t1,
                       const PropagationConfig& cfg) {
  auto rhs = [&](const Eigen::Map<const Matrix>& psi, Eigen::Map<Matrix>& dpsi, double t) {
    decltype(auto) h = hamiltonian(t);
    dpsi.noalias() = as_matrix(h) * psi;
    dpsi *= -I;
  };
  return evolve_adaptive_rhs(rhs, initial, t0, t1, cfg);
}

/// Fourth-order Magnus with two Gauss-Legendre nodes per slice.
template <class HamiltonianFn>
Matrix evolve_magnus4(HamiltonianFn& hamiltonian, const Matrix& initial, double t0, double t1,
                      std::size_t slices) {
  const double h = (t1 - t0) / static_cast<double>(slices);
  const double c = std::sqrt(3.0) / 6.0;
  Matrix psi = initial;
  if (h == 0.0) return psi;
  for (std::size_t k = 0; k < slices; ++k) {
    const double ta = t0 + static_cast<double>(k) * h;
    const Matrix h1 = as_matrix(hamiltonian(ta + (0.5 - c) * h));
    const Matrix h2 = as_matrix(hamiltonian(ta + (0.5 + c) * h));
    // Omega = -i h/2 (H1 + H2) - (sqrt(3)/12) h^2 [H2, H1]; write Omega = -i K with K Hermitian.
    const Matrix k_eff = 0.5 * h * (h1 + h2) - I * (std::sqrt(3.0) / 12.0) * h * h * commutator(h2, h1);
    psi = expm_hermitian(0.5 * (k_eff + k_eff.adjoint()), 1.0) * psi;
  }
  return psi;
}

}  // namespace detail

/// Evolve the columns of `initial` from t0 to t1.
template <class HamiltonianFn>
Matrix evolve(HamiltonianFn&& hamiltonian, const Matrix& initial, double t0, double t1,
              const PropagationConfig& cfg = {}) {
  cfg.validate();
  if (t1 < t0) throw ValidationError("propagate: requires t1 >= t0");
  if (t1 == t0) return initial;
  if (cfg.method == PropagationMethod::piecewise_exponential) {
    return detail::evolve_magnus4(hamiltonian, initial, t0, t1, cfg.slices);
  }
  return detail::evolve_adaptive(hamiltonian, initial, t0, t1, cfg);
}

/// Evolve across ascending `breakpoints` (first and last are the interval
/// ends), restarting the stepper at each one. Use this when H(t) has kinks: an
/// embedded error estimate underrates a step that straddles a derivative jump.
template <class HamiltonianFn>
Matrix evolve_piecewise(HamiltonianFn&& hamiltonian, const Matrix& initial, const std::vector<double>& breakpoints,
                        const PropagationConfig& cfg = {}) {
  if (breakpoints.size() < 2) throw ValidationError("evolve_piecewise: needs at least two breakpoints");
  Matrix psi = initial;
  for (std::size_t k = 1; k < breakpoints.size(); ++k) {
    if (breakpoints[k] < breakpoints[k - 1]) throw ValidationError("evolve_piecewise: breakpoints must ascend");
    psi = evolve(hamiltonian, psi, breakpoints[k - 1], breakpoints[k], cfg);
  }
  return psi;
}

template <class HamiltonianFn>
StateVector propagate(HamiltonianFn&& hamiltonian, const StateVector& psi0, double t0, double t1,
                      const PropagationConfig& cfg = {}) {
  Vector out = evolve(hamiltonian, Matrix(psi0.amplitudes()), t0, t1, cfg).col(0);
  const double norm = out.norm();
  if (std::abs(norm - 1.0) > StateVector::kNormTolerance) {
    std::ostringstream os;
    os << "propagate: norm drifted to " << norm << "; tighten tolerances";
    throw NumericalError(os.str());
  }
  return StateVector(std::move(out));
}

/// Full propagator U(t1, t0); column i is the evolved basis state i.
template <class HamiltonianFn>
Matrix propagator_matrix(HamiltonianFn&& hamiltonian, Eigen::Index dim, double t0, double t1,
                         const PropagationConfig& cfg = {}) {
  return evolve(hamiltonian, Matrix::Identity(dim, dim), t0, t1, cfg);
}

}  // namespace czgate
