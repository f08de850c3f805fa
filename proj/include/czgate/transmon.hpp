#pragma once

// Single transmon, H = 4 E_C n^2 - E_J cos(phi), diagonalized exactly in the
// charge basis n in [-n_cut, n_cut] (offset charge zero).

#include <array>
#include <cmath>
#include <sstream>

#include "czgate/linalg.hpp"
#include "czgate/units.hpp"

namespace czgate {

struct TransmonSpec {
  double charging_energy = 0.0;   // E_C, rad/ns
  double josephson_energy = 0.0;  // E_J, rad/ns
  int charge_cutoff = 20;
  int levels_kept = 8;
  double omega01 = 0.0;        // E_1 - E_0 of the exact spectrum
  double anharmonicity = 0.0;  // (E_2 - E_1) - (E_1 - E_0)
};

/// Tridiagonal charge-basis matrix: diagonal 4 E_C k^2, off-diagonal -E_J/2.
inline RealMatrix charge_basis_hamiltonian(double charging_energy, double josephson_energy,
                                           int charge_cutoff) {
  if (charge_cutoff < 1) throw ValidationError("charge_cutoff must be >= 1");
  const int dim = 2 * charge_cutoff + 1;
  RealMatrix h = RealMatrix::Zero(dim, dim);
  for (int i = 0; i < dim; ++i) {
    const double k = i - charge_cutoff;
    h(i, i) = 4.0 * charging_energy * k * k;
    if (i + 1 < dim) {
      h(i, i + 1) = -0.5 * josephson_energy;
      h(i + 1, i) = -0.5 * josephson_energy;
    }
  }
  return h;
}

/// Charge operator diag(k) in the same basis.
inline RealMatrix charge_operator(int charge_cutoff) {
  const int dim = 2 * charge_cutoff + 1;
  RealMatrix n = RealMatrix::Zero(dim, dim);
  for (int i = 0; i < dim; ++i) n(i, i) = i - charge_cutoff;
  return n;
}

namespace detail {

inline RealVector lowest_levels(double ec, double ej, int cutoff, int count) {
  return eig_symmetric(charge_basis_hamiltonian(ec, ej, cutoff)).values.head(count);
}

inline std::array<double, 2> spectrum_targets(double ec, double ej, int cutoff) {
  const RealVector e = lowest_levels(ec, ej, cutoff, 3);
  const double w01 = e(1) - e(0);
  return {w01, (e(2) - e(1)) - w01};
}

}  // namespace detail

/// Builds a spec from E_C, E_J and fills in the exact omega01 and anharmonicity.
inline TransmonSpec make_transmon(double charging_energy, double josephson_energy,
                                  int charge_cutoff = 20, int levels_kept = 8) {
  if (!(charging_energy > 0.0) || !(josephson_energy > 0.0)) {
    throw ValidationError("transmon: E_C and E_J must be positive");
  }
  if (josephson_energy / charging_energy < 20.0) {
    throw ValidationError("transmon: E_J/E_C must be >= 20 (transmon regime)");
  }
  if (levels_kept < 3) throw ValidationError("transmon: levels_kept must be >= 3");
  if (levels_kept > 2 * charge_cutoff + 1) {
    throw ValidationError("transmon: levels_kept exceeds charge-basis dimension");
  }
  const auto [w01, alpha] = detail::spectrum_targets(charging_energy, josephson_energy, charge_cutoff);
  return {charging_energy, josephson_energy, charge_cutoff, levels_kept, w01, alpha};
}

/// Charge-basis Hamiltonian of a spec, after checking that the lowest
/// `levels_kept` levels are converged in the cutoff.
inline HermitianOperator single_transmon_hamiltonian(const TransmonSpec& spec) {
  constexpr double kTolerance = units::two_pi * 1e-6;
  if (spec.charge_cutoff < 10) {
    throw ValidationError("single_transmon_hamiltonian: charge_cutoff must be >= 10");
  }
  auto converged = [&](int cutoff) {
    const RealVector a = detail::lowest_levels(spec.charging_energy, spec.josephson_energy, cutoff,
                                               spec.levels_kept);
    const RealVector b = detail::lowest_levels(spec.charging_energy, spec.josephson_energy,
                                               2 * cutoff, spec.levels_kept);
    return (a - b).cwiseAbs().maxCoeff() < kTolerance;
  };
  if (!converged(spec.charge_cutoff)) {
    int required = spec.charge_cutoff + 1;
    while (!converged(required) && required < 64 * spec.charge_cutoff) ++required;
    std::ostringstream os;
    os << "single_transmon_hamiltonian: charge_cutoff " << spec.charge_cutoff
       << " not converged; requires charge_cutoff >= " << required;
    throw NumericalError(os.str());
  }
  return HermitianOperator(
      charge_basis_hamiltonian(spec.charging_energy, spec.josephson_energy, spec.charge_cutoff));
}

/// Lowest levels of a transmon: energies (ground at zero) and the charge
/// operator projected onto them. Eigenvector signs are fixed so that
/// <k|n|k+1> > 0, making every nearest-level matrix element positive.
struct TransmonLevels {
  RealVector energies;
  RealMatrix charge;
};

inline TransmonLevels transmon_levels(const TransmonSpec& spec) {
  const auto sys = eig_symmetric(
      charge_basis_hamiltonian(spec.charging_energy, spec.josephson_energy, spec.charge_cutoff));
  const int levels = spec.levels_kept;
  RealMatrix v = sys.vectors.leftCols(levels);
  const RealMatrix n_op = charge_operator(spec.charge_cutoff);
  for (int k = 1; k < levels; ++k) {
    const double elem = v.col(k - 1).dot(n_op * v.col(k));
    if (elem < 0.0) v.col(k) *= -1.0;
  }
  TransmonLevels out;
  out.energies = sys.values.head(levels).array() - sys.values(0);
  out.charge = v.transpose() * n_op * v;
  return out;
}

/// Finds (E_C, E_J) whose exact spectrum has the requested omega01 and
/// anharmonicity. Seeded from E_C ~ -alpha, omega01 ~ sqrt(8 E_C E_J) - E_C and
/// refined by Newton iteration with a finite-difference Jacobian.
inline TransmonSpec calibrate_transmon(double target_omega01, double target_alpha,
                                       int charge_cutoff = 20, int levels_kept = 8) {
  if (!(target_omega01 > 0.0)) throw ValidationError("calibrate_transmon: omega01 must be > 0");
  if (!(target_alpha < 0.0)) throw ValidationError("calibrate_transmon: alpha must be < 0");
  constexpr int kMaxIterations = 100;
  constexpr double kResidualTarget = 1e-12;
  constexpr double kResidualAccept = 1e-9;  // rad/ns; resonance conditions need far below 2pi x 1e-4

  Eigen::Vector2d x;
  x(0) = -target_alpha;
  x(1) = std::pow(target_omega01 + x(0), 2) / (8.0 * x(0));
  auto residual = [&](const Eigen::Vector2d& p) {
    const auto [w, a] = detail::spectrum_targets(p(0), p(1), charge_cutoff);
    return Eigen::Vector2d(w - target_omega01, a - target_alpha);
  };

  Eigen::Vector2d r = residual(x);
  for (int it = 0; it < kMaxIterations && r.cwiseAbs().maxCoeff() > kResidualTarget; ++it) {
    Eigen::Matrix2d jac;
    for (int j = 0; j < 2; ++j) {
      Eigen::Vector2d xp = x;
      const double step = 1e-6 * x(j);
      xp(j) += step;
      jac.col(j) = (residual(xp) - r) / step;
    }
    Eigen::Vector2d dx = jac.partialPivLu().solve(-r);
    // Damped update keeps both energies positive.
    double lambda = 1.0;
    while ((x + lambda * dx).minCoeff() <= 0.0) lambda *= 0.5;
    x += lambda * dx;
    r = residual(x);
  }
  if (r.cwiseAbs().maxCoeff() > kResidualAccept) {
    std::ostringstream os;
    os << "calibrate_transmon: no convergence in " << kMaxIterations
       << " iterations (residual " << r.cwiseAbs().maxCoeff() << " rad/ns)";
    throw NumericalError(os.str());
  }
  return make_transmon(x(0), x(1), charge_cutoff, levels_kept);
}

}  // namespace czgate
