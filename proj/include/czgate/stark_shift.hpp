#pragma once

// Schrieffer-Wolff elimination of |02> from the S3 block
//
//   H3 = [[A + 2D, J2, 0], [J2, D, J3], [0, J3, 0]],   A = alpha_a + alpha_b,
//
// in the basis (|02>, |11>, |20>), with H0 keeping the |11>-|20> coupling and
// V the J2 coupling. The generator S = [[0, a1, a2], [-a1, 0, 0], [-a2, 0, 0]]
// solves [S, H0] = -V, and H' = H0 + [S, V]/2 leaves the (|11>, |20>) block
// [[D + dOmega, J3 + dJ3], [J3 + dJ3, 0]].

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include <unsupported/Eigen/MatrixFunctions>

#include "czgate/device.hpp"

namespace czgate {

struct StarkShiftData {
  double delta_omega = 0.0;  // rad/ns
  double delta_j3 = 0.0;     // rad/ns
  double a1 = 0.0;
  double a2 = 0.0;
};

inline StarkShiftData sw_reduction(double alpha_sum, double detuning, double j2, double j3) {
  const double upper = alpha_sum + 2.0 * detuning;
  const double middle = alpha_sum + detuning;
  if (std::abs(j3) >= std::abs(middle) / 4.0) {
    throw ValidationError("sw_reduction: requires |J3| < |alpha_a + alpha_b + detuning| / 4");
  }
  const double denominator = j3 * j3 - middle * upper;
  if (std::abs(denominator) < 1e-6) {
    std::ostringstream os;
    os << "sw_reduction: resonant breakdown, denominator " << denominator;
    throw NumericalError(os.str());
  }
  StarkShiftData s;
  s.a1 = -j2 * upper / denominator;
  s.a2 = -j2 * j3 / denominator;
  s.delta_omega = j2 * j2 * upper / denominator;
  s.delta_j3 = 0.5 * j2 * j2 * j3 / denominator;
  return s;
}

inline StarkShiftData sw_reduction(const DeviceSpec& d, double j2, double j3) {
  return sw_reduction(d.qubit_a.anharmonicity + d.qubit_b.anharmonicity, d.detuning, j2, j3);
}

/// 3x3 S3 block with the zero of energy on |20>.
inline RealMatrix s3_block(double alpha_sum, double detuning, double j2, double j3) {
  RealMatrix h(3, 3);
  h << alpha_sum + 2.0 * detuning, j2, 0.0, j2, detuning, j3, 0.0, j3, 0.0;
  return h;
}

/// Effective (|11>, |20>) block after the transformation.
inline RealMatrix s3_effective_block(double detuning, double j3, const StarkShiftData& s) {
  RealMatrix h(2, 2);
  h << detuning + s.delta_omega, j3 + s.delta_j3, j3 + s.delta_j3, 0.0;
  return h;
}

/// The SW generator as a matrix, for checks of [S, H0] = -V.
inline RealMatrix sw_generator(const StarkShiftData& s) {
  RealMatrix g(3, 3);
  g << 0.0, s.a1, s.a2, -s.a1, 0.0, 0.0, -s.a2, 0.0, 0.0;
  return g;
}

struct SwHoldComparison {
  double period = 0.0;          // ns, one |11> <-> |20> oscillation of the reduced block
  double max_gap = 0.0;         // max |P11(3x3) - P11(SW)| over the period
  double max_gap_no_frame = 0.0;  // same, ignoring the e^{-+S} frame change
};

/// |11> population over one hold period under the exact S3 block and under
/// the SW-reduced 2-level block, U ~ e^{-S} (e^{-i H' t}) e^{S}, sampled at
/// `samples` + 1 times.
inline SwHoldComparison sw_hold_comparison(double alpha_sum, double detuning, double j2, double j3,
                                           int samples = 1000) {
  const StarkShiftData s = sw_reduction(alpha_sum, detuning, j2, j3);
  const RealMatrix h3 = s3_block(alpha_sum, detuning, j2, j3);
  const RealMatrix eff = s3_effective_block(detuning, j3, s);
  const RealMatrix gen = sw_generator(s);

  RealMatrix v = RealMatrix::Zero(3, 3);
  v(0, 1) = v(1, 0) = j2;
  const RealMatrix h0 = h3 - v;
  const RealMatrix rotated = h0 + 0.5 * (gen * v - v * gen);
  Matrix hp = Matrix::Zero(3, 3);
  hp(0, 0) = rotated(0, 0);
  hp.block(1, 1, 2, 2) = eff.cast<Complex>();

  const Matrix into = gen.cast<Complex>().exp();
  const Matrix back = (-gen).cast<Complex>().exp();
  const double dp = eff(0, 0);
  const double jp = eff(0, 1);

  SwHoldComparison out;
  out.period = 2.0 * std::numbers::pi / std::sqrt(dp * dp + 4.0 * jp * jp);
  for (int k = 0; k <= samples; ++k) {
    const double t = out.period * k / samples;
    const Matrix exact = expm_hermitian(h3.cast<Complex>(), t);
    const Matrix reduced = expm_hermitian(hp, t);
    const double p_exact = std::norm(exact(1, 1));
    const double p_sw = std::norm((back * reduced * into)(1, 1));
    const double p_plain = std::norm(reduced(1, 1));
    out.max_gap = std::max(out.max_gap, std::abs(p_exact - p_sw));
    out.max_gap_no_frame = std::max(out.max_gap_no_frame, std::abs(p_exact - p_plain));
  }
  return out;
}

}  // namespace czgate
