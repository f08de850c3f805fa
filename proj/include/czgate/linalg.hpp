#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <sstream>

#include "czgate/errors.hpp"

namespace czgate {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;

inline constexpr Complex I{0.0, 1.0};

/// Largest entrywise modulus.
inline double max_abs(const Matrix& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

/// Max entrywise deviation of `m` from its adjoint.
inline double hermitian_asymmetry(const Matrix& m) {
  return max_abs(m - m.adjoint());
}

/// Dense Hermitian matrix in angular-frequency units.
///
/// The constructor rejects inputs whose asymmetry exceeds 1e-12 relative to
/// max(1, max|H_ij|); the stored matrix is symmetrized exactly.
class HermitianOperator {
 public:
  static constexpr double kRelTolerance = 1e-12;

  explicit HermitianOperator(Matrix m) : m_(std::move(m)) {
    if (m_.rows() < 1 || m_.rows() != m_.cols()) {
      throw ValidationError("HermitianOperator: matrix must be square with dim >= 1");
    }
    const double asym = hermitian_asymmetry(m_);
    const double scale = std::max(1.0, max_abs(m_));
    if (asym > kRelTolerance * scale) {
      std::ostringstream os;
      os << "HermitianOperator: input is not Hermitian (max |H - H^dagger| = " << asym << ")";
      throw HermiticityError(os.str(), asym);
    }
    m_ = 0.5 * (m_ + m_.adjoint()).eval();
  }

  explicit HermitianOperator(const RealMatrix& m) : HermitianOperator(Matrix(m.cast<Complex>())) {}

  Eigen::Index dim() const noexcept { return m_.rows(); }
  const Matrix& matrix() const noexcept { return m_; }
  Complex operator()(Eigen::Index i, Eigen::Index j) const { return m_(i, j); }

 private:
  Matrix m_;
};

/// Normalized state vector.
class StateVector {
 public:
  static constexpr double kNormTolerance = 1e-10;

  explicit StateVector(Vector amplitudes) : v_(std::move(amplitudes)) {
    if (v_.size() < 1) throw ValidationError("StateVector: dim must be >= 1");
    if (std::abs(v_.norm() - 1.0) > kNormTolerance) {
      std::ostringstream os;
      os << "StateVector: amplitudes are not normalized (norm = " << v_.norm() << ")";
      throw ValidationError(os.str());
    }
  }

  static StateVector basis(Eigen::Index dim, Eigen::Index k) {
    Vector v = Vector::Zero(dim);
    v(k) = 1.0;
    return StateVector(std::move(v));
  }

  Eigen::Index dim() const noexcept { return v_.size(); }
  const Vector& amplitudes() const noexcept { return v_; }
  Complex operator[](Eigen::Index k) const { return v_(k); }

 private:
  Vector v_;
};

struct EigenSystem {
  RealVector values;  // ascending
  Matrix vectors;     // columns are eigenvectors
};

/// Full eigendecomposition of a Hermitian operator (LAPACK-style tridiagonal QR via Eigen).
inline EigenSystem eig_hermitian(const HermitianOperator& h) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(h.matrix());
  if (solver.info() != Eigen::Success) {
    throw NumericalError("eig_hermitian: eigensolver did not converge");
  }
  return {solver.eigenvalues(), solver.eigenvectors()};
}

/// Real symmetric variant; eigenvectors stay real.
struct RealEigenSystem {
  RealVector values;
  RealMatrix vectors;
};

inline RealEigenSystem eig_symmetric(const RealMatrix& h) {
  Eigen::SelfAdjointEigenSolver<RealMatrix> solver(h);
  if (solver.info() != Eigen::Success) {
    throw NumericalError("eig_symmetric: eigensolver did not converge");
  }
  return {solver.eigenvalues(), solver.eigenvectors()};
}

/// exp(-i H t) for Hermitian H.
inline Matrix expm_hermitian(const Matrix& h, double t) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(h);
  const Vector phases = (-I * t * solver.eigenvalues().cast<Complex>()).array().exp().matrix();
  return solver.eigenvectors() * phases.asDiagonal() * solver.eigenvectors().adjoint();
}

inline Matrix commutator(const Matrix& a, const Matrix& b) { return a * b - b * a; }

/// Unitarity defect max|U^dagger U - 1|.
inline double unitarity_defect(const Matrix& u) {
  return max_abs(u.adjoint() * u - Matrix::Identity(u.cols(), u.cols()));
}

/// Max entrywise distance between a and b after removing the best global phase.
inline double distance_up_to_phase(const Matrix& a, const Matrix& b) {
  const Complex overlap = (b.adjoint() * a).trace();
  const Complex phase = std::abs(overlap) > 0.0 ? overlap / std::abs(overlap) : Complex{1.0};
  return max_abs(a - phase * b);
}

inline double distance_up_to_phase(const Vector& a, const Vector& b) {
  return distance_up_to_phase(Matrix(a), Matrix(b));
}

namespace pauli {

inline Matrix x() {
  Matrix m(2, 2);
  m << 0.0, 1.0, 1.0, 0.0;
  return m;
}
inline Matrix y() {
  Matrix m(2, 2);
  m << 0.0, -I, I, 0.0;
  return m;
}
inline Matrix z() {
  Matrix m(2, 2);
  m << 1.0, 0.0, 0.0, -1.0;
  return m;
}

}  // namespace pauli

}  // namespace czgate
