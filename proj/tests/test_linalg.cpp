#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <random>

#include "czgate/linalg.hpp"

using namespace czgate;
using Catch::Matchers::WithinAbs;

namespace {

Matrix random_hermitian(std::mt19937_64& rng, int dim, double scale = 1.0) {
  std::normal_distribution<double> g;
  Matrix a(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) a(i, j) = Complex(g(rng), g(rng));
  return scale * 0.5 * (a + a.adjoint());
}

// Cyclic Jacobi rotations on a real symmetric matrix; returns sorted eigenvalues.
RealVector jacobi_eigenvalues(RealMatrix a) {
  const Eigen::Index n = a.rows();
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (Eigen::Index p = 0; p < n; ++p)
      for (Eigen::Index q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    if (off < 1e-30) break;
    for (Eigen::Index p = 0; p < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        if (std::abs(a(p, q)) < 1e-300) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
      }
    }
  }
  RealVector d = a.diagonal();
  std::sort(d.data(), d.data() + d.size());
  return d;
}

// Real 2n x 2n embedding [[Re, -Im], [Im, Re]]: every eigenvalue of H appears twice.
RealMatrix real_embedding(const Matrix& h) {
  const Eigen::Index n = h.rows();
  RealMatrix r(2 * n, 2 * n);
  r << h.real(), -h.imag(), h.imag(), h.real();
  return r;
}

// exp(-i H t) by scaling and squaring of a truncated Taylor series.
Matrix taylor_expm(const Matrix& h, double t) {
  Matrix a = -I * t * h;
  int squarings = 0;
  while (max_abs(a) > 0.1) {
    a /= 2.0;
    ++squarings;
  }
  Matrix sum = Matrix::Identity(h.rows(), h.cols());
  Matrix term = sum;
  for (int k = 1; k < 30; ++k) {
    term = term * a / static_cast<double>(k);
    sum += term;
  }
  for (int k = 0; k < squarings; ++k) sum = sum * sum;
  return sum;
}

}  // namespace

TEST_CASE("HermitianOperator validates and symmetrizes its input", "[linalg]") {
  Matrix m(2, 2);
  m << 1.0, Complex(0.0, 1.0), Complex(0.0, -1.0), 2.0;
  const HermitianOperator h(m);
  CHECK(h.dim() == 2);
  CHECK(hermitian_asymmetry(h.matrix()) == 0.0);

  Matrix bad = m;
  bad(0, 1) = 3.0;
  CHECK_THROWS_AS(HermitianOperator(bad), HermiticityError);
  try {
    HermitianOperator{bad};
  } catch (const HermiticityError& e) {
    CHECK(e.max_asymmetry() > 1.0);
  }
  CHECK_THROWS_AS(HermitianOperator(Matrix(2, 3)), ValidationError);
  CHECK_THROWS_AS(HermitianOperator(Matrix(0, 0)), ValidationError);

  Matrix tiny = m;
  tiny(0, 1) += 1e-14;
  CHECK_NOTHROW(HermitianOperator(tiny));
}

TEST_CASE("StateVector requires unit norm", "[linalg]") {
  Vector v(2);
  v << 1.0, 1.0;
  CHECK_THROWS_AS(StateVector(v), ValidationError);
  CHECK_NOTHROW(StateVector(v / std::sqrt(2.0)));
  CHECK_THROWS_AS(StateVector(Vector(0)), ValidationError);
  const StateVector b = StateVector::basis(4, 2);
  CHECK(b[2] == Complex(1.0));
  CHECK(b.amplitudes().norm() == 1.0);
}

TEST_CASE("Hermitian eigensolver agrees with a Jacobi oracle", "[linalg]") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    const int dim = 2 + trial % 9;
    const Matrix h = random_hermitian(rng, dim, 3.0);
    const EigenSystem sys = eig_hermitian(HermitianOperator(h));
    const RealVector oracle = jacobi_eigenvalues(real_embedding(h));
    for (int k = 0; k < dim; ++k) {
      CHECK_THAT(sys.values(k), WithinAbs(oracle(2 * k), 1e-10));
      CHECK_THAT(sys.values(k), WithinAbs(oracle(2 * k + 1), 1e-10));
    }
    CHECK(max_abs(h * sys.vectors - sys.vectors * sys.values.cast<Complex>().asDiagonal()) < 1e-10);
    CHECK(unitarity_defect(sys.vectors) < 1e-12);
  }
}

TEST_CASE("Real symmetric eigensolver agrees with a Jacobi oracle", "[linalg]") {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 30; ++trial) {
    const int dim = 3 + trial % 12;
    RealMatrix a(dim, dim);
    for (int i = 0; i < dim; ++i)
      for (int j = 0; j < dim; ++j) a(i, j) = g(rng);
    a = (a + a.transpose()).eval();
    const RealEigenSystem sys = eig_symmetric(a);
    const RealVector oracle = jacobi_eigenvalues(a);
    CHECK((sys.values - oracle).cwiseAbs().maxCoeff() < 1e-11);
  }
}

TEST_CASE("expm_hermitian agrees with a Taylor-series oracle", "[linalg]") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix h = random_hermitian(rng, 2 + trial % 6);
    const double t = 0.1 + 0.37 * trial;
    const Matrix u = expm_hermitian(h, t);
    CHECK(max_abs(u - taylor_expm(h, t)) < 1e-10);
    CHECK(unitarity_defect(u) < 1e-12);
  }
}

TEST_CASE("Pauli algebra and commutators", "[linalg]") {
  using namespace pauli;
  CHECK(max_abs(commutator(x(), y()) - 2.0 * I * z()) == 0.0);
  CHECK(max_abs(x() * x() - Matrix::Identity(2, 2)) == 0.0);
  CHECK(max_abs(commutator(z(), z())) == 0.0);
}

TEST_CASE("distance_up_to_phase quotients out one global phase", "[linalg]") {
  std::mt19937_64 rng(5);
  const Matrix u = expm_hermitian(random_hermitian(rng, 4), 1.3);
  CHECK(distance_up_to_phase(u, std::exp(I * 0.731) * u) < 1e-14);
  Vector zz(4);
  zz << 1.0, -1.0, -1.0, 1.0;
  CHECK(distance_up_to_phase(u, Matrix(u * zz.asDiagonal())) > 0.1);
  Vector a(2);
  a << 1.0, 0.0;
  Vector b(2);
  b << std::exp(I * 2.0), 0.0;
  CHECK(distance_up_to_phase(a, b) < 1e-15);
}
