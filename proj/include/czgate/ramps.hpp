#pragma once

// Coupling ramps J~1(t) for the S2 subspace (|01>, |10>), whose traceless
// Hamiltonian is H2 = J~1 sigma_x + (alpha_eff / 2) sigma_z.
//
// FAQUAD: closed-form profile with a constant adiabaticity parameter.
// Invariant: I = (f1 sigma_x + f2 sigma_y + f3 sigma_z) / 2 with f' = h x f,
// h = (2 J~1, 0, alpha_eff). This fixes f2 = -f1' / alpha_eff and
// 2 J~1 = (f1'' / alpha_eff + alpha_eff f1) / f3, f3 = +sqrt(c^2 - f1^2 - f2^2).

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>
#include <vector>

#include "czgate/errors.hpp"
#include "czgate/linalg.hpp"
#include "czgate/quadrature.hpp"

namespace czgate {

enum class RampKind { faquad, invariant };
enum class RampDirection { up, down };

class InfeasibleAnsatzError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// Extra interpolation condition d^k f1 / dt^k (time) = value, in rad/ns^(k+1).
struct AnsatzConstraint {
  double time = 0.0;
  int derivative = 0;
  double value = 0.0;
};

class InvariantAnsatz {
 public:
  static constexpr int kFeasibilityGrid = 10000;

  InvariantAnsatz(double alpha_eff, double target, double duration, RampDirection direction,
                  RealVector scaled_coefficients, double condition_residual)
      : alpha_(alpha_eff),
        target_(target),
        duration_(duration),
        direction_(direction),
        b_(std::move(scaled_coefficients)),
        condition_residual_(condition_residual) {}

  double alpha_eff() const { return alpha_; }
  double target() const { return target_; }
  double duration() const { return duration_; }
  RampDirection direction() const { return direction_; }
  double c_squared() const { return alpha_ * alpha_; }
  int degree() const { return static_cast<int>(b_.size()) - 1; }
  /// Largest violation of the interpolation conditions.
  double condition_residual() const { return condition_residual_; }

  /// a_m of f1(t) = sum_m a_m t^m.
  RealVector coefficients() const {
    RealVector a(b_.size());
    for (Eigen::Index m = 0; m < a.size(); ++m) {
      a(m) = b_(m) / std::pow(duration_, static_cast<double>(m));
    }
    return a;
  }

  /// k-th time derivative of f1.
  double f1(double t, int derivative = 0) const {
    const double u = t / duration_;
    double acc = 0.0;
    for (Eigen::Index m = b_.size() - 1; m >= derivative; --m) {
      double falling = 1.0;
      for (int j = 0; j < derivative; ++j) falling *= static_cast<double>(m - j);
      acc = acc * u + falling * b_(m);
    }
    return acc / std::pow(duration_, derivative);
  }

  double f2(double t) const { return -f1(t, 1) / alpha_; }

  double radicand(double t) const {
    const double a = f1(t);
    const double b = f2(t);
    return c_squared() - a * a - b * b;
  }

  double f3(double t) const {
    const double r = radicand(t);
    if (!(r > 0.0)) {
      std::ostringstream os;
      os << "invariant ansatz: radicand " << r << " <= 0 at t = " << t << " ns";
      throw InfeasibleAnsatzError(os.str());
    }
    return std::sqrt(r);
  }

  /// h1 = 2 J~1.
  double h1(double t) const { return (f1(t, 2) / alpha_ + alpha_ * f1(t)) / f3(t); }

  /// Time derivative of h1.
  double h1_rate(double t) const {
    const double f = f1(t);
    const double fd = f1(t, 1);
    const double fdd = f1(t, 2);
    const double g = f3(t);
    const double numer = fdd / alpha_ + alpha_ * f;
    const double numer_rate = f1(t, 3) / alpha_ + alpha_ * fd;
    const double g_rate = -(f * fd + fd * fdd / (alpha_ * alpha_)) / g;
    return (numer_rate * g - numer * g_rate) / (g * g);
  }

  /// I(t) in the (|01>, |10>) basis.
  Matrix invariant(double t) const {
    Matrix m(2, 2);
    const double a = f1(t);
    const double b = f2(t);
    const double c = f3(t);
    m << Complex(c, 0.0), Complex(a, -b), Complex(a, b), Complex(-c, 0.0);
    return 0.5 * m;
  }

 private:
  double alpha_;
  double target_;
  double duration_;
  RampDirection direction_;
  RealVector b_;  // coefficients in u = t / T
  double condition_residual_;
};

/// f1 at the endpoint where J~1 = target: -h1 sqrt(c^2 / (h1^2 + alpha^2)), h1 = 2 target.
inline double ansatz_boundary_value(double alpha_eff, double target) {
  const double h = 2.0 * target;
  return -h * std::abs(alpha_eff) / std::sqrt(h * h + alpha_eff * alpha_eff);
}

inline InvariantAnsatz invariant_ansatz(double alpha_eff, double target, double duration,
                                        RampDirection direction = RampDirection::up,
                                        const std::vector<AnsatzConstraint>& extra = {}) {
  if (!(alpha_eff < 0.0)) throw ValidationError("invariant_ansatz: alpha_eff must be < 0");
  if (!(target > 0.0)) throw ValidationError("invariant_ansatz: target coupling must be > 0");
  if (!(duration > 0.0)) throw ValidationError("invariant_ansatz: T must be > 0");

  const double f_on = ansatz_boundary_value(alpha_eff, target);
  const double f_start = direction == RampDirection::up ? 0.0 : f_on;
  const double f_end = direction == RampDirection::up ? f_on : 0.0;

  std::vector<AnsatzConstraint> rows = {{0.0, 0, f_start}, {0.0, 1, 0.0},      {0.0, 2, 0.0},
                                        {duration, 0, f_end}, {duration, 1, 0.0}, {duration, 2, 0.0}};
  for (const auto& c : extra) {
    if (c.time < 0.0 || c.time > duration || c.derivative < 0) {
      throw ValidationError("invariant_ansatz: extra constraint outside [0, T] or negative order");
    }
    rows.push_back(c);
  }
  const auto n = static_cast<Eigen::Index>(rows.size());
  RealMatrix a = RealMatrix::Zero(n, n);
  RealVector rhs(n);
  for (Eigen::Index r = 0; r < n; ++r) {
    const double u = rows[r].time / duration;
    const int k = rows[r].derivative;
    for (Eigen::Index m = k; m < n; ++m) {
      double falling = 1.0;
      for (int j = 0; j < k; ++j) falling *= static_cast<double>(m - j);
      a(r, m) = falling * std::pow(u, static_cast<double>(m - k));
    }
    rhs(r) = rows[r].value * std::pow(duration, k);
  }
  const auto lu = a.fullPivLu();
  if (!lu.isInvertible()) throw ValidationError("invariant_ansatz: constraints are not independent");
  RealVector b = lu.solve(rhs);

  InvariantAnsatz probe(alpha_eff, target, duration, direction, b, 0.0);
  double residual = 0.0;
  for (const auto& c : rows) {
    residual = std::max(residual, std::abs(probe.f1(c.time, c.derivative) - c.value));
  }
  InvariantAnsatz out(alpha_eff, target, duration, direction, std::move(b), residual);

  for (int k = 0; k <= InvariantAnsatz::kFeasibilityGrid; ++k) {
    const double t = duration * k / InvariantAnsatz::kFeasibilityGrid;
    const double r = out.radicand(t);
    if (!(r > 0.0)) {
      std::ostringstream os;
      os << "invariant_ansatz: radicand " << r << " <= 0 at t = " << t
         << " ns; use a longer ramp or a higher-degree ansatz";
      throw InfeasibleAnsatzError(os.str());
    }
  }
  return out;
}

class RampWaveform {
 public:
  static constexpr int kCheckGrid = 10000;

  static RampWaveform faquad(double alpha_eff, double target, double duration) {
    return RampWaveform(RampKind::faquad, alpha_eff, target, duration, std::nullopt);
  }

  static RampWaveform invariant(InvariantAnsatz ansatz) {
    const double alpha = ansatz.alpha_eff();
    const double target = ansatz.target();
    const double duration = ansatz.duration();
    return RampWaveform(RampKind::invariant, alpha, target, duration, std::move(ansatz));
  }

  RampKind kind() const { return kind_; }
  double duration() const { return duration_; }
  double target() const { return target_; }
  double alpha_eff() const { return alpha_; }
  RampDirection direction() const {
    return ansatz_ ? ansatz_->direction() : RampDirection::up;
  }
  const std::optional<InvariantAnsatz>& ansatz() const { return ansatz_; }

  /// J~1(t); t is clamped to [0, T].
  double value(double t) const {
    t = std::clamp(t, 0.0, duration_);
    if (kind_ == RampKind::invariant) return 0.5 * ansatz_->h1(t);
    const double u = t / duration_;
    return std::abs(alpha_) * target_ * u / std::sqrt(faquad_denominator(u));
  }

  /// dJ~1/dt.
  double rate(double t) const {
    t = std::clamp(t, 0.0, duration_);
    if (kind_ == RampKind::invariant) return 0.5 * ansatz_->h1_rate(t);
    const double u = t / duration_;
    const double d = faquad_denominator(u);
    return std::abs(alpha_) * target_ * (alpha_ * alpha_ + 4.0 * target_ * target_) /
           (duration_ * d * std::sqrt(d));
  }

 private:
  RampWaveform(RampKind kind, double alpha_eff, double target, double duration,
               std::optional<InvariantAnsatz> ansatz)
      : kind_(kind), alpha_(alpha_eff), target_(target), duration_(duration), ansatz_(std::move(ansatz)) {
    if (!(alpha_ < 0.0)) throw ValidationError("ramp: alpha_eff must be < 0");
    if (!(target_ > 0.0)) throw ValidationError("ramp: target coupling must be > 0");
    if (!(duration_ > 0.0)) throw ValidationError("ramp: T must be > 0");
    check();
  }

  double faquad_denominator(double u) const {
    return alpha_ * alpha_ + 4.0 * target_ * target_ * (1.0 - u * u);
  }

  void check() const {
    const bool up = direction() == RampDirection::up;
    const double start = value(0.0);
    const double end = value(duration_);
    const double tol = 1e-10 * target_;
    if (std::abs(start - (up ? 0.0 : target_)) > tol || std::abs(end - (up ? target_ : 0.0)) > tol) {
      std::ostringstream os;
      os << "ramp: endpoint values (" << start << ", " << end << ") miss the boundary conditions";
      throw NumericalError(os.str());
    }
    for (int k = 0; k <= kCheckGrid; ++k) {
      if (!std::isfinite(value(duration_ * k / kCheckGrid))) {
        throw NumericalError("ramp: waveform not finite on the check grid");
      }
    }
  }

  RampKind kind_;
  double alpha_;
  double target_;
  double duration_;
  std::optional<InvariantAnsatz> ansatz_;
};

inline RampWaveform faquad_ramp(double alpha_eff, double target, double duration) {
  return RampWaveform::faquad(alpha_eff, target, duration);
}

inline RampWaveform invariant_ramp(const InvariantAnsatz& ansatz) {
  return RampWaveform::invariant(ansatz);
}

inline RampWaveform invariant_ramp(double alpha_eff, double target, double duration,
                                   const std::vector<AnsatzConstraint>& extra = {}) {
  return RampWaveform::invariant(
      invariant_ansatz(alpha_eff, target, duration, RampDirection::up, extra));
}

/// |<+|dH2/dt|->| / (E+ - E-)^2 for the waveform at time t.
inline double faquad_mu(const RampWaveform& ramp, double t) {
  const double j = ramp.value(t);
  const double a = ramp.alpha_eff();
  return std::abs(ramp.rate(t) * a) / std::pow(4.0 * j * j + a * a, 1.5);
}

struct MuProfile {
  double mean = 0.0;
  double rel_spread = 0.0;  // (max - min) / mean
};

/// faquad_mu sampled at `samples` interior midpoints.
inline MuProfile faquad_mu_profile(const RampWaveform& ramp, int samples = 1000) {
  if (samples < 1) throw ValidationError("faquad_mu_profile: samples must be >= 1");
  double sum = 0.0, lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (int k = 0; k < samples; ++k) {
    const double mu = faquad_mu(ramp, ramp.duration() * (k + 0.5) / samples);
    sum += mu;
    lo = std::min(lo, mu);
    hi = std::max(hi, mu);
  }
  const double mean = sum / samples;
  return {mean, (hi - lo) / mean};
}

/// The constant value of faquad_mu along a FAQUAD ramp.
inline double faquad_mu_constant(double alpha_eff, double target, double duration) {
  return target / (duration * std::abs(alpha_eff) * std::sqrt(alpha_eff * alpha_eff + 4.0 * target * target));
}

/// Largest |dI/dt + i[H2, I]| entry over `samples` interior times, with a
/// central finite difference of step `fd_step`.
inline double invariant_residual(const RampWaveform& ramp, int samples = 1000, double fd_step = 1e-5) {
  if (!ramp.ansatz()) throw ValidationError("invariant_residual: ramp has no invariant ansatz");
  const InvariantAnsatz& f = *ramp.ansatz();
  double worst = 0.0;
  for (int k = 0; k < samples; ++k) {
    const double t = ramp.duration() * (k + 0.5) / samples;
    const Matrix didt = (f.invariant(t + fd_step) - f.invariant(t - fd_step)) / (2.0 * fd_step);
    Matrix h(2, 2);
    const double j = 0.5 * f.h1(t);
    h << 0.5 * f.alpha_eff(), j, j, -0.5 * f.alpha_eff();
    worst = std::max(worst, max_abs(didt + I * commutator(h, f.invariant(t))));
  }
  return worst;
}

struct LRPhases {
  double plus = 0.0;   // eigenvalue +c/2 of I, connected to |01>
  double minus = 0.0;  // eigenvalue -c/2, connected to |10>
  double dynamic = 0.0;    // -(1/c) int (2 J~1 f1 + alpha_eff f3) dt, part of `plus`
  double geometric = 0.0;  // Berry phase of the + mode, part of `plus`
};

/// Lewis-Riesenfeld phases accumulated over ramp-up plus the mirrored ramp-down.
/// The down ramp runs f2 -> -f2, so the Bloch vector f / c traces a closed loop
/// and the + mode picks up minus half its solid angle, evaluated in the gauge
/// |chi+> = (cos(theta/2), e^{i phi} sin(theta/2)) as
/// -int (f1 f2' - f2 f1') / (c (c + f3)) dt per ramp.
inline LRPhases lr_phases(const InvariantAnsatz& ansatz) {
  const double alpha = ansatz.alpha_eff();
  const double c = std::abs(alpha);
  const double dynamic = integrate(
      [&](double t) { return ansatz.h1(t) * ansatz.f1(t) + alpha * ansatz.f3(t); }, 0.0,
      ansatz.duration());
  const double solid = integrate(
      [&](double t) {
        const double f = ansatz.f1(t);
        const double fd = ansatz.f1(t, 1);
        return (fd * fd - f * ansatz.f1(t, 2)) / (alpha * c * (c + ansatz.f3(t)));
      },
      0.0, ansatz.duration());
  LRPhases out;
  out.dynamic = -dynamic / c;
  out.geometric = -solid;
  out.plus = out.dynamic + out.geometric;
  out.minus = -out.plus;
  return out;
}

}  // namespace czgate
