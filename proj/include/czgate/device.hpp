#pragma once

// Two capacitively coupled transmons with a tunable coupler,
// H = H_a + H_b + g_C n_a n_b, and its 6-level effective reduction.

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>
#include <string_view>

#include "czgate/linalg.hpp"
#include "czgate/transmon.hpp"
#include "czgate/units.hpp"

namespace czgate {

/// Laboratory-level targets of a device, already in rad/ns.
struct DeviceParameters {
  double omega_a = units::from_ghz(6.00);
  double omega_b = units::from_ghz(5.67);
  double alpha_a = units::from_ghz(-0.33);
  double alpha_b = units::from_ghz(-0.33);
  double max_coupling = units::from_mhz(16.0);  // J_M
  int charge_cutoff = 20;
  int levels_kept = 8;

  /// Offset of omega_b from the |11>/|20> resonance omega_a + alpha_a.
  double detuning() const { return omega_b - (omega_a + alpha_a); }

  DeviceParameters with_detuning(double delta) const {
    DeviceParameters p = *this;
    p.omega_b = omega_a + alpha_a + delta;
    return p;
  }
};

enum class CouplingMethod { exact_matrix_element, first_order_perturbative };

/// Ratios J~_i / J for the pairs (|01>,|10>), (|11>,|02>), (|11>,|20>).
struct DressedCouplings {
  double r1 = 1.0;
  double r2 = std::sqrt(2.0);
  double r3 = std::sqrt(2.0);
  CouplingMethod method = CouplingMethod::exact_matrix_element;
};

struct DeviceSpec {
  TransmonSpec qubit_a;
  TransmonSpec qubit_b;
  double max_coupling = 0.0;
  double detuning = 0.0;
  double coupling_scale = 0.0;  // g_C / J
  TransmonLevels levels_a;
  TransmonLevels levels_b;
  DressedCouplings couplings;

  int levels_kept() const { return qubit_a.levels_kept; }
  int full_dim() const { return levels_kept() * levels_kept(); }
  /// Index of |i_a j_b> in the full product basis.
  int full_index(int i, int j) const { return i * levels_kept() + j; }
};

/// g_C / J = 2 [E_Ja E_Jb / (64 E_Ca E_Cb)]^(-1/4).
inline double coupling_scale(const TransmonSpec& a, const TransmonSpec& b) {
  return 2.0 * std::pow(a.josephson_energy * b.josephson_energy /
                            (64.0 * a.charging_energy * b.charging_energy),
                        -0.25);
}

inline DressedCouplings exact_couplings(const TransmonLevels& a, const TransmonLevels& b,
                                        double scale) {
  DressedCouplings r;
  r.method = CouplingMethod::exact_matrix_element;
  r.r1 = scale * a.charge(0, 1) * b.charge(1, 0);  // <01| n_a n_b |10>
  r.r2 = scale * a.charge(1, 0) * b.charge(1, 2);  // <11| n_a n_b |02>
  r.r3 = scale * a.charge(1, 2) * b.charge(1, 0);  // <11| n_a n_b |20>
  return r;
}

/// First-order perturbative ratios from the harmonic-oscillator expansion.
inline DressedCouplings perturbative_couplings(double omega_a, double alpha_a, double omega_b,
                                               double alpha_b) {
  auto shift_2 = [](double w, double a) { return 2.0 * a / (3.0 * (2.0 * w + a)); };
  auto self_3 = [](double w, double a) {
    return -a / (3.0 * (2.0 * w + a)) + 5.0 * a / (2.0 * (2.0 * w + 3.0 * a));
  };
  DressedCouplings r;
  r.method = CouplingMethod::first_order_perturbative;
  r.r1 = 1.0 + shift_2(omega_a, alpha_a) + shift_2(omega_b, alpha_b);
  r.r2 = std::sqrt(2.0) * (1.0 + self_3(omega_b, alpha_b) + shift_2(omega_a, alpha_a));
  r.r3 = std::sqrt(2.0) * (1.0 + self_3(omega_a, alpha_a) + shift_2(omega_b, alpha_b));
  return r;
}

inline DeviceSpec make_device(const TransmonSpec& a, const TransmonSpec& b, double max_coupling) {
  if (!(max_coupling > 0.0)) throw ValidationError("device: J_M must be > 0");
  if (a.levels_kept != b.levels_kept) {
    throw ValidationError("device: both transmons must keep the same number of levels");
  }
  DeviceSpec d;
  d.qubit_a = a;
  d.qubit_b = b;
  d.max_coupling = max_coupling;
  d.detuning = b.omega01 - (a.omega01 + a.anharmonicity);
  if (std::abs(d.detuning) >= max_coupling / 4.0) {
    std::ostringstream os;
    os << "device: |detuning| = " << units::to_mhz(std::abs(d.detuning))
       << " MHz must stay below J_M/4 = " << units::to_mhz(max_coupling / 4.0) << " MHz";
    throw ValidationError(os.str());
  }
  d.coupling_scale = coupling_scale(a, b);
  d.levels_a = transmon_levels(a);
  d.levels_b = transmon_levels(b);
  d.couplings = exact_couplings(d.levels_a, d.levels_b, d.coupling_scale);
  return d;
}

inline DeviceSpec calibrate_device(const DeviceParameters& p) {
  const TransmonSpec a = calibrate_transmon(p.omega_a, p.alpha_a, p.charge_cutoff, p.levels_kept);
  const TransmonSpec b = calibrate_transmon(p.omega_b, p.alpha_b, p.charge_cutoff, p.levels_kept);
  return make_device(a, b, p.max_coupling);
}

inline DressedCouplings dressed_couplings(const DeviceSpec& d,
                                          CouplingMethod method = CouplingMethod::exact_matrix_element) {
  if (method == CouplingMethod::exact_matrix_element) return d.couplings;
  return perturbative_couplings(d.qubit_a.omega01, d.qubit_a.anharmonicity, d.qubit_b.omega01,
                                d.qubit_b.anharmonicity);
}

/// Static and coupling parts of the full model, H(J) = diag(energies) + J * coupling.
struct FullModel {
  RealVector energies;
  RealMatrix coupling;  // coupling_scale * (n_a (x) n_b)
};

inline FullModel full_model(const TransmonLevels& a, const TransmonLevels& b, double scale) {
  const Eigen::Index la = a.energies.size();
  const Eigen::Index lb = b.energies.size();
  FullModel m;
  m.energies.resize(la * lb);
  m.coupling.resize(la * lb, la * lb);
  for (Eigen::Index i = 0; i < la; ++i) {
    for (Eigen::Index j = 0; j < lb; ++j) {
      m.energies(i * lb + j) = a.energies(i) + b.energies(j);
    }
  }
  for (Eigen::Index i = 0; i < la; ++i) {
    for (Eigen::Index k = 0; k < la; ++k) {
      m.coupling.block(i * lb, k * lb, lb, lb) = scale * a.charge(i, k) * b.charge;
    }
  }
  return m;
}

inline FullModel full_model(const DeviceSpec& d) {
  return full_model(d.levels_a, d.levels_b, d.coupling_scale);
}

inline RealMatrix full_model_matrix(const FullModel& m, double coupling) {
  RealMatrix h = coupling * m.coupling;
  h.diagonal() += m.energies;
  return h;
}

/// Full coupled Hamiltonian at coupling J in the product of truncated
/// single-transmon eigenbases, with a truncation-convergence check on the six
/// lowest levels (levels_kept versus levels_kept + 1).
inline HermitianOperator coupled_hamiltonian(const DeviceSpec& d, double coupling) {
  constexpr double kTolerance = units::two_pi * 1e-6;
  if (coupling < 0.0 || coupling > 1.5 * d.max_coupling) {
    throw ValidationError("coupled_hamiltonian: J must lie in [0, 1.5 J_M]");
  }
  const RealMatrix h = full_model_matrix(full_model(d), coupling);

  TransmonSpec a_plus = d.qubit_a;
  TransmonSpec b_plus = d.qubit_b;
  ++a_plus.levels_kept;
  ++b_plus.levels_kept;
  const RealMatrix h_plus = full_model_matrix(
      full_model(transmon_levels(a_plus), transmon_levels(b_plus), d.coupling_scale), coupling);
  const RealVector e = eig_symmetric(h).values.head(6);
  const RealVector e_plus = eig_symmetric(h_plus).values.head(6);
  const double sensitivity = (e - e_plus).cwiseAbs().maxCoeff();
  if (sensitivity > kTolerance) {
    std::ostringstream os;
    os << "coupled_hamiltonian: levels_kept = " << d.levels_kept()
       << " not converged (sensitivity " << units::to_mhz(sensitivity) * 1e3 << " kHz)";
    throw NumericalError(os.str());
  }
  return HermitianOperator(h);
}

/// Basis order of the effective model.
enum EffectiveState : int { s00 = 0, s01 = 1, s10 = 2, s02 = 3, s11 = 4, s20 = 5 };

inline constexpr std::array<std::string_view, 6> effective_state_labels = {"00", "01", "10",
                                                                           "02", "11", "20"};

struct EffectiveModel {
  RealVector energies;  // 6
  RealMatrix coupling;  // 6x6, J~_i / J in the appropriate slots
};

/// `couple_02 = false` drops the |11>-|02> coupling (the 2-level S3 reduction).
inline EffectiveModel effective_model(const DeviceSpec& d, bool couple_02 = true) {
  const double wa = d.qubit_a.omega01;
  const double wb = d.qubit_b.omega01;
  EffectiveModel m;
  m.energies.resize(6);
  m.energies << 0.0, wb, wa, 2.0 * wb + d.qubit_b.anharmonicity, wa + wb,
      2.0 * wa + d.qubit_a.anharmonicity;
  m.coupling = RealMatrix::Zero(6, 6);
  m.coupling(s01, s10) = m.coupling(s10, s01) = d.couplings.r1;
  if (couple_02) m.coupling(s02, s11) = m.coupling(s11, s02) = d.couplings.r2;
  m.coupling(s11, s20) = m.coupling(s20, s11) = d.couplings.r3;
  return m;
}

inline RealMatrix effective_model_matrix(const EffectiveModel& m, double coupling) {
  RealMatrix h = coupling * m.coupling;
  h.diagonal() += m.energies;
  return h;
}

/// 6x6 effective Hamiltonian, block diagonal over {00}, {01,10}, {02,11,20}.
inline HermitianOperator effective_hamiltonian(const DeviceSpec& d, double coupling) {
  return HermitianOperator(effective_model_matrix(effective_model(d), coupling));
}

struct SpectrumComparison {
  RealVector full;       // six lowest eigenvalues of the full model
  RealVector effective;  // eigenvalues of the 6x6 model, ascending
  double max_deviation = 0.0;
};

inline SpectrumComparison compare_spectra(const DeviceSpec& d, double coupling) {
  SpectrumComparison c;
  c.full = eig_symmetric(full_model_matrix(full_model(d), coupling)).values.head(6);
  c.effective = eig_symmetric(effective_model_matrix(effective_model(d), coupling)).values;
  c.max_deviation = (c.full - c.effective).cwiseAbs().maxCoeff();
  return c;
}

}  // namespace czgate
