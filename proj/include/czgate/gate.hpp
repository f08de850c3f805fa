#pragma once

// Gate simulation and analysis on the computational block (|00>, |01>, |10>, |11>).
//
// H(t) = diag(E) + J(t) V is real symmetric and the schedule is mirror
// symmetric, so the ramp-down propagator is the transpose of the ramp-up one:
//
//   U(T_g) = U_up^T exp(-i H(T) t_w) U_up,   U_comp[s', s] = u_s'^T exp(-i H(T) t_w) u_s,
//
// with u_s = U_up |s>. Only the four computational columns are carried through
// the ramp (in the frame of diag(E), block by block over the connected
// components of V), and any t_w is then a cheap product in the hold eigenbasis.

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <numbers>
#include <numeric>
#include <sstream>
#include <string_view>
#include <vector>

#include "czgate/device.hpp"
#include "czgate/propagate.hpp"
#include "czgate/schedule.hpp"

namespace czgate {

enum class GateModel { full, effective, reduced };

inline std::string_view to_string(GateModel m) {
  switch (m) {
    case GateModel::full: return "full";
    case GateModel::effective: return "effective";
    case GateModel::reduced: return "reduced";
  }
  return "?";
}

/// Static energies, coupling matrix (H = diag(E) + J V) and the indices of
/// |00>, |01>, |10>, |11>.
struct GateSystem {
  RealVector energies;
  RealMatrix coupling;
  std::array<Eigen::Index, 4> computational{};
};

inline GateSystem gate_system(const DeviceSpec& d, GateModel model) {
  GateSystem s;
  if (model == GateModel::full) {
    FullModel m = full_model(d);
    s.energies = std::move(m.energies);
    s.coupling = std::move(m.coupling);
    s.computational = {d.full_index(0, 0), d.full_index(0, 1), d.full_index(1, 0), d.full_index(1, 1)};
  } else {
    EffectiveModel m = effective_model(d, model == GateModel::effective);
    s.energies = std::move(m.energies);
    s.coupling = std::move(m.coupling);
    s.computational = {s00, s01, s10, s11};
  }
  return s;
}

enum class GateMethod { mirror_factorized, direct };

struct GateConfig {
  PropagationConfig propagation{1e-12, 1e-12, 0.25, PropagationMethod::adaptive, 10000};
  GateMethod method = GateMethod::mirror_factorized;
};

namespace detail {

/// Connected components of the coupling graph; entries below 1e-12 max|V| are
/// treated as structural zeros.
inline std::vector<std::vector<Eigen::Index>> coupling_components(const RealMatrix& v) {
  const Eigen::Index n = v.rows();
  const double cut = 1e-12 * std::max(1.0, v.cwiseAbs().maxCoeff());
  std::vector<Eigen::Index> parent(static_cast<std::size_t>(n));
  std::iota(parent.begin(), parent.end(), Eigen::Index{0});
  auto find = [&](Eigen::Index i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  };
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      if (std::abs(v(i, j)) > cut) parent[find(i)] = find(j);
    }
  }
  std::vector<std::vector<Eigen::Index>> groups;
  std::vector<Eigen::Index> slot(static_cast<std::size_t>(n), -1);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Index root = find(i);
    if (slot[root] < 0) {
      slot[root] = static_cast<Eigen::Index>(groups.size());
      groups.emplace_back();
    }
    groups[slot[root]].push_back(i);
  }
  return groups;
}

inline double wrap_phase(double x) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  double r = std::remainder(x, two_pi);
  if (r <= -std::numbers::pi) r += two_pi;
  return r;
}

}  // namespace detail

/// Ramp-up evolution of the computational states, reduced to what the hold
/// and mirrored ramp-down need: the hold eigenvalues and the columns u_s in
/// the hold eigenbasis, per coupling component.
class RampEvolution {
 public:
  RampEvolution(const GateSystem& sys, const std::function<double(double)>& coupling,
                double ramp_time, double hold_coupling, const PropagationConfig& cfg) {
    for (const auto& comp : detail::coupling_components(sys.coupling)) {
      Block b;
      for (int s = 0; s < 4; ++s) {
        const auto it = std::find(comp.begin(), comp.end(), sys.computational[s]);
        if (it != comp.end()) {
          b.states.push_back(s);
          b.local.push_back(it - comp.begin());
        }
      }
      if (b.states.empty()) continue;
      const auto n = static_cast<Eigen::Index>(comp.size());
      RealVector e(n);
      RealMatrix v(n, n);
      for (Eigen::Index i = 0; i < n; ++i) {
        e(i) = sys.energies(comp[i]);
        for (Eigen::Index j = 0; j < n; ++j) v(i, j) = sys.coupling(comp[i], comp[j]);
      }
      Matrix phi0 = Matrix::Zero(n, static_cast<Eigen::Index>(b.states.size()));
      for (std::size_t c = 0; c < b.local.size(); ++c) phi0(b.local[c], static_cast<Eigen::Index>(c)) = 1.0;

      Matrix phi = evolve_interaction(e, v, coupling, phi0, ramp_time, cfg);
      for (Eigen::Index i = 0; i < n; ++i) phi.row(i) *= std::polar(1.0, -e(i) * ramp_time);

      RealMatrix hold = hold_coupling * v;
      hold.diagonal() += e;
      const RealEigenSystem es = eig_symmetric(hold);
      b.hold_values = es.values;
      b.columns = es.vectors.transpose().cast<Complex>() * phi;
      blocks_.push_back(std::move(b));
    }
  }

  /// U_comp for a hold of duration t_w.
  Matrix computational_block(double waiting_time) const {
    Matrix u = Matrix::Zero(4, 4);
    for (const Block& b : blocks_) {
      Vector phase(b.hold_values.size());
      for (Eigen::Index k = 0; k < phase.size(); ++k) phase(k) = std::polar(1.0, -b.hold_values(k) * waiting_time);
      const Matrix m = b.columns.transpose() * phase.asDiagonal() * b.columns;
      for (std::size_t i = 0; i < b.states.size(); ++i) {
        for (std::size_t j = 0; j < b.states.size(); ++j) {
          u(b.states[i], b.states[j]) = m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
        }
      }
    }
    return u;
  }

 private:
  struct Block {
    std::vector<int> states;           // computational slots in this block
    std::vector<Eigen::Index> local;   // their positions in the block
    RealVector hold_values;
    Matrix columns;                    // hold eigenbasis coefficients of u_s
  };

  static Matrix evolve_interaction(const RealVector& e, const RealMatrix& v,
                                   const std::function<double(double)>& coupling, const Matrix& phi0,
                                   double ramp_time, const PropagationConfig& cfg) {
    const Eigen::Index n = e.size();
    if (cfg.method == PropagationMethod::piecewise_exponential) {
      auto h = [&](double t) {
        Vector p(n);
        for (Eigen::Index i = 0; i < n; ++i) p(i) = std::polar(1.0, e(i) * t);
        return Matrix(coupling(t) * (p * p.adjoint()).cwiseProduct(v.cast<Complex>()));
      };
      return evolve(h, phi0, 0.0, ramp_time, cfg);
    }
    const Matrix vc = v.cast<Complex>();
    Vector p(n);
    Matrix x(n, phi0.cols());
    auto rhs = [&](const Eigen::Map<const Matrix>& phi, Eigen::Map<Matrix>& dphi, double t) {
      for (Eigen::Index i = 0; i < n; ++i) p(i) = std::polar(1.0, e(i) * t);
      x = p.conjugate().asDiagonal() * phi;
      dphi.noalias() = vc * x;
      dphi = (Complex(0.0, -coupling(t)) * p).asDiagonal() * dphi;
    };
    cfg.validate();
    return detail::evolve_adaptive_rhs(rhs, phi0, 0.0, ramp_time, cfg);
  }

  std::vector<Block> blocks_;
};

/// Direct propagation of the computational columns over [0, T_g] in the lab
/// frame, with no use of the mirror symmetry. `breakpoints` are the segment
/// boundaries 0, T, T + t_w, T_g. Returns the full columns.
inline Matrix gate_columns_direct(const GateSystem& sys, const std::function<double(double)>& coupling,
                                  const std::vector<double>& breakpoints, const PropagationConfig& cfg) {
  const Eigen::Index n = sys.energies.size();
  Matrix psi0 = Matrix::Zero(n, 4);
  for (int s = 0; s < 4; ++s) psi0(sys.computational[s], s) = 1.0;
  RealMatrix h(n, n);
  auto hamiltonian = [&](double t) {
    h = coupling(t) * sys.coupling;
    h.diagonal() += sys.energies;
    return Matrix(h.cast<Complex>());
  };
  return evolve_piecewise(hamiltonian, psi0, breakpoints, cfg);
}

/// (phi_00, phi_01, phi_10, phi_11) = arg of the diagonal of U_comp.
inline std::array<double, 4> extract_phases(const Matrix& u_comp) {
  std::array<double, 4> phi{};
  for (int s = 0; s < 4; ++s) {
    const Complex d = u_comp(s, s);
    if (!(std::abs(d) > 0.5)) {
      std::ostringstream os;
      os << "extract_phases: |U_ss| = " << std::abs(d) << " for state " << s
         << "; gross population transfer";
      throw NumericalError(os.str());
    }
    phi[s] = std::arg(d);
  }
  return phi;
}

/// U = exp[i(phi0 + phi1 Z(x)1 + phi2 1(x)Z + phi12 Z(x)Z)] on the diagonal.
struct PhaseDecomposition {
  double global = 0.0;
  double local_a = 0.0;
  double local_b = 0.0;
  double entangling = 0.0;

  /// Diagonal phases rebuilt from the decomposition, wrapped to (-pi, pi].
  std::array<double, 4> reconstruct() const {
    static constexpr int za[4] = {1, 1, -1, -1};
    static constexpr int zb[4] = {1, -1, 1, -1};
    std::array<double, 4> out{};
    for (int s = 0; s < 4; ++s) {
      out[s] = detail::wrap_phase(global + za[s] * local_a + zb[s] * local_b + za[s] * zb[s] * entangling);
    }
    return out;
  }
};

inline double entangling_phase(const std::array<double, 4>& phi) {
  return (phi[0] - phi[1] - phi[2] + phi[3]) / 4.0;
}

inline PhaseDecomposition decompose_phases(const std::array<double, 4>& phi) {
  return {(phi[0] + phi[1] + phi[2] + phi[3]) / 4.0, (phi[0] + phi[1] - phi[2] - phi[3]) / 4.0,
          (phi[0] - phi[1] + phi[2] - phi[3]) / 4.0, entangling_phase(phi)};
}

/// phi12 - pi/4 reduced to (-pi/4, pi/4]; phi12 matters only mod pi/2.
inline double phase_deviation(double phi12) {
  constexpr double quarter = std::numbers::pi / 4.0;
  constexpr double half = std::numbers::pi / 2.0;
  double r = std::remainder(phi12 - quarter, half);
  if (r <= -quarter) r += half;
  return r;
}

struct Fidelity {
  double entanglement = 0.0;  // F_e
  double average = 0.0;       // (N F_e + 1) / (N + 1), N = 4
};

inline double average_fidelity(double entanglement_fidelity) {
  constexpr double n = 4.0;
  return (n * entanglement_fidelity + 1.0) / (n + 1.0);
}

/// F_e = |1/4 sum_s <s|U_id^dag U_loc^dag U|s>|^2 against U_id = CZ. U_loc
/// carries the global and single-qubit phases of U together with the
/// pi/2-multiples of phi12, so only the deviation from pi/4 and the loss of
/// amplitude are penalized.
inline Fidelity fidelity(const Matrix& u_comp) {
  if (u_comp.rows() != 4 || u_comp.cols() != 4) throw ValidationError("fidelity: U_comp must be 4x4");
  static constexpr int zz[4] = {1, -1, -1, 1};
  std::array<double, 4> phi{};
  for (int s = 0; s < 4; ++s) phi[s] = std::arg(u_comp(s, s));
  const double dev = phase_deviation(entangling_phase(phi));
  Complex sum = 0.0;
  for (int s = 0; s < 4; ++s) {
    // <s|U_loc U_id|s> = exp(i(phi_s - dev zz_s)).
    sum += std::polar(1.0, -(phi[s] - dev * zz[s])) * u_comp(s, s);
  }
  Fidelity f;
  f.entanglement = std::norm(sum / 4.0);
  f.average = average_fidelity(f.entanglement);
  return f;
}

struct GateOutcome {
  Matrix u_comp;
  std::array<double, 4> phases{};
  PhaseDecomposition decomposition;
  double phase_deviation = 0.0;
  std::array<double, 4> loss{};     // 1 - |<s|U|s>|^2
  std::array<double, 4> leakage{};  // population outside the computational block
  double mean_leakage = 0.0;
  Fidelity fidelity;

  double infidelity() const { return 1.0 - fidelity.average; }
};

/// Analysis of a computational block; `leakage` is taken from the block's
/// column norms unless supplied.
inline GateOutcome analyze_gate(Matrix u_comp, const std::array<double, 4>* leakage = nullptr) {
  GateOutcome g;
  g.u_comp = std::move(u_comp);
  g.phases = extract_phases(g.u_comp);
  g.decomposition = decompose_phases(g.phases);
  g.phase_deviation = phase_deviation(g.decomposition.entangling);
  for (int s = 0; s < 4; ++s) {
    g.loss[s] = std::clamp(1.0 - std::norm(g.u_comp(s, s)), 0.0, 1.0);
    g.leakage[s] = leakage ? (*leakage)[s] : std::clamp(1.0 - g.u_comp.col(s).squaredNorm(), 0.0, 1.0);
  }
  g.mean_leakage = (g.leakage[0] + g.leakage[1] + g.leakage[2] + g.leakage[3]) / 4.0;
  g.fidelity = fidelity(g.u_comp);
  return g;
}

inline RampEvolution evolve_ramp(const GateSystem& sys, const ControlSchedule& schedule,
                                 const PropagationConfig& cfg) {
  return RampEvolution(
      sys, [&](double t) { return schedule.ramp().value(t) / schedule.r1(); }, schedule.ramp_time(),
      schedule.hold_coupling(), cfg);
}

inline GateOutcome simulate_gate(const DeviceSpec& device, const ControlSchedule& schedule, GateModel model,
                                 const GateConfig& cfg = {}) {
  const GateSystem sys = gate_system(device, model);
  try {
    if (cfg.method == GateMethod::mirror_factorized) {
      return analyze_gate(evolve_ramp(sys, schedule, cfg.propagation).computational_block(schedule.waiting_time()));
    }
    const Matrix cols = gate_columns_direct(
        sys, [&](double t) { return schedule.coupling(t); },
        {0.0, schedule.ramp_time(), schedule.ramp_time() + schedule.waiting_time(), schedule.gate_time()},
        cfg.propagation);
    Matrix u(4, 4);
    std::array<double, 4> leak{};
    for (int s = 0; s < 4; ++s) {
      double inside = 0.0;
      for (int r = 0; r < 4; ++r) {
        u(r, s) = cols(sys.computational[r], s);
        inside += std::norm(u(r, s));
      }
      leak[s] = std::clamp(cols.col(s).squaredNorm() - inside, 0.0, 1.0);
    }
    return analyze_gate(std::move(u), &leak);
  } catch (const StepUnderflowError& e) {
    std::ostringstream os;
    os << e.what() << " (T = " << schedule.ramp_time() << " ns, t_w = " << schedule.waiting_time()
       << " ns, model " << to_string(model) << ")";
    throw StepUnderflowError(os.str(), e.time());
  }
}

/// Prediction of phi_01 and phi_10 for the invariant protocol in the
/// effective model: -(omega_a + alpha_eff/2) T_g + beta_+- +- Omega' t_w with
/// Omega' = sqrt((alpha_eff/2)^2 + J~1(T)^2).
inline std::array<double, 2> predicted_s2_phases(const DeviceSpec& device, const ControlSchedule& schedule) {
  const RampWaveform& ramp = schedule.ramp();
  if (!ramp.ansatz()) throw ValidationError("predicted_s2_phases: needs an invariant ramp");
  const double alpha = ramp.alpha_eff();
  const LRPhases beta = lr_phases(*ramp.ansatz());
  const double j = ramp.target();
  const double omega_prime = std::sqrt(0.25 * alpha * alpha + j * j);
  const double center = -(device.qubit_a.omega01 + 0.5 * alpha) * schedule.gate_time();
  return {detail::wrap_phase(center + beta.plus + omega_prime * schedule.waiting_time()),
          detail::wrap_phase(center + beta.minus - omega_prime * schedule.waiting_time())};
}

}  // namespace czgate
