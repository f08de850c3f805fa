#pragma once

// Stark-shift correction: joint search over the waiting time t_w and the
// detuning D = omega_b - (omega_a + alpha_a), plus sweeps over ramp times.
// Every candidate D recalibrates qubit b and re-synthesizes the ramp with
// alpha_eff = alpha_a + D.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include <fmt/format.h>

#include "czgate/gate.hpp"
#include "czgate/nelder_mead.hpp"
#include "czgate/stark_shift.hpp"

namespace czgate {

enum class Protocol { faquad, invariant };
enum class CorrectionMode { uncorrected, corrected };

inline std::string_view to_string(Protocol p) { return p == Protocol::faquad ? "faquad" : "invariant"; }
inline std::string_view to_string(CorrectionMode m) {
  return m == CorrectionMode::uncorrected ? "uncorrected" : "corrected";
}

/// Ramp of the given protocol for a device: alpha_eff = alpha_a + D, target r1 J_M.
inline RampWaveform design_ramp(const DeviceSpec& d, Protocol protocol, double ramp_time) {
  const double alpha_eff = d.qubit_a.anharmonicity + d.detuning;
  const double target = d.couplings.r1 * d.max_coupling;
  return protocol == Protocol::faquad ? faquad_ramp(alpha_eff, target, ramp_time)
                                      : invariant_ramp(alpha_eff, target, ramp_time);
}

/// Schedule with the analytic waiting time unless one is given.
inline ControlSchedule design_schedule(const DeviceSpec& d, Protocol protocol, double ramp_time,
                                       std::optional<double> t_w = std::nullopt) {
  RampWaveform ramp = design_ramp(d, protocol, ramp_time);
  const double wait = t_w ? *t_w : waiting_time(ramp, d.couplings.r3 / d.couplings.r1);
  return build_schedule(std::move(ramp), wait, d.couplings.r1);
}

/// Time average over [0, T_g] of the |11> Stark shift from |02>, with
/// J~2 = r2 J(t) and J~3 = r3 J(t).
inline double mean_stark_shift(const DeviceSpec& d, const ControlSchedule& s) {
  auto shift = [&](double j) {
    return sw_reduction(d, d.couplings.r2 * j, d.couplings.r3 * j).delta_omega;
  };
  const double ramp_part =
      integrate([&](double t) { return shift(s.coupling(t)); }, 0.0, s.ramp_time(), 1e-12);
  return (2.0 * ramp_part + s.waiting_time() * shift(s.hold_coupling())) / s.gate_time();
}

struct CorrectionSeed {
  double waiting_time = 0.0;  // ns
  double detuning = 0.0;      // rad/ns
};

inline CorrectionSeed seed_correction(const DeviceSpec& d, const ControlSchedule& s) {
  return {waiting_time(s.ramp(), d.couplings.r3 / d.couplings.r1), mean_stark_shift(d, s)};
}

struct OptimizationProblem {
  DeviceParameters device;  // detuning is a decision variable; omega_b is overridden
  Protocol protocol = Protocol::invariant;
  double ramp_time = 1.0;
  GateModel model = GateModel::full;
  GateConfig gate;
  double max_detuning = units::from_mhz(5.0);
  int max_evaluations = 500;
  double value_tolerance = 1e-9;
  double waiting_time_tolerance = 1e-4;             // ns
  double detuning_tolerance = units::from_khz(1.0);  // rad/ns
};

struct OptimizationResult {
  CorrectionSeed seed;
  double seed_infidelity = 0.0;
  double waiting_time = 0.0;
  double detuning = 0.0;
  double infidelity = 0.0;
  int evaluations = 0;
  bool converged = false;
  GateOutcome outcome;
};

/// Gate objective with the ramp evolution cached per detuning, so moves in
/// t_w alone only redo the hold.
class GateObjective {
 public:
  GateObjective(DeviceParameters params, Protocol protocol, double ramp_time, GateModel model, GateConfig cfg)
      : params_(params), protocol_(protocol), ramp_time_(ramp_time), model_(model), cfg_(cfg) {}

  GateOutcome outcome(double t_w, double detuning) {
    return analyze_gate(entry(detuning).evolution.computational_block(t_w));
  }
  /// 1 - F_avg without the phase-extraction guard, so that far-off candidates
  /// still get a finite objective.
  double infidelity(double t_w, double detuning) {
    return 1.0 - fidelity(entry(detuning).evolution.computational_block(t_w)).average;
  }

  const DeviceSpec& device(double detuning) { return entry(detuning).device; }

 private:
  struct Entry {
    DeviceSpec device;
    RampEvolution evolution;
  };

  Entry& entry(double detuning) {
    auto it = cache_.find(detuning);
    if (it != cache_.end()) return *it->second;
    DeviceSpec d = calibrate_device(params_.with_detuning(detuning));
    const ControlSchedule s = design_schedule(d, protocol_, ramp_time_, 0.0);
    RampEvolution ev = evolve_ramp(gate_system(d, model_), s, cfg_.propagation);
    auto inserted = cache_.emplace(detuning, std::make_unique<Entry>(Entry{std::move(d), std::move(ev)}));
    return *inserted.first->second;
  }

  DeviceParameters params_;
  Protocol protocol_;
  double ramp_time_;
  GateModel model_;
  GateConfig cfg_;
  std::map<double, std::unique_ptr<Entry>> cache_;
};

inline double detuning_bound(const OptimizationProblem& p) {
  // make_device requires |D| < J_M / 4.
  return std::min(p.max_detuning, (1.0 - 1e-6) * p.device.max_coupling / 4.0);
}

inline OptimizationResult optimize_gate(const OptimizationProblem& p) {
  if (p.gate.method != GateMethod::mirror_factorized) {
    throw ValidationError("optimize_gate: needs the mirror-factorized gate method");
  }
  GateObjective objective(p.device, p.protocol, p.ramp_time, p.model, p.gate);
  const DeviceSpec& seed_device = objective.device(0.0);
  OptimizationResult r;
  r.seed = seed_correction(seed_device, design_schedule(seed_device, p.protocol, p.ramp_time));

  const double t_lo = 0.5 * r.seed.waiting_time;
  const double t_hi = 1.5 * r.seed.waiting_time;
  const double d_max = detuning_bound(p);
  const double seed_detuning = std::clamp(r.seed.detuning, -d_max, d_max);

  // Scaled coordinates: 0.1 ns and 2 pi x 0.1 MHz per unit.
  const double t_unit = 0.1;
  const double d_unit = units::from_mhz(0.1);
  auto unscale = [&](const Eigen::VectorXd& x) {
    return std::pair{r.seed.waiting_time + t_unit * x(0), seed_detuning + d_unit * x(1)};
  };
  auto f = [&](const Eigen::VectorXd& x) {
    const auto [t_w, d] = unscale(x);
    const double tc = std::clamp(t_w, t_lo, t_hi);
    const double dc = std::clamp(d, -d_max, d_max);
    const double violation = std::hypot((t_w - tc) / t_unit, (d - dc) / d_unit);
    return objective.infidelity(tc, dc) + violation * violation;
  };

  r.seed_infidelity = objective.infidelity(r.seed.waiting_time, seed_detuning);
  NelderMeadOptions opt;
  opt.max_evaluations = p.max_evaluations;
  opt.value_tolerance = p.value_tolerance;
  opt.coordinate_tolerance = Eigen::Vector2d(p.waiting_time_tolerance / t_unit, p.detuning_tolerance / d_unit);
  opt.initial_step = Eigen::Vector2d(1.0, 2.0);
  const NelderMeadResult nm = nelder_mead(f, Eigen::Vector2d::Zero(), opt);

  const auto [t_w, d] = unscale(nm.x);
  r.waiting_time = std::clamp(t_w, t_lo, t_hi);
  r.detuning = std::clamp(d, -d_max, d_max);
  r.outcome = objective.outcome(r.waiting_time, r.detuning);
  r.infidelity = r.outcome.infidelity();
  r.evaluations = nm.evaluations + 1;
  r.converged = nm.converged;
  return r;
}

struct SweepRow {
  double ramp_time = 0.0;
  double waiting_time = std::numeric_limits<double>::quiet_NaN();
  double detuning = std::numeric_limits<double>::quiet_NaN();
  double gate_time = std::numeric_limits<double>::quiet_NaN();
  Protocol protocol = Protocol::invariant;
  GateModel model = GateModel::full;
  double infidelity = std::numeric_limits<double>::quiet_NaN();
  double phase_deviation = std::numeric_limits<double>::quiet_NaN();
  std::array<double, 4> loss{std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN(),
                             std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN()};
  double leakage = std::numeric_limits<double>::quiet_NaN();
  double seed_detuning = std::numeric_limits<double>::quiet_NaN();  // mean Stark shift
  bool converged = false;
  std::string error;  // empty on success

  void fill(const GateOutcome& g) {
    infidelity = g.infidelity();
    phase_deviation = g.phase_deviation;
    loss = g.loss;
    leakage = g.mean_leakage;
  }
};

struct SweepResult {
  CorrectionMode mode = CorrectionMode::uncorrected;
  std::vector<SweepRow> rows;  // sorted by T_g, failed rows last
};

struct SweepOptions {
  GateModel model = GateModel::full;
  GateConfig gate;
  unsigned workers = 1;
  OptimizationProblem optimization;  // template for corrected mode
};

inline SweepRow sweep_point(const DeviceParameters& params, Protocol protocol, double ramp_time, CorrectionMode mode,
                            const SweepOptions& opt) {
  SweepRow row;
  row.ramp_time = ramp_time;
  row.protocol = protocol;
  row.model = opt.model;
  try {
    if (mode == CorrectionMode::uncorrected) {
      const DeviceSpec d = calibrate_device(params.with_detuning(0.0));
      const ControlSchedule s = design_schedule(d, protocol, ramp_time);
      const GateOutcome g = simulate_gate(d, s, opt.model, opt.gate);
      row.waiting_time = s.waiting_time();
      row.detuning = 0.0;
      row.gate_time = s.gate_time();
      row.seed_detuning = mean_stark_shift(d, s);
      row.converged = true;
      row.fill(g);
    } else {
      OptimizationProblem p = opt.optimization;
      p.device = params;
      p.protocol = protocol;
      p.ramp_time = ramp_time;
      p.model = opt.model;
      p.gate = opt.gate;
      const OptimizationResult r = optimize_gate(p);
      row.waiting_time = r.waiting_time;
      row.detuning = r.detuning;
      row.gate_time = 2.0 * ramp_time + r.waiting_time;
      row.seed_detuning = r.seed.detuning;
      row.converged = r.converged;
      row.fill(r.outcome);
    }
  } catch (const std::exception& e) {
    row.error = e.what();
    row.converged = false;
  }
  return row;
}

/// One row per ramp time, computed by a bounded pool of `workers` threads.
/// Rows depend only on their own inputs, so the result does not depend on the
/// number of workers.
inline SweepResult sweep(const DeviceParameters& params, Protocol protocol, const std::vector<double>& ramp_times,
                         CorrectionMode mode, const SweepOptions& opt = {}) {
  if (ramp_times.empty()) throw ValidationError("sweep: empty list of ramp times");
  for (std::size_t k = 0; k < ramp_times.size(); ++k) {
    if (!(ramp_times[k] > 0.0) || (k > 0 && !(ramp_times[k] > ramp_times[k - 1]))) {
      throw ValidationError("sweep: ramp times must be positive and strictly ascending");
    }
  }
  SweepResult result;
  result.mode = mode;
  result.rows.resize(ramp_times.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t k = next++; k < ramp_times.size(); k = next++) {
      result.rows[k] = sweep_point(params, protocol, ramp_times[k], mode, opt);
    }
  };
  const unsigned workers = std::clamp<unsigned>(opt.workers, 1u, static_cast<unsigned>(ramp_times.size()));
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  std::stable_sort(result.rows.begin(), result.rows.end(), [](const SweepRow& a, const SweepRow& b) {
    if (a.error.empty() != b.error.empty()) return a.error.empty();
    return a.gate_time < b.gate_time;
  });
  return result;
}

inline constexpr std::string_view kReportHeader =
    "T_ns,t_w_ns,Delta_over_2pi_MHz,Tg_ns,protocol,model,infidelity,phase_dev_rad,"
    "loss_00,loss_01,loss_10,loss_11,leakage";

inline std::string report_fields(const SweepRow& r) {
  return fmt::format("{:.6f},{:.9f},{:.9f},{:.9f},{},{},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e}",
                     r.ramp_time, r.waiting_time, units::to_mhz(r.detuning), r.gate_time, to_string(r.protocol),
                     to_string(r.model), r.infidelity, r.phase_deviation, r.loss[0], r.loss[1], r.loss[2],
                     r.loss[3], r.leakage);
}

/// Gate report: one row per run.
inline void write_report_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
  out << kReportHeader << '\n';
  for (const auto& r : rows) out << report_fields(r) << '\n';
}

/// Sweep CSV: gate report columns plus the seed detuning and the convergence flag.
inline void write_sweep_csv(std::ostream& out, const SweepResult& result) {
  out << kReportHeader << ",Delta_seed_over_2pi_MHz,converged\n";
  for (const auto& r : result.rows) {
    out << report_fields(r) << fmt::format(",{:.9f},{}\n", units::to_mhz(r.seed_detuning), r.converged ? 1 : 0);
  }
}

}  // namespace czgate
