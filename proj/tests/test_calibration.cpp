#include <catch_amalgamated.hpp>

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "czgate/calibration.hpp"

using namespace czgate;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

NelderMeadOptions options_2d(double tol) {
  NelderMeadOptions opt;
  opt.max_evaluations = 2000;
  opt.value_tolerance = 1e-14;
  opt.coordinate_tolerance = Eigen::Vector2d::Constant(tol);
  opt.initial_step = Eigen::Vector2d::Constant(0.5);
  return opt;
}

OptimizationProblem effective_problem(Protocol p, double t_ramp) {
  OptimizationProblem prob;
  prob.protocol = p;
  prob.ramp_time = t_ramp;
  prob.model = GateModel::effective;
  return prob;
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

}  // namespace

TEST_CASE("simplex search finds the Rosenbrock minimum", "[calibration][nelder-mead]") {
  auto rosenbrock = [](const Eigen::VectorXd& x) {
    return 100.0 * std::pow(x(1) - x(0) * x(0), 2) + std::pow(1.0 - x(0), 2);
  };
  const NelderMeadResult r = nelder_mead(rosenbrock, Eigen::Vector2d(-1.2, 1.0), options_2d(1e-8));
  CHECK(r.converged);
  CHECK_THAT(r.x(0), WithinAbs(1.0, 1e-5));
  CHECK_THAT(r.x(1), WithinAbs(1.0, 1e-5));
  CHECK(r.value < 1e-10);
  CHECK(r.evaluations <= 2000);
}

TEST_CASE("simplex search on an anisotropic quadratic", "[calibration][nelder-mead]") {
  const Eigen::Vector3d center(0.3, -2.0, 5.0);
  const Eigen::Vector3d weight(1.0, 30.0, 0.2);
  auto f = [&](const Eigen::VectorXd& x) { return (x - center).cwiseAbs2().dot(weight) + 4.0; };
  NelderMeadOptions opt;
  opt.max_evaluations = 3000;
  opt.value_tolerance = 1e-14;
  opt.coordinate_tolerance = Eigen::Vector3d::Constant(1e-7);
  opt.initial_step = Eigen::Vector3d::Constant(1.0);
  const NelderMeadResult r = nelder_mead(f, Eigen::Vector3d::Zero(), opt);
  CHECK(r.converged);
  CHECK((r.x - center).cwiseAbs().maxCoeff() < 1e-5);
  CHECK_THAT(r.value, WithinAbs(4.0, 1e-10));
}

TEST_CASE("simplex search reports an exhausted budget and bad options", "[calibration][nelder-mead]") {
  auto f = [](const Eigen::VectorXd& x) { return x.squaredNorm(); };
  NelderMeadOptions opt = options_2d(1e-12);
  opt.max_evaluations = 8;
  const NelderMeadResult r = nelder_mead(f, Eigen::Vector2d(3.0, 3.0), opt);
  CHECK_FALSE(r.converged);
  CHECK(r.evaluations <= 8 + 2);

  opt.max_evaluations = 2;
  CHECK_THROWS_AS(nelder_mead(f, Eigen::Vector2d(0.0, 0.0), opt), ValidationError);
  NelderMeadOptions wrong = options_2d(1e-6);
  wrong.initial_step = Eigen::Vector3d::Ones();
  CHECK_THROWS_AS(nelder_mead(f, Eigen::Vector2d(0.0, 0.0), wrong), ValidationError);
  CHECK_THROWS_AS(nelder_mead(f, Eigen::VectorXd(), wrong), ValidationError);
}

TEST_CASE("ramps are designed for the detuned anharmonicity", "[calibration]") {
  const DeviceSpec d = calibrate_device(DeviceParameters{}.with_detuning(units::from_mhz(1.5)));
  for (Protocol p : {Protocol::faquad, Protocol::invariant}) {
    const RampWaveform r = design_ramp(d, p, 2.0);
    CHECK_THAT(r.alpha_eff(), WithinRel(d.qubit_a.anharmonicity + d.detuning, 1e-14));
    CHECK_THAT(r.target(), WithinRel(d.couplings.r1 * d.max_coupling, 1e-14));
    const ControlSchedule s = design_schedule(d, p, 2.0);
    CHECK_THAT(s.waiting_time(), WithinRel(waiting_time(r, d.couplings.r3 / d.couplings.r1), 1e-14));
    CHECK(design_schedule(d, p, 2.0, 5.0).waiting_time() == 5.0);
  }
}

TEST_CASE("mean Stark shift matches a sampled average", "[calibration]") {
  const DeviceSpec d = calibrate_device(DeviceParameters{});
  for (Protocol p : {Protocol::faquad, Protocol::invariant}) {
    const ControlSchedule s = design_schedule(d, p, 5.0);
    // Trapezoid over 40000 panels, split at the kinks.
    auto shift = [&](double t) {
      const double j = s.coupling(t);
      return sw_reduction(d, d.couplings.r2 * j, d.couplings.r3 * j).delta_omega;
    };
    auto trapezoid = [&](double a, double b) {
      const int n = 20000;
      const double h = (b - a) / n;
      double acc = 0.5 * (shift(a) + shift(b));
      for (int k = 1; k < n; ++k) acc += shift(a + k * h);
      return acc * h;
    };
    const double t1 = s.ramp_time(), t2 = t1 + s.waiting_time();
    const double oracle = (trapezoid(0.0, t1) + trapezoid(t1, t2) + trapezoid(t2, s.gate_time())) / s.gate_time();
    const double mean = mean_stark_shift(d, s);
    CHECK_THAT(mean, WithinRel(oracle, 1e-7));
    CHECK(units::to_mhz(mean) > 0.3);
    CHECK(units::to_mhz(mean) < 0.8);
    const CorrectionSeed seed = seed_correction(d, s);
    CHECK(seed.detuning == mean);
    CHECK(seed.waiting_time == s.waiting_time());
  }
}

TEST_CASE("detuning bound respects the device validity range", "[calibration]") {
  OptimizationProblem p;
  CHECK(detuning_bound(p) < p.device.max_coupling / 4.0);
  p.max_detuning = units::from_mhz(1.0);
  CHECK(detuning_bound(p) == units::from_mhz(1.0));
}

TEST_CASE("correction search descends from its seed", "[calibration]") {
  for (Protocol p : {Protocol::faquad, Protocol::invariant}) {
    const OptimizationProblem prob = effective_problem(p, 3.0);
    const OptimizationResult r = optimize_gate(prob);
    CHECK(r.infidelity <= r.seed_infidelity);
    CHECK(r.infidelity < 1e-5);
    CHECK(std::abs(r.detuning) <= detuning_bound(prob));
    CHECK(r.waiting_time >= 0.5 * r.seed.waiting_time);
    CHECK(r.waiting_time <= 1.5 * r.seed.waiting_time);
    CHECK(r.evaluations <= prob.max_evaluations + 1);

    // Rebuild the optimal gate from scratch.
    const DeviceSpec d = calibrate_device(prob.device.with_detuning(r.detuning));
    const ControlSchedule s = design_schedule(d, p, prob.ramp_time, r.waiting_time);
    const GateOutcome g = simulate_gate(d, s, GateModel::effective);
    CHECK_THAT(g.infidelity(), WithinAbs(r.infidelity, 1e-10));
  }
}

TEST_CASE("correction search is deterministic", "[calibration]") {
  const OptimizationProblem prob = effective_problem(Protocol::invariant, 2.0);
  const OptimizationResult a = optimize_gate(prob);
  const OptimizationResult b = optimize_gate(prob);
  CHECK(a.waiting_time == b.waiting_time);
  CHECK(a.detuning == b.detuning);
  CHECK(a.infidelity == b.infidelity);
  CHECK(a.evaluations == b.evaluations);
}

TEST_CASE("correction search needs the mirror-factorized method", "[calibration]") {
  OptimizationProblem prob = effective_problem(Protocol::invariant, 2.0);
  prob.gate.method = GateMethod::direct;
  CHECK_THROWS_AS(optimize_gate(prob), ValidationError);
}

TEST_CASE("sweep rows reproduce single gate simulations", "[calibration]") {
  SweepOptions opt;
  opt.model = GateModel::effective;
  const std::vector<double> ts{1.0, 2.5, 4.0};
  const SweepResult r = sweep(DeviceParameters{}, Protocol::faquad, ts, CorrectionMode::uncorrected, opt);
  REQUIRE(r.rows.size() == 3);
  const DeviceSpec d = calibrate_device(DeviceParameters{});
  for (const SweepRow& row : r.rows) {
    CHECK(row.error.empty());
    const ControlSchedule s = design_schedule(d, Protocol::faquad, row.ramp_time);
    const GateOutcome g = simulate_gate(d, s, GateModel::effective);
    CHECK(row.infidelity == g.infidelity());
    CHECK(row.gate_time == s.gate_time());
    CHECK(row.detuning == 0.0);
    CHECK(row.seed_detuning == mean_stark_shift(d, s));
  }
  for (std::size_t k = 1; k < r.rows.size(); ++k) CHECK(r.rows[k].gate_time >= r.rows[k - 1].gate_time);
}

TEST_CASE("sweep result does not depend on the worker count", "[calibration][property]") {
  SweepOptions serial;
  serial.model = GateModel::effective;
  SweepOptions parallel = serial;
  parallel.workers = 4;
  const std::vector<double> ts{0.5, 1.0, 2.0, 3.0, 5.0, 40.0};
  for (CorrectionMode mode : {CorrectionMode::uncorrected, CorrectionMode::corrected}) {
    const std::vector<double> use = mode == CorrectionMode::corrected ? std::vector<double>{1.0, 3.0} : ts;
    const SweepResult a = sweep(DeviceParameters{}, Protocol::invariant, use, mode, serial);
    const SweepResult b = sweep(DeviceParameters{}, Protocol::invariant, use, mode, parallel);
    REQUIRE(a.rows.size() == b.rows.size());
    for (std::size_t k = 0; k < a.rows.size(); ++k) {
      CHECK(a.rows[k].ramp_time == b.rows[k].ramp_time);
      CHECK(a.rows[k].error == b.rows[k].error);
      if (a.rows[k].error.empty()) CHECK(a.rows[k].infidelity == b.rows[k].infidelity);
    }
  }
}

TEST_CASE("failed sweep points are kept and listed last", "[calibration]") {
  SweepOptions opt;
  opt.model = GateModel::reduced;
  // A 40 ns ramp overshoots the pi budget of the hold.
  const SweepResult r = sweep(DeviceParameters{}, Protocol::faquad, {1.0, 40.0, 41.0}, CorrectionMode::uncorrected, opt);
  REQUIRE(r.rows.size() == 3);
  CHECK(r.rows[0].error.empty());
  CHECK_FALSE(r.rows[1].error.empty());
  CHECK_FALSE(r.rows[2].error.empty());
  CHECK(r.rows[1].ramp_time == 40.0);
  CHECK(std::isnan(r.rows[1].infidelity));
  CHECK_FALSE(r.rows[1].converged);
}

TEST_CASE("sweep validates its ramp times", "[calibration]") {
  CHECK_THROWS_AS(sweep(DeviceParameters{}, Protocol::faquad, {}, CorrectionMode::uncorrected), ValidationError);
  CHECK_THROWS_AS(sweep(DeviceParameters{}, Protocol::faquad, {2.0, 1.0}, CorrectionMode::uncorrected),
                  ValidationError);
  CHECK_THROWS_AS(sweep(DeviceParameters{}, Protocol::faquad, {1.0, 1.0}, CorrectionMode::uncorrected),
                  ValidationError);
  CHECK_THROWS_AS(sweep(DeviceParameters{}, Protocol::faquad, {-1.0}, CorrectionMode::uncorrected),
                  ValidationError);
}

TEST_CASE("report and sweep CSV layout", "[calibration]") {
  SweepOptions opt;
  opt.model = GateModel::reduced;
  const SweepResult r = sweep(DeviceParameters{}, Protocol::invariant, {1.0, 2.0}, CorrectionMode::uncorrected, opt);
  std::ostringstream report, table;
  write_report_csv(report, r.rows);
  write_sweep_csv(table, r);
  const auto rl = lines_of(report.str());
  const auto tl = lines_of(table.str());
  REQUIRE(rl.size() == 3);
  REQUIRE(tl.size() == 3);
  CHECK(rl[0] == kReportHeader);
  CHECK(tl[0] == std::string(kReportHeader) + ",Delta_seed_over_2pi_MHz,converged");
  for (std::size_t k = 1; k < 3; ++k) {
    CHECK(std::count(rl[k].begin(), rl[k].end(), ',') == 12);
    CHECK(std::count(tl[k].begin(), tl[k].end(), ',') == 14);
    CHECK(tl[k].rfind(rl[k], 0) == 0);
    CHECK(tl[k].back() == '1');
  }
  CHECK(rl[1].find(",invariant,reduced,") != std::string::npos);
}
