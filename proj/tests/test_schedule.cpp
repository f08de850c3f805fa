#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "czgate/propagate.hpp"
#include "czgate/schedule.hpp"

using namespace czgate;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

const double kAlpha = units::from_ghz(-0.33);
const double kTarget = units::from_mhz(16.0);
const double kR1 = 0.95;

std::vector<RampWaveform> sample_ramps(double t_ramp) {
  return {faquad_ramp(kAlpha, kTarget, t_ramp), invariant_ramp(kAlpha, kTarget, t_ramp)};
}

// Oracle for int_0^T J~1 dt: composite Simpson on 20000 panels.
double simpson_area(const RampWaveform& r) {
  const int n = 20000;
  const double h = r.duration() / n;
  double acc = r.value(0.0) + r.value(r.duration());
  for (int k = 1; k < n; ++k) acc += (k % 2 ? 4.0 : 2.0) * r.value(k * h);
  return acc * h / 3.0;
}

}  // namespace

TEST_CASE("waiting time closes a pi rotation of the |11>-|20> pair", "[schedule]") {
  const double ratio = std::sqrt(2.0);
  for (double t_ramp : {1.0, 3.0, 6.0}) {
    for (const RampWaveform& r : sample_ramps(t_ramp)) {
      const double t_w = waiting_time(r, ratio);
      const double expected = (std::numbers::pi - 2.0 * ratio * simpson_area(r)) / (ratio * kTarget);
      CHECK_THAT(t_w, WithinAbs(expected, 1e-9));
    }
  }
}

TEST_CASE("square-pulse limit of the waiting time", "[schedule]") {
  const RampWaveform r = faquad_ramp(kAlpha, kTarget, 1e-6);
  CHECK_THAT(waiting_time(r, std::sqrt(2.0)), WithinAbs(22.1, 0.01));
  CHECK_THAT(waiting_time(r, std::sqrt(2.0)), WithinRel(std::numbers::pi / (std::sqrt(2.0) * kTarget), 1e-5));
}

TEST_CASE("waiting time is linear in the ramp area", "[schedule]") {
  // FAQUAD keeps its profile, so doubling T doubles the area.
  const double ratio = 1.3;
  const RampWaveform a = faquad_ramp(kAlpha, kTarget, 2.0);
  const RampWaveform b = faquad_ramp(kAlpha, kTarget, 4.0);
  const double area = ratio * simpson_area(a);
  CHECK_THAT(waiting_time(a, ratio) - waiting_time(b, ratio), WithinAbs(2.0 * area / (ratio * kTarget), 1e-9));
}

TEST_CASE("waiting time rejects ramps that already exceed the pi budget", "[schedule]") {
  const RampWaveform long_ramp = faquad_ramp(kAlpha, kTarget, 40.0);
  CHECK_THROWS_AS(waiting_time(long_ramp, std::sqrt(2.0)), NumericalError);
  const InvariantAnsatz down = invariant_ansatz(kAlpha, kTarget, 2.0, RampDirection::down);
  CHECK_THROWS_AS(waiting_time(invariant_ramp(down), std::sqrt(2.0)), ValidationError);
}

TEST_CASE("schedule mirrors its ramps around the hold", "[schedule][property]") {
  for (const RampWaveform& r : sample_ramps(2.5)) {
    const double t_w = waiting_time(r, std::sqrt(2.0));
    const ControlSchedule s = build_schedule(r, t_w, kR1);
    CHECK(s.gate_time() == 2.0 * 2.5 + t_w);
    for (int k = 0; k <= 10000; ++k) {
      const double t = s.ramp_time() + t_w + 2.5 * k / 10000.0;
      const double sub = t - (s.ramp_time() + t_w);
      CHECK(s.coupling(t) == s.coupling(s.ramp_time() - sub));
    }
    for (int k = 0; k <= 100; ++k) {
      CHECK(s.coupling(2.5 + t_w * k / 100.0) == s.hold_coupling());
    }
    CHECK_THAT(s.hold_coupling(), WithinRel(kTarget / kR1, 1e-12));
    CHECK(s.coupling(0.0) == s.designed_coupling(0.0) / kR1);
    CHECK_THAT(s.coupling(s.gate_time()), WithinAbs(0.0, 1e-10 * kTarget));
  }
}

TEST_CASE("schedule validates its inputs", "[schedule]") {
  const RampWaveform r = faquad_ramp(kAlpha, kTarget, 1.0);
  CHECK_THROWS_AS(ControlSchedule(r, -1.0, kR1), ValidationError);
  CHECK_THROWS_AS(ControlSchedule(r, 1.0, 0.0), ValidationError);
  CHECK_NOTHROW(ControlSchedule(r, 0.0, kR1));
}

TEST_CASE("resonant two-level S3 model maps |11> to -|11>", "[schedule]") {
  // Rotating frame of the degenerate pair: H = J~3(t) sigma_x.
  const double ratio = std::sqrt(2.0);
  for (double t_ramp : {1.0, 4.0}) {
    for (const RampWaveform& r : sample_ramps(t_ramp)) {
      const ControlSchedule s = build_schedule(r, waiting_time(r, ratio), 1.0);
      auto h = [&](double t) { return Matrix(ratio * s.designed_coupling(t) * pauli::x()); };
      const std::vector<double> breaks = {0.0, s.ramp_time(), s.ramp_time() + s.waiting_time(), s.gate_time()};
      const Matrix u = evolve_piecewise(h, Matrix::Identity(2, 2), breaks);
      CHECK(max_abs(u + Matrix::Identity(2, 2)) < 1e-9);
    }
  }
}

TEST_CASE("waveform export samples every segment", "[schedule]") {
  const RampWaveform r = faquad_ramp(kAlpha, kTarget, 1.0);
  const ControlSchedule s = build_schedule(r, 2.5, kR1);
  std::ostringstream os;
  write_waveform_csv(os, s, 10.0);
  std::istringstream in(os.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "t_ns,J_over_2pi_GHz");
  std::vector<std::pair<double, double>> rows;
  while (std::getline(in, line)) {
    const auto comma = line.find(',');
    rows.emplace_back(std::stod(line.substr(0, comma)), std::stod(line.substr(comma + 1)));
  }
  CHECK(rows.size() == 1 + 10 + 25 + 10);
  CHECK(rows.front().first == 0.0);
  CHECK_THAT(rows.back().first, WithinAbs(4.5, 1e-9));
  for (std::size_t k = 1; k < rows.size(); ++k) CHECK(rows[k].first > rows[k - 1].first);
  CHECK_THAT(rows[15].second, WithinRel(units::to_ghz(s.hold_coupling()), 1e-11));
  CHECK_THROWS_AS(write_waveform_csv(os, s, 0.0), ValidationError);
}
