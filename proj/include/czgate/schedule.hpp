#pragma once

// Symmetric on / hold / off coupling schedule J(t) over [0, T_g], T_g = 2T + t_w.
// The ramp designs J~1; the physical knob is J(t) = J~1(t) / r1.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <sstream>

#include <fmt/format.h>

#include "czgate/quadrature.hpp"
#include "czgate/ramps.hpp"
#include "czgate/units.hpp"

namespace czgate {

/// t_w = (pi - 2 int_0^T J~3 dt) / J~3(T), with J~3 = j3_ratio * J~1.
inline double waiting_time(const RampWaveform& ramp, double j3_ratio) {
  if (ramp.direction() != RampDirection::up) {
    throw ValidationError("waiting_time: expects a ramp-up waveform");
  }
  const double j3_end = j3_ratio * ramp.value(ramp.duration());
  if (!(j3_end > 0.0)) throw ValidationError("waiting_time: J~3(T) must be > 0");
  const double area =
      j3_ratio * integrate([&](double t) { return ramp.value(t); }, 0.0, ramp.duration(), 1e-12);
  const double t_w = (std::numbers::pi - 2.0 * area) / j3_end;
  if (!(t_w > 0.0)) {
    std::ostringstream os;
    os << "waiting_time: ramp area " << area << " rad >= pi/2 gives t_w = " << t_w
       << " ns; shorten or weaken the ramp";
    throw NumericalError(os.str());
  }
  return t_w;
}

class ControlSchedule {
 public:
  ControlSchedule(RampWaveform ramp, double waiting_time, double r1)
      : ramp_(std::move(ramp)), t_w_(waiting_time), r1_(r1) {
    if (ramp_.direction() != RampDirection::up) {
      throw ValidationError("schedule: expects a ramp-up waveform");
    }
    if (!(t_w_ >= 0.0)) throw ValidationError("schedule: t_w must be >= 0");
    if (!(r1_ > 0.0)) throw ValidationError("schedule: r1 must be > 0");
  }

  const RampWaveform& ramp() const { return ramp_; }
  double ramp_time() const { return ramp_.duration(); }
  double waiting_time() const { return t_w_; }
  double gate_time() const { return 2.0 * ramp_.duration() + t_w_; }
  double r1() const { return r1_; }

  /// Designed J~1(t) on [0, T_g]; the down ramp is evaluated as the up ramp at T - s.
  double designed_coupling(double t) const {
    const double ramp_time = ramp_.duration();
    if (t <= ramp_time) return ramp_.value(t);
    if (t < ramp_time + t_w_) return ramp_.value(ramp_time);
    const double s = t - (ramp_time + t_w_);
    return ramp_.value(ramp_time - s);
  }

  /// Physical J(t) = J~1(t) / r1.
  double coupling(double t) const { return designed_coupling(t) / r1_; }

  /// Hold value J(T), identical to coupling(t) on the hold window.
  double hold_coupling() const { return ramp_.value(ramp_.duration()) / r1_; }

 private:
  RampWaveform ramp_;
  double t_w_;
  double r1_;
};

inline ControlSchedule build_schedule(RampWaveform ramp, double waiting_time, double r1) {
  return ControlSchedule(std::move(ramp), waiting_time, r1);
}

/// CSV of J(t) with columns t_ns, J_over_2pi_GHz; each segment (ramp, hold,
/// ramp) is sampled at `samples_per_ns`, endpoints included once.
inline void write_waveform_csv(std::ostream& out, const ControlSchedule& schedule,
                               double samples_per_ns = 1000.0) {
  if (!(samples_per_ns > 0.0)) throw ValidationError("waveform export: samples_per_ns must be > 0");
  out << "t_ns,J_over_2pi_GHz\n";
  const double bounds[4] = {0.0, schedule.ramp_time(), schedule.ramp_time() + schedule.waiting_time(),
                            schedule.gate_time()};
  auto row = [&](double t) {
    out << fmt::format("{:.9f},{:.12e}\n", t, units::to_ghz(schedule.coupling(t)));
  };
  row(0.0);
  for (int seg = 0; seg < 3; ++seg) {
    const double span = bounds[seg + 1] - bounds[seg];
    if (span <= 0.0) continue;
    const auto n = static_cast<long>(std::max(1.0, std::ceil(span * samples_per_ns)));
    for (long k = 1; k <= n; ++k) row(bounds[seg] + span * static_cast<double>(k) / static_cast<double>(n));
  }
}

}  // namespace czgate
