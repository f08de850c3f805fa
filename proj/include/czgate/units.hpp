#pragma once

// Internal unit system: time in ns, energies as angular frequencies in rad/ns,
// hbar = 1. Laboratory inputs (GHz, MHz) are converted here and nowhere else.

#include <numbers>

namespace czgate::units {

inline constexpr double two_pi = 2.0 * std::numbers::pi;

constexpr double from_ghz(double f_ghz) { return two_pi * f_ghz; }
constexpr double from_mhz(double f_mhz) { return two_pi * f_mhz * 1e-3; }
constexpr double from_khz(double f_khz) { return two_pi * f_khz * 1e-6; }

constexpr double to_ghz(double omega) { return omega / two_pi; }
constexpr double to_mhz(double omega) { return omega / two_pi * 1e3; }

}  // namespace czgate::units
