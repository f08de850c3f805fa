#pragma once

// Command-line front end: czgate {spectrum|ramp|gate|sweep} [options].
// Exit codes: 0 success, 1 validation error, 2 numerical failure.

#include <CLI11.hpp>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "czgate/calibration.hpp"
#include "czgate/config.hpp"

namespace czgate::cli {

enum ExitCode : int { ok = 0, validation_failure = 1, numerical_failure = 2 };

struct Options {
  std::string command;
  std::string config_path;
  std::string out_dir;
  std::optional<std::string> protocol;
  std::optional<std::string> mode;
  std::optional<double> ramp_time;
  unsigned workers = 1;
  bool seed_only = false;
};

namespace detail {

inline std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ValidationError(fmt::format("cannot write '{}'", path.string()));
  return out;
}

inline std::vector<Protocol> selected_protocols(const RunConfig& c, const Options& o) {
  if (!o.protocol) return c.protocols();
  return {*o.protocol == "faquad" ? Protocol::faquad : Protocol::invariant};
}

inline CorrectionMode selected_mode(const RunConfig& c, const Options& o) {
  if (!o.mode) return c.protocol.mode;
  return *o.mode == "corrected" ? CorrectionMode::corrected : CorrectionMode::uncorrected;
}

inline std::string ramp_tag(double t) { return fmt::format("{:g}", t); }

}  // namespace detail

/// Six lowest levels of the full and effective models over J in [0, J_M].
inline int cmd_spectrum(const RunConfig& c, const std::filesystem::path& out_dir, std::ostream& log) {
  const DeviceSpec d = calibrate_device(c.device_parameters());
  const FullModel full = full_model(d);
  const EffectiveModel eff = effective_model(d);
  auto out = detail::open_output(out_dir / "spectrum.csv");
  out << "J_MHz";
  for (int k = 1; k <= 6; ++k) out << ",E" << k << "_full_GHz";
  for (int k = 1; k <= 6; ++k) out << ",E" << k << "_eff_GHz";
  out << ",max_dev_MHz\n";
  double worst = 0.0;
  constexpr int kPoints = 101;
  for (int k = 0; k < kPoints; ++k) {
    const double j = d.max_coupling * k / (kPoints - 1);
    const RealVector ef = eig_symmetric(full_model_matrix(full, j)).values.head(6);
    const RealVector ee = eig_symmetric(effective_model_matrix(eff, j)).values;
    const double dev = (ef - ee).cwiseAbs().maxCoeff();
    worst = std::max(worst, dev);
    out << fmt::format("{:.9f}", units::to_mhz(j));
    for (int i = 0; i < 6; ++i) out << fmt::format(",{:.12f}", units::to_ghz(ef(i)));
    for (int i = 0; i < 6; ++i) out << fmt::format(",{:.12f}", units::to_ghz(ee(i)));
    out << fmt::format(",{:.9f}\n", units::to_mhz(dev));
  }
  log << fmt::format("spectrum: {} points, max |E_full - E_eff| = {:.6f} MHz -> {}\n", kPoints,
                     units::to_mhz(worst), (out_dir / "spectrum.csv").string());
  return ok;
}

/// Waveforms of both protocols per ramp time, plus an audit table.
inline int cmd_ramp(const RunConfig& c, const std::filesystem::path& out_dir, std::ostream& log, std::ostream& err) {
  const DeviceSpec d = calibrate_device(c.device_parameters().with_detuning(0.0));
  auto audit = detail::open_output(out_dir / "ramp_audit.csv");
  audit << "T_ns,protocol,t_w_ns,Tg_ns,mu_mean,mu_rel_spread,invariant_residual,beta_plus_rad,beta_minus_rad,status\n";
  int failures = 0;
  for (double t : c.protocol.ramp_times_ns) {
    for (Protocol p : {Protocol::faquad, Protocol::invariant}) {
      try {
        const ControlSchedule s = design_schedule(d, p, t);
        const MuProfile mu = faquad_mu_profile(s.ramp());
        std::string residual = "", bp = "", bm = "";
        if (p == Protocol::invariant) {
          const LRPhases beta = lr_phases(*s.ramp().ansatz());
          residual = fmt::format("{:.6e}", invariant_residual(s.ramp()));
          bp = fmt::format("{:.12f}", beta.plus);
          bm = fmt::format("{:.12f}", beta.minus);
        }
        audit << fmt::format("{:.6f},{},{:.9f},{:.9f},{:.9e},{:.6e},{},{},{},ok\n", t, to_string(p), s.waiting_time(),
                             s.gate_time(), mu.mean, mu.rel_spread, residual, bp, bm);
        const auto path = out_dir / fmt::format("waveform_{}_T{}.csv", to_string(p), detail::ramp_tag(t));
        auto out = detail::open_output(path);
        write_waveform_csv(out, s, c.output.samples_per_ns);
      } catch (const NumericalError& e) {
        ++failures;
        audit << fmt::format("{:.6f},{},,,,,,,,failed\n", t, to_string(p));
        err << fmt::format("ramp T = {} ns, {}: {}\n", t, to_string(p), e.what());
      }
    }
  }
  log << fmt::format("ramp: {} ramp times, {} failures -> {}\n", c.protocol.ramp_times_ns.size(), failures,
                     (out_dir / "ramp_audit.csv").string());
  return failures ? numerical_failure : ok;
}

/// Single gate: full and effective models on the same schedule (uncorrected),
/// or the optimized full-model gate (corrected).
inline int cmd_gate(const RunConfig& c, const Options& o, const std::filesystem::path& out_dir, std::ostream& log) {
  const double t = o.ramp_time ? *o.ramp_time : c.protocol.ramp_times_ns.front();
  if (!(t > 0.0)) throw ValidationError("--ramp-time must be positive");
  const DeviceParameters params = c.device_parameters();
  const GateConfig gate = c.gate_config();
  const CorrectionMode mode = detail::selected_mode(c, o);
  std::vector<SweepRow> rows;
  for (Protocol p : detail::selected_protocols(c, o)) {
    const DeviceSpec d = calibrate_device(params.with_detuning(0.0));
    const ControlSchedule s = design_schedule(d, p, t);
    const CorrectionSeed seed = seed_correction(d, s);
    if (o.seed_only) {
      log << fmt::format("{} T = {} ns: t_w0 = {:.9f} ns, Delta0/2pi = {:.9f} MHz\n", to_string(p), t,
                         seed.waiting_time, units::to_mhz(seed.detuning));
      continue;
    }
    if (mode == CorrectionMode::uncorrected) {
      for (GateModel m : {GateModel::full, GateModel::effective}) {
        SweepRow row;
        row.ramp_time = t;
        row.waiting_time = s.waiting_time();
        row.detuning = 0.0;
        row.gate_time = s.gate_time();
        row.protocol = p;
        row.model = m;
        row.fill(simulate_gate(d, s, m, gate));
        rows.push_back(row);
      }
    } else {
      SweepOptions so;
      so.gate = gate;
      so.model = GateModel::full;
      rows.push_back(sweep_point(params, p, t, mode, so));
      if (!rows.back().error.empty()) throw NumericalError(rows.back().error);
    }
  }
  if (o.seed_only) return ok;
  auto out = detail::open_output(out_dir / "gate.csv");
  write_report_csv(out, rows);
  for (const auto& r : rows) {
    log << fmt::format("{} {} T = {} ns, t_w = {:.6f} ns, Delta/2pi = {:.6f} MHz: 1 - F = {:.3e}, "
                       "|phi12 - pi/4| = {:.3e} rad, leakage = {:.3e}\n",
                       to_string(r.protocol), to_string(r.model), r.ramp_time, r.waiting_time,
                       units::to_mhz(r.detuning), r.infidelity, std::abs(r.phase_deviation), r.leakage);
  }
  return ok;
}

inline int cmd_sweep(const RunConfig& c, const Options& o, const std::filesystem::path& out_dir, std::ostream& log,
                     std::ostream& err) {
  const CorrectionMode mode = detail::selected_mode(c, o);
  SweepOptions so;
  so.gate = c.gate_config();
  so.model = c.protocol.model;
  so.workers = o.workers;
  int failures = 0;
  for (Protocol p : detail::selected_protocols(c, o)) {
    const SweepResult r = sweep(c.device_parameters(), p, c.protocol.ramp_times_ns, mode, so);
    const auto path = out_dir / fmt::format("sweep_{}_{}.csv", to_string(mode), to_string(p));
    auto out = detail::open_output(path);
    write_sweep_csv(out, r);
    double best = 1.0;
    for (const auto& row : r.rows) {
      if (!row.error.empty()) {
        ++failures;
        err << fmt::format("sweep {} T = {} ns: {}\n", to_string(p), row.ramp_time, row.error);
      } else {
        best = std::min(best, row.infidelity);
      }
    }
    log << fmt::format("sweep {} {}: {} rows, min 1 - F = {:.3e} -> {}\n", to_string(mode), to_string(p),
                       r.rows.size(), best, path.string());
  }
  return failures ? numerical_failure : ok;
}

inline int run(int argc, const char* const* argv, std::ostream& log = std::cout, std::ostream& err = std::cerr) {
  Options o;
  CLI::App app{"Nonadiabatic CZ gate design and simulation for tunable-coupling transmons", "czgate"};
  app.require_subcommand(1, 1);
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config_path, "YAML run configuration")->check(CLI::ExistingFile);
    sub->add_option("--out", o.out_dir, "output directory (overrides output.directory)");
  };
  auto add_protocol = [&](CLI::App* sub) {
    sub->add_option("--protocol", o.protocol, "faquad | invariant (default: from config)")
        ->check(CLI::IsMember({"faquad", "invariant"}));
    sub->add_option("--mode", o.mode, "uncorrected | corrected (default: from config)")
        ->check(CLI::IsMember({"uncorrected", "corrected"}));
  };
  auto* spectrum = app.add_subcommand("spectrum", "six lowest levels, full vs effective model");
  auto* ramp = app.add_subcommand("ramp", "waveforms and ramp audit for both protocols");
  auto* gate = app.add_subcommand("gate", "single gate report");
  auto* sweep_cmd = app.add_subcommand("sweep", "sweep over the configured ramp times");
  for (auto* sub : {spectrum, ramp, gate, sweep_cmd}) add_common(sub);
  add_protocol(gate);
  add_protocol(sweep_cmd);
  gate->add_option("--ramp-time", o.ramp_time, "ramp time T in ns (default: first configured)");
  gate->add_flag("--seed-only", o.seed_only, "print t_w0 and Delta0 and exit");
  sweep_cmd->add_option("--workers", o.workers, "worker threads")->check(CLI::Range(1u, 256u));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, log, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, log, err);
    return validation_failure;
  }

  try {
    RunConfig c = o.config_path.empty() ? RunConfig{} : load_config(o.config_path);
    if (!o.out_dir.empty()) c.output.directory = o.out_dir;
    const std::filesystem::path out_dir = c.output.directory;
    std::filesystem::create_directories(out_dir);
    {
      auto echo = detail::open_output(out_dir / "config_echo.yaml");
      echo << echo_config(c);
    }
    if (spectrum->parsed()) return cmd_spectrum(c, out_dir, log);
    if (ramp->parsed()) return cmd_ramp(c, out_dir, log, err);
    if (gate->parsed()) return cmd_gate(c, o, out_dir, log);
    return cmd_sweep(c, o, out_dir, log, err);
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return validation_failure;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return numerical_failure;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return validation_failure;
  }
}

}  // namespace czgate::cli
