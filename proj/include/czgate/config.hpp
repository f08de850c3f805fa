#pragma once

// Run configuration: a YAML file with sections device / protocol / propagation
// / output, all physical inputs in laboratory units (GHz, MHz, ns). Every key
// is optional and defaults to the reference device. Errors carry the line of
// the offending entry.

#include <yaml-cpp/yaml.h>

#include <fmt/format.h>

#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "czgate/calibration.hpp"
#include "czgate/errors.hpp"
#include "czgate/units.hpp"

namespace czgate {

class ConfigError : public ValidationError {
 public:
  ConfigError(const std::string& what, int line) : ValidationError(format(what, line)), line_(line) {}
  /// 1-based line, 0 when not tied to a line.
  int line() const noexcept { return line_; }

 private:
  static std::string format(const std::string& what, int line) {
    return line > 0 ? fmt::format("config line {}: {}", line, what) : fmt::format("config: {}", what);
  }
  int line_;
};

enum class ProtocolChoice { faquad, invariant, both };

struct RunConfig {
  struct Device {
    double omega_a_ghz = 6.00;
    double omega_b_ghz = 5.67;
    double alpha_a_ghz = -0.33;
    double alpha_b_ghz = -0.33;
    double max_coupling_mhz = 16.0;
    int charge_cutoff = 20;
    int levels_kept = 8;
    bool operator==(const Device&) const = default;
  } device;

  struct ProtocolBlock {
    ProtocolChoice kind = ProtocolChoice::both;
    std::vector<double> ramp_times_ns = {1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0, 4.5,
                                         5.0, 5.5, 6.0, 6.5, 7.0, 7.5, 8.0};
    CorrectionMode mode = CorrectionMode::uncorrected;
    GateModel model = GateModel::full;
    bool operator==(const ProtocolBlock&) const = default;
  } protocol;

  struct Propagation {
    double abs_tol = 1e-12;
    double rel_tol = 1e-12;
    double max_step_ns = 0.25;
    bool operator==(const Propagation&) const = default;
  } propagation;

  struct Output {
    std::string directory = "out";
    double samples_per_ns = 1000.0;
    bool operator==(const Output&) const = default;
  } output;

  bool operator==(const RunConfig&) const = default;

  DeviceParameters device_parameters() const {
    DeviceParameters p;
    p.omega_a = units::from_ghz(device.omega_a_ghz);
    p.omega_b = units::from_ghz(device.omega_b_ghz);
    p.alpha_a = units::from_ghz(device.alpha_a_ghz);
    p.alpha_b = units::from_ghz(device.alpha_b_ghz);
    p.max_coupling = units::from_mhz(device.max_coupling_mhz);
    p.charge_cutoff = device.charge_cutoff;
    p.levels_kept = device.levels_kept;
    return p;
  }

  GateConfig gate_config() const {
    GateConfig g;
    g.propagation.abs_tol = propagation.abs_tol;
    g.propagation.rel_tol = propagation.rel_tol;
    g.propagation.max_step = propagation.max_step_ns;
    return g;
  }

  std::vector<Protocol> protocols() const {
    switch (protocol.kind) {
      case ProtocolChoice::faquad: return {Protocol::faquad};
      case ProtocolChoice::invariant: return {Protocol::invariant};
      case ProtocolChoice::both: break;
    }
    return {Protocol::faquad, Protocol::invariant};
  }
};

inline std::string_view to_string(ProtocolChoice k) {
  switch (k) {
    case ProtocolChoice::faquad: return "faquad";
    case ProtocolChoice::invariant: return "invariant";
    case ProtocolChoice::both: break;
  }
  return "both";
}

namespace detail {

inline int line_of(const YAML::Node& n) { return n.Mark().line >= 0 ? n.Mark().line + 1 : 0; }

template <class T>
T scalar(const YAML::Node& n, const std::string& key) {
  if (!n.IsScalar()) throw ConfigError(fmt::format("'{}' must be a scalar", key), line_of(n));
  try {
    return n.as<T>();
  } catch (const YAML::Exception&) {
    throw ConfigError(fmt::format("'{}' has an invalid value '{}'", key, n.Scalar()), line_of(n));
  }
}

inline double finite(const YAML::Node& n, const std::string& key) {
  const double v = scalar<double>(n, key);
  if (!std::isfinite(v)) throw ConfigError(fmt::format("'{}' must be finite", key), line_of(n));
  return v;
}

inline void require(bool ok, const YAML::Node& n, const std::string& message) {
  if (!ok) throw ConfigError(message, line_of(n));
}

/// Calls `handle(key, node)` for each entry of a section; unknown keys are errors.
template <class Handler>
void for_each_entry(const YAML::Node& section, const std::string& name, const std::set<std::string>& keys,
                    Handler&& handle) {
  if (!section.IsMap()) throw ConfigError(fmt::format("section '{}' must be a mapping", name), line_of(section));
  for (const auto& kv : section) {
    const std::string key = kv.first.as<std::string>();
    if (!keys.count(key)) {
      throw ConfigError(fmt::format("unknown key '{}' in section '{}'", key, name), line_of(kv.first));
    }
    handle(key, kv.second);
  }
}

}  // namespace detail

inline RunConfig parse_config(const std::string& text) {
  using detail::finite;
  using detail::require;
  using detail::scalar;
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError(e.msg, e.mark.line >= 0 ? e.mark.line + 1 : 0);
  }
  RunConfig c;
  if (root.IsNull()) return c;
  if (!root.IsMap()) throw ConfigError("top level must be a mapping of sections", detail::line_of(root));

  for (const auto& sec : root) {
    const std::string name = sec.first.as<std::string>();
    const YAML::Node& body = sec.second;
    if (name == "device") {
      detail::for_each_entry(
          body, name,
          {"omega_a_ghz", "omega_b_ghz", "alpha_a_ghz", "alpha_b_ghz", "max_coupling_mhz", "charge_cutoff",
           "levels_kept"},
          [&](const std::string& key, const YAML::Node& v) {
            if (key == "charge_cutoff" || key == "levels_kept") {
              const int x = scalar<int>(v, key);
              if (key == "charge_cutoff") {
                require(x >= 10, v, "'charge_cutoff' must be >= 10");
                c.device.charge_cutoff = x;
              } else {
                require(x >= 3, v, "'levels_kept' must be >= 3");
                c.device.levels_kept = x;
              }
              return;
            }
            const double x = finite(v, key);
            if (key.rfind("alpha", 0) == 0) {
              require(x < 0.0, v, fmt::format("'{}' must be negative", key));
            } else {
              require(x > 0.0, v, fmt::format("'{}' must be positive", key));
            }
            if (key == "omega_a_ghz") c.device.omega_a_ghz = x;
            if (key == "omega_b_ghz") c.device.omega_b_ghz = x;
            if (key == "alpha_a_ghz") c.device.alpha_a_ghz = x;
            if (key == "alpha_b_ghz") c.device.alpha_b_ghz = x;
            if (key == "max_coupling_mhz") c.device.max_coupling_mhz = x;
          });
      const double detuning_mhz =
          1e3 * (c.device.omega_b_ghz - c.device.omega_a_ghz - c.device.alpha_a_ghz);
      if (!(std::abs(detuning_mhz) < c.device.max_coupling_mhz / 4.0)) {
        const YAML::Node at = body["omega_b_ghz"] ? body["omega_b_ghz"] : body;
        throw ConfigError(fmt::format("omega_b - (omega_a + alpha_a) = {} MHz must stay below J_M/4 = {} MHz",
                                      detuning_mhz, c.device.max_coupling_mhz / 4.0),
                          detail::line_of(at));
      }
    } else if (name == "protocol") {
      detail::for_each_entry(body, name, {"kind", "ramp_times_ns", "mode", "model"},
                             [&](const std::string& key, const YAML::Node& v) {
        if (key == "ramp_times_ns") {
          require(v.IsSequence() && v.size() > 0, v, "'ramp_times_ns' must be a non-empty list");
          std::vector<double> ts;
          for (const auto& e : v) {
            const double t = finite(e, key);
            require(t > 0.0, e, "ramp times must be positive");
            require(ts.empty() || t > ts.back(), e, "ramp times must be strictly ascending");
            ts.push_back(t);
          }
          c.protocol.ramp_times_ns = ts;
          return;
        }
        const std::string s = scalar<std::string>(v, key);
        if (key == "kind") {
          if (s == "faquad") c.protocol.kind = ProtocolChoice::faquad;
          else if (s == "invariant") c.protocol.kind = ProtocolChoice::invariant;
          else if (s == "both") c.protocol.kind = ProtocolChoice::both;
          else throw ConfigError("'kind' must be faquad, invariant or both", detail::line_of(v));
        } else if (key == "mode") {
          if (s == "uncorrected") c.protocol.mode = CorrectionMode::uncorrected;
          else if (s == "corrected") c.protocol.mode = CorrectionMode::corrected;
          else throw ConfigError("'mode' must be uncorrected or corrected", detail::line_of(v));
        } else {
          if (s == "full") c.protocol.model = GateModel::full;
          else if (s == "effective") c.protocol.model = GateModel::effective;
          else if (s == "reduced") c.protocol.model = GateModel::reduced;
          else throw ConfigError("'model' must be full, effective or reduced", detail::line_of(v));
        }
      });
    } else if (name == "propagation") {
      detail::for_each_entry(body, name, {"abs_tol", "rel_tol", "max_step_ns"},
                             [&](const std::string& key, const YAML::Node& v) {
        const double x = finite(v, key);
        if (key == "max_step_ns") {
          require(x > 0.0, v, "'max_step_ns' must be positive");
          c.propagation.max_step_ns = x;
          return;
        }
        require(x > 0.0 && x <= 1e-6, v, fmt::format("'{}' must lie in (0, 1e-6]", key));
        (key == "abs_tol" ? c.propagation.abs_tol : c.propagation.rel_tol) = x;
      });
    } else if (name == "output") {
      detail::for_each_entry(body, name, {"directory", "samples_per_ns"},
                             [&](const std::string& key, const YAML::Node& v) {
        if (key == "directory") {
          c.output.directory = scalar<std::string>(v, key);
          require(!c.output.directory.empty(), v, "'directory' must not be empty");
        } else {
          const double x = finite(v, key);
          require(x > 0.0, v, "'samples_per_ns' must be positive");
          c.output.samples_per_ns = x;
        }
      });
    } else {
      throw ConfigError(fmt::format("unknown section '{}'", name), detail::line_of(sec.first));
    }
  }
  return c;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError(fmt::format("config: cannot open '{}'", path));
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

namespace detail {

inline std::string quoted(const std::string& s) {
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"' || ch == '\\') out += '\\';
    out += ch;
  }
  return out + "\"";
}

}  // namespace detail

/// Canonical text of a config; numbers use the shortest round-trip form.
inline std::string echo_config(const RunConfig& c) {
  std::string ts;
  for (std::size_t k = 0; k < c.protocol.ramp_times_ns.size(); ++k) {
    ts += fmt::format("{}{}", k ? ", " : "", c.protocol.ramp_times_ns[k]);
  }
  return fmt::format(
      "device:\n"
      "  omega_a_ghz: {}\n  omega_b_ghz: {}\n  alpha_a_ghz: {}\n  alpha_b_ghz: {}\n"
      "  max_coupling_mhz: {}\n  charge_cutoff: {}\n  levels_kept: {}\n"
      "protocol:\n"
      "  kind: {}\n  ramp_times_ns: [{}]\n  mode: {}\n  model: {}\n"
      "propagation:\n"
      "  abs_tol: {}\n  rel_tol: {}\n  max_step_ns: {}\n"
      "output:\n"
      "  directory: {}\n  samples_per_ns: {}\n",
      c.device.omega_a_ghz, c.device.omega_b_ghz, c.device.alpha_a_ghz, c.device.alpha_b_ghz,
      c.device.max_coupling_mhz, c.device.charge_cutoff, c.device.levels_kept, to_string(c.protocol.kind), ts,
      to_string(c.protocol.mode), to_string(c.protocol.model), c.propagation.abs_tol, c.propagation.rel_tol,
      c.propagation.max_step_ns, detail::quoted(c.output.directory), c.output.samples_per_ns);
}

}  // namespace czgate
