// SPDX-License-Identifier: Apache-2.0
//
// Run configuration: flat "key = value" text files with '#' comments.
// Every key has a default; files and overrides replace values. The resolved
// key set is echoed into every output header.
#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "gammashape/averaging.hpp"
#include "gammashape/coincidence.hpp"
#include "gammashape/errors.hpp"
#include "gammashape/scenario.hpp"

namespace gammashape::cli {

inline const std::vector<std::pair<std::string, std::string>>& default_keys() {
  static const std::vector<std::pair<std::string, std::string>> keys = {
      {"emitter.photon_energy_kev", "14.4"},
      {"emitter.lifetime_ns", "141"},
      {"emitter.velocity_mm_s", "0"},
      {"emitter.carrier_phase_rad", "0"},
      {"absorber.halfwidth_mhz", "0.565"},
      {"absorber.rest_detuning_mhz", "0"},
      {"absorber.t_m", "5.18"},
      {"absorber.t_m_convention", "amplitude"},
      {"absorber.nonresonant_depth", "0"},
      {"absorber.thickness_um", "25"},
      {"absorber.sound_speed_m_s", "5000"},
      {"vibration.frequency_mhz", "10.2"},
      {"vibration.amplitude_angstrom", "0.25"},
      {"vibration.modulation_index", ""},
      {"vibration.phase_rad", "0"},
      {"grid.t_start_ns", "0"},
      {"grid.t_end_ns", "800"},
      {"grid.n_samples", "1601"},
      {"grid.max_frequency_spacing_mhz", "0.05"},
      {"grid.max_time_step_ns", "0.1"},
      {"truncation.epsilon", "1e-12"},
      {"gate.width_rad", "pi/2"},
      {"gate.phase_samples", "64"},
      {"average.form", "consistent"},
      {"average.samples_per_period", "256"},
      {"metrics.observable", "transmitted"},
      {"mc.mode", "gated"},
      {"mc.activity_kbq", "100"},
      {"mc.duration_s", "10"},
      {"mc.jitter_ns", "0"},
      {"mc.coincidence_window_ns", "1500"},
      {"mc.bin_width_ns", "5"},
      {"mc.bins_per_period", "64"},
      {"mc.phase_table_size", "64"},
      {"mc.geometric_efficiency", "0.1"},
      {"mc.p_value_floor", "0.0027"},
      {"mc.batch_duration_s", "0.01"},
      {"mc.seed", "1"},
  };
  return keys;
}

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

/// Parses a plain number or a multiple of pi: "1.5", "pi", "pi/2", "2*pi", "3pi/4".
inline double parse_number(const std::string& key, const std::string& text) {
  const std::string s = trim(text);
  auto plain = [&](std::string_view v, double& out) {
    if (v.empty()) return false;
    const auto* first = v.data();
    const auto* last = v.data() + v.size();
    if (*first == '+') ++first;
    const auto r = std::from_chars(first, last, out);
    return r.ec == std::errc{} && r.ptr == last;
  };
  double value = 0.0;
  if (plain(s, value)) return value;
  const auto pos = s.find("pi");
  if (pos != std::string::npos) {
    std::string head = trim(std::string_view(s).substr(0, pos));
    std::string tail = trim(std::string_view(s).substr(pos + 2));
    if (!head.empty() && head.back() == '*') head = trim(std::string_view(head).substr(0, head.size() - 1));
    double mul = 1.0, div = 1.0;
    bool ok = true;
    if (head == "-") mul = -1.0;
    else if (!head.empty()) ok = plain(head, mul);
    if (ok && !tail.empty()) ok = tail.front() == '/' && plain(trim(std::string_view(tail).substr(1)), div);
    if (ok && div != 0.0) return mul * std::numbers::pi / div;
  }
  throw ConfigError("invalid numeric value for '" + key + "': '" + text + "'");
}

/// Sweep axis values: "[a, b, c]", "a, b, c" or "linspace(a, b, n)".
inline std::vector<double> parse_axis(const std::string& key, const std::string& text) {
  std::string s = trim(text);
  std::vector<double> out;
  if (s.rfind("linspace(", 0) == 0 && s.back() == ')') {
    const auto args = parse_axis(key, s.substr(9, s.size() - 10));
    if (args.size() != 3 || args[2] < 1.0 || args[2] != std::floor(args[2]))
      throw ConfigError("linspace for '" + key + "' needs (start, stop, count >= 1)");
    const auto n = static_cast<std::size_t>(args[2]);
    for (std::size_t i = 0; i < n; ++i)
      out.push_back(n == 1 ? args[0] : args[0] + (args[1] - args[0]) * static_cast<double>(i) / static_cast<double>(n - 1));
    return out;
  }
  if (!s.empty() && s.front() == '[') {
    if (s.back() != ']') throw ConfigError("unterminated list for '" + key + "'");
    s = s.substr(1, s.size() - 2);
  }
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (trim(item).empty()) continue;
    out.push_back(parse_number(key, item));
  }
  return out;
}

struct SweepAxis {
  std::string key;
  std::vector<double> values;
};

/// Key/value store with defaults and tracking of explicitly set keys.
class ConfigValues {
 public:
  ConfigValues() {
    for (const auto& [k, v] : default_keys()) values_[k] = v;
  }

  bool known(const std::string& key) const { return values_.count(key) != 0; }

  void set(const std::string& key, const std::string& value) {
    if (key.rfind("sweep.", 0) == 0) {
      const std::string target = key.substr(6);
      if (!known(target) || !is_numeric_key(target)) throw ConfigError("unknown sweep axis key '" + key + "'");
      sweep_[target] = value;
      return;
    }
    if (!known(key)) throw ConfigError("unknown config key '" + key + "'");
    values_[key] = trim(value);
    explicit_.insert(key);
  }

  /// Loads a file. Repeated keys within one file are an error; later files
  /// override earlier ones.
  void load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::set<std::string> seen;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      line = trim(line);
      if (line.empty()) continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos)
        throw ConfigError(path + ":" + std::to_string(lineno) + ": expected 'key = value'");
      const std::string key = trim(std::string_view(line).substr(0, eq));
      const std::string value = trim(std::string_view(line).substr(eq + 1));
      if (!seen.insert(key).second) throw ConfigError(path + ":" + std::to_string(lineno) + ": duplicate key '" + key + "'");
      set(key, value);
    }
  }

  const std::string& get(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) throw ConfigError("unknown config key '" + key + "'");
    return it->second;
  }
  double number(const std::string& key) const { return parse_number(key, get(key)); }
  bool is_set(const std::string& key) const { return explicit_.count(key) != 0; }

  const std::map<std::string, std::string>& values() const { return values_; }

  /// Sweep axes sorted by key name.
  std::vector<SweepAxis> axes() const {
    std::vector<SweepAxis> out;
    for (const auto& [k, v] : sweep_) {
      auto values = parse_axis("sweep." + k, v);
      if (values.empty()) throw ConfigError("sweep axis 'sweep." + k + "' has no values");
      out.push_back({k, std::move(values)});
    }
    return out;
  }
  const std::map<std::string, std::string>& sweep_text() const { return sweep_; }

  /// Copy with numeric overrides applied (used for sweep points).
  ConfigValues with(const std::vector<std::pair<std::string, double>>& overrides) const {
    ConfigValues c = *this;
    for (const auto& [k, v] : overrides) {
      char buf[64];
      const auto r = std::to_chars(buf, buf + sizeof buf, v);
      c.values_[k] = std::string(buf, r.ptr);
      c.explicit_.insert(k);
    }
    return c;
  }

  static bool is_numeric_key(const std::string& key) {
    return key != "absorber.t_m_convention" && key != "average.form" && key != "mc.mode" &&
           key != "metrics.observable";
  }

 private:
  std::map<std::string, std::string> values_;
  std::map<std::string, std::string> sweep_;
  std::set<std::string> explicit_;
};

inline std::size_t as_count(const ConfigValues& c, const std::string& key) {
  const double v = c.number(key);
  if (!(v >= 0.0) || v != std::floor(v) || v > 1e12) throw ConfigError("'" + key + "' must be a non-negative integer");
  return static_cast<std::size_t>(v);
}

/// Typed view of a configuration.
struct RunConfig {
  ScenarioParams scenario;
  double t_start_ns = 0.0;
  double t_end_ns = 800.0;
  std::size_t n_samples = 1601;
  double gate_width_rad = std::numbers::pi / 2.0;
  std::size_t gate_phase_samples = 64;
  AverageForm average_form = AverageForm::consistent;
  std::size_t samples_per_period = 256;
  std::string metrics_observable = "transmitted";
  ExperimentSpec experiment;
  double p_value_floor = 0.0027;
  std::vector<std::string> warnings;

  TimeGrid time_grid() const { return TimeGrid(t_start_ns, t_end_ns, n_samples); }
};

inline RunConfig resolve(const ConfigValues& c) {
  RunConfig r;
  auto& s = r.scenario;
  s.emitter.photon_energy_kev = c.number("emitter.photon_energy_kev");
  s.emitter.lifetime_ns = c.number("emitter.lifetime_ns");
  s.emitter.velocity_mm_s = c.number("emitter.velocity_mm_s");
  s.emitter.carrier_phase_rad = c.number("emitter.carrier_phase_rad");
  s.absorber.halfwidth_rad_per_ns = units::mhz_to_rad_per_ns(c.number("absorber.halfwidth_mhz"));
  s.absorber.rest_detuning_rad_per_ns = units::mhz_to_rad_per_ns(c.number("absorber.rest_detuning_mhz"));
  s.absorber.thickness_value = c.number("absorber.t_m");
  const auto& conv = c.get("absorber.t_m_convention");
  if (conv == "amplitude") s.absorber.convention = ThicknessConvention::amplitude;
  else if (conv == "intensity") s.absorber.convention = ThicknessConvention::intensity;
  else throw ConfigError("'absorber.t_m_convention' must be 'amplitude' or 'intensity', got '" + conv + "'");
  s.absorber.nonresonant_depth = c.number("absorber.nonresonant_depth");
  s.absorber.thickness_um = c.number("absorber.thickness_um");
  s.absorber.sound_speed_m_s = c.number("absorber.sound_speed_m_s");
  s.vibration.omega_rad_per_ns = units::mhz_to_rad_per_ns(c.number("vibration.frequency_mhz"));
  s.vibration.theta0_rad = c.number("vibration.phase_rad");
  if (!c.get("vibration.modulation_index").empty()) {
    if (c.is_set("vibration.amplitude_angstrom"))
      throw ConfigError("set only one of 'vibration.amplitude_angstrom' and 'vibration.modulation_index'");
    const double p = c.number("vibration.modulation_index");
    if (!(p >= 0.0)) throw ConfigError("'vibration.modulation_index' must be >= 0");
    s.vibration.amplitude_angstrom = p * photon_wavelength(s.emitter.photon_energy_kev) / units::two_pi;
  } else {
    s.vibration.amplitude_angstrom = c.number("vibration.amplitude_angstrom");
  }
  s.synthesis.max_frequency_spacing_mhz = c.number("grid.max_frequency_spacing_mhz");
  s.synthesis.max_time_step_ns = c.number("grid.max_time_step_ns");
  s.truncation_epsilon = c.number("truncation.epsilon");

  r.t_start_ns = c.number("grid.t_start_ns");
  r.t_end_ns = c.number("grid.t_end_ns");
  r.n_samples = as_count(c, "grid.n_samples");
  r.gate_width_rad = c.number("gate.width_rad");
  r.gate_phase_samples = as_count(c, "gate.phase_samples");
  const auto& form = c.get("average.form");
  if (form == "consistent") r.average_form = AverageForm::consistent;
  else if (form == "printed") r.average_form = AverageForm::printed;
  else throw ConfigError("'average.form' must be 'consistent' or 'printed', got '" + form + "'");
  r.samples_per_period = as_count(c, "average.samples_per_period");
  r.metrics_observable = c.get("metrics.observable");
  if (r.metrics_observable != "transmitted" && r.metrics_observable != "gate_averaged" &&
      r.metrics_observable != "averaged")
    throw ConfigError("'metrics.observable' must be transmitted, gate_averaged or averaged");

  auto& e = r.experiment;
  e.scenario = s;
  const auto& mode = c.get("mc.mode");
  if (mode == "gated") e.mode = McMode::gated;
  else if (mode == "ungated") e.mode = McMode::ungated;
  else throw ConfigError("'mc.mode' must be 'gated' or 'ungated', got '" + mode + "'");
  e.activity_kbq = c.number("mc.activity_kbq");
  e.duration_s = c.number("mc.duration_s");
  e.gate_width_rad = r.gate_width_rad;
  e.jitter_ns = c.number("mc.jitter_ns");
  e.coincidence_window_ns = c.number("mc.coincidence_window_ns");
  e.bin_width_ns = c.number("mc.bin_width_ns");
  e.bins_per_period = as_count(c, "mc.bins_per_period");
  e.phase_table_size = as_count(c, "mc.phase_table_size");
  e.geometric_efficiency = c.number("mc.geometric_efficiency");
  e.batch_duration_s = c.number("mc.batch_duration_s");
  e.seed = as_count(c, "mc.seed");
  r.p_value_floor = c.number("mc.p_value_floor");

  // Domain errors from unit conversions surface as configuration errors.
  try {
    r.warnings = s.validate();
    (void)s.modulation_index();
    (void)s.doppler_shift();
    e.validate();
  } catch (const std::domain_error& ex) {
    throw ConfigError(ex.what());
  }
  if (r.n_samples < 2) throw ConfigError("'grid.n_samples' must be >= 2");
  if (!(r.t_end_ns > r.t_start_ns)) throw ConfigError("'grid.t_end_ns' must exceed 'grid.t_start_ns'");
  if (!(r.gate_width_rad > 0.0 && r.gate_width_rad <= 2.0 * std::numbers::pi + 1e-12))
    throw ConfigError("'gate.width_rad' must be in (0, 2 pi]");
  if (r.gate_phase_samples < 8) throw ConfigError("'gate.phase_samples' must be >= 8");
  if (r.samples_per_period < 8) throw ConfigError("'average.samples_per_period' must be >= 8");
  return r;
}

}  // namespace gammashape::cli
