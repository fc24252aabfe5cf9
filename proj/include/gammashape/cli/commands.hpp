// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <string>
#include <thread>
#include <vector>

#include "gammashape/absorber.hpp"
#include "gammashape/averaging.hpp"
#include "gammashape/cli/config.hpp"
#include "gammashape/cli/csv.hpp"
#include "gammashape/coincidence.hpp"
#include "gammashape/pulse_metrics.hpp"
#include "gammashape/spectrum.hpp"
#include "gammashape/synthesis.hpp"

#ifndef GAMMASHAPE_VERSION
#define GAMMASHAPE_VERSION "0.0.0"
#endif

namespace gammashape::cli {

inline constexpr int exit_ok = 0;
inline constexpr int exit_config = 1;
inline constexpr int exit_numerical = 2;
inline constexpr int exit_fit = 3;

struct Context {
  std::string command;
  ConfigValues values;
  RunConfig config;
  std::filesystem::path out_dir = ".";
  unsigned threads = 1;
  bool assert_fit = false;
  bool plot_script = false;
};

inline Header provenance(const Context& ctx) {
  Header h;
  h.emplace_back("tool", "gammashape");
  h.emplace_back("version", GAMMASHAPE_VERSION);
  h.emplace_back("command", ctx.command);
  for (const auto& [k, v] : ctx.values.values()) h.emplace_back("config." + k, v);
  for (const auto& [k, v] : ctx.values.sweep_text()) h.emplace_back("config.sweep." + k, v);
  const auto& s = ctx.config.scenario;
  h.emplace_back("derived.wavelength_angstrom", format_double(s.wavelength_angstrom()));
  h.emplace_back("derived.modulation_index", format_double(s.modulation_index()));
  h.emplace_back("derived.gamma_r_rad_per_ns", format_double(s.gamma_r()));
  h.emplace_back("derived.doppler_shift_mhz", format_double(units::rad_per_ns_to_mhz(s.doppler_shift())));
  h.emplace_back("derived.absorber_center_mhz", format_double(units::rad_per_ns_to_mhz(s.absorber_center())));
  h.emplace_back("derived.t_m_amplitude", format_double(s.absorber.t_m()));
  h.emplace_back("derived.truncation_order", std::to_string(s.truncation_order()));
  h.emplace_back("derived.period_ns", format_double(s.period_ns()));
  const auto thin = validate_thin_absorber(s.absorber.thickness_um, s.absorber.sound_speed_m_s, s.omega());
  h.emplace_back("derived.thin_absorber_ratio", format_double(thin.ratio));
  return h;
}

inline Header with(Header h, const Header& extra) {
  h.insert(h.end(), extra.begin(), extra.end());
  return h;
}

inline std::string path_in(const Context& ctx, const std::string& name) { return (ctx.out_dir / name).string(); }

inline void write_plot_script(const Context& ctx, const std::vector<std::string>& commands) {
  if (!ctx.plot_script) return;
  std::ofstream out(path_in(ctx, ctx.command + ".gp"), std::ios::binary);
  out << "# gnuplot script; run from the output directory: gnuplot -p " << ctx.command << ".gp\n";
  out << "set datafile separator ','\nset datafile commentschars '#'\nset key autotitle columnhead\n";
  for (const auto& c : commands) out << c << '\n';
}

/// Peaks above this fraction of the maximum count as dominant.
inline constexpr double dominant_fraction = 0.7;

inline std::int64_t dominant_peaks(const PulseMetrics& m) {
  double top = 0.0;
  for (const auto& p : m.pulses) top = std::max(top, p.height);
  std::int64_t n = 0;
  for (const auto& p : m.pulses) n += p.height > dominant_fraction * top;
  return n;
}

inline const std::vector<std::string>& metric_columns() {
  static const std::vector<std::string> cols = {
      "n_pulses",         "dominant_peaks", "median_peak_spacing_ns", "repetition_period_ns", "peak_to_incident",
      "strongest_time_ns", "strongest_height", "strongest_fwhm_ns",   "energy_throughput"};
  return cols;
}

inline std::vector<Cell> metric_cells(const PulseMetrics& m, double throughput) {
  const auto* s = m.strongest();
  const double nan = std::nan("");
  return {static_cast<std::int64_t>(m.pulses.size()),
          dominant_peaks(m),
          m.median_peak_spacing,
          m.repetition_period,
          m.peak_to_incident,
          s ? s->time : nan,
          s ? s->height : nan,
          s ? s->fwhm : nan,
          throughput};
}

/// Restriction of a waveform to tau >= 0.
inline Waveform causal_part(const Waveform& w) {
  std::size_t first = 0;
  while (first < w.grid.size() && w.grid[first] < 0.0) ++first;
  if (w.grid.size() - first < 2) return w;
  Waveform out{TimeGrid(w.grid[first], w.grid.t_end(), w.grid.size() - first), {}};
  out.values.assign(w.values.begin() + static_cast<std::ptrdiff_t>(first), w.values.end());
  return out;
}

/// Metrics of a single-photon waveform: the photon decay envelope is removed
/// before estimating the repetition period.
inline PulseMetrics photon_metrics(const ScenarioParams& s, const Waveform& w) {
  PulseMetricOptions opt;
  opt.envelope_rate = 2.0 * s.gamma_r();
  return pulse_metrics(causal_part(w), opt);
}

inline double mean_gate_throughput(const ScenarioParams& s, double theta0, double width, std::size_t n) {
  double acc = 0.0;
  for (std::size_t k = 0; k < n; ++k)
    acc += energy_throughput(s, theta0 + (static_cast<double>(k) + 0.5) * width / static_cast<double>(n));
  return acc / static_cast<double>(n);
}

inline constexpr std::size_t metric_periods = 8;

/// Full-flow intensity over several periods, used for its pulse metrics.
inline Waveform averaged_periods(const RunConfig& cfg, const BnmMatrix& bnm) {
  const double period = cfg.scenario.period_ns();
  const std::size_t n = cfg.samples_per_period;
  return averaged_intensity(cfg.scenario, bnm,
                            TimeGrid(0.0, metric_periods * period, metric_periods * n + 1));
}

struct ObservableMetrics {
  PulseMetrics metrics;
  double throughput;
};

inline ObservableMetrics observable_metrics(const RunConfig& cfg) {
  const auto& s = cfg.scenario;
  if (cfg.metrics_observable == "averaged") {
    const auto bnm = bnm_matrix(s, cfg.average_form);
    const auto w = averaged_periods(cfg, bnm);
    double mean = 0.0;
    for (std::size_t i = 0; i + 1 < w.values.size(); ++i) mean += w.values[i];
    mean /= static_cast<double>(w.values.size() - 1);
    return {pulse_metrics(w), mean};
  }
  const auto grid = cfg.time_grid();
  if (cfg.metrics_observable == "gate_averaged") {
    const auto w = gate_average(s, grid, cfg.gate_width_rad, cfg.gate_phase_samples);
    return {photon_metrics(s, w),
            mean_gate_throughput(s, s.vibration.theta0_rad, cfg.gate_width_rad, cfg.gate_phase_samples)};
  }
  return {photon_metrics(s, transmitted_waveform(s, grid)), energy_throughput(s)};
}

// ---------------------------------------------------------------------------

inline int cmd_spectrum(const Context& ctx) {
  const auto& s = ctx.config.scenario;
  const auto table = s.sidebands();
  const double g = s.gamma_r();
  const double gamma_a = s.absorber.halfwidth_rad_per_ns;
  const double center = s.absorber_center();
  const double half_span = s.truncation_order() * s.omega() + std::abs(center) + 40.0 * std::max(g, gamma_a);
  const auto grid = FrequencyGrid::covering(half_span, std::min(g, gamma_a) / 8.0);
  const auto comb = comb_spectrum(grid, s.emitter, table);
  const auto tf = transfer_function(grid, s.absorber, center);
  double peak = 0.0;
  for (const auto& v : comb.values) peak = std::max(peak, std::norm(v));

  const auto header = provenance(ctx);
  {
    CsvWriter csv(path_in(ctx, "spectrum.csv"), with(header, {{"frame", "emitter_carrier"}}),
                  {"freq_mhz", "comb_abs", "comb_phase_rad", "comb_intensity_norm", "absorber_transmission",
                   "transmitted_intensity_norm"});
    for (std::size_t k = 0; k < grid.size(); ++k) {
      const auto e = comb.values[k];
      csv.row({units::rad_per_ns_to_mhz(grid[k]), std::abs(e), std::arg(e), std::norm(e) / peak,
               std::norm(tf.values[k]), std::norm(e * tf.values[k]) / peak});
    }
  }

  // Sideband closest to the absorber line (Eq. indexing: n sits at -n Omega).
  const int resonant = static_cast<int>(std::lround(-center / s.omega()));
  const double shift = s.doppler_shift();
  const double offset_rest_mhz = units::rad_per_ns_to_mhz(-resonant * s.omega() + shift);
  const double carrier_mhz = units::rad_per_ns_to_mhz(units::carrier_rad_per_ns(s.emitter.photon_energy_kev));
  std::int64_t major = 0;
  for (const auto& e : table.entries) major += e.magnitude() >= 0.05;
  CsvWriter csv(path_in(ctx, "sidebands.csv"),
                with(header, {{"major_threshold", "0.05"},
                              {"major_count", std::to_string(major)},
                              {"resonant_sideband", std::to_string(resonant)},
                              {"resonant_sideband_offset_from_rest_line_mhz", format_double(offset_rest_mhz)},
                              {"resonant_sideband_absolute_mhz", format_double(carrier_mhz + offset_rest_mhz)}}),
                {"n", "bessel", "magnitude", "phase_rad", "center_mhz", "center_absorber_frame_mhz", "major",
                 "absorber_transmission"});
  for (const auto& e : table.entries) {
    csv.row({static_cast<std::int64_t>(e.index), e.bessel, e.magnitude(), e.phase, units::rad_per_ns_to_mhz(e.center),
             units::rad_per_ns_to_mhz(e.center + shift), static_cast<std::int64_t>(e.magnitude() >= 0.05),
             std::norm(transfer_value(s.absorber, center, e.center))});
  }
  write_plot_script(ctx, {"set multiplot layout 2,1", "plot 'spectrum.csv' using 1:4 with lines, '' using 1:5 with lines",
                          "plot 'sidebands.csv' using 5:3 with impulses", "unset multiplot"});
  return exit_ok;
}

inline int cmd_waveform(const Context& ctx) {
  const auto& cfg = ctx.config;
  const auto& s = cfg.scenario;
  const auto grid = cfg.time_grid();
  const auto incident = incident_waveform(grid, s.emitter);
  const auto transmitted = transmitted_waveform(s, grid);
  const SidebandFields fields(s, grid);
  const auto gated = gate_average(fields, s.vibration.theta0_rad, cfg.gate_width_rad, cfg.gate_phase_samples);

  const auto header = with(provenance(ctx), {{"normalisation", "incident intensity at tau=0+"}});
  {
    CsvWriter csv(path_in(ctx, "waveform.csv"), header,
                  {"tau_ns", "incident_norm", "transmitted_norm", "gate_averaged_norm"});
    for (std::size_t i = 0; i < grid.size(); ++i)
      csv.row({grid[i], incident.values[i], transmitted.values[i], gated.values[i]});
  }
  const auto m_tr = photon_metrics(s, transmitted);
  const auto m_ga = photon_metrics(s, gated);
  const double e_tr = energy_throughput(s);
  const double e_ga = mean_gate_throughput(s, s.vibration.theta0_rad, cfg.gate_width_rad, cfg.gate_phase_samples);
  {
    auto cols = metric_columns();
    cols.insert(cols.begin(), "observable");
    CsvWriter csv(path_in(ctx, "waveform_metrics.csv"), header, cols);
    auto row = metric_cells(m_tr, e_tr);
    row.insert(row.begin(), std::string("transmitted"));
    csv.row(row);
    row = metric_cells(m_ga, e_ga);
    row.insert(row.begin(), std::string("gate_averaged"));
    csv.row(row);
  }
  {
    CsvWriter csv(path_in(ctx, "waveform_pulses.csv"), header, {"observable", "index", "time_ns", "height", "fwhm_ns"});
    for (const auto* m : {&m_tr, &m_ga}) {
      const std::string name = m == &m_tr ? "transmitted" : "gate_averaged";
      for (std::size_t k = 0; k < m->pulses.size(); ++k)
        csv.row({name, static_cast<std::int64_t>(k), m->pulses[k].time, m->pulses[k].height, m->pulses[k].fwhm});
    }
  }
  write_plot_script(ctx, {"set xlabel 'tau (ns)'", "set ylabel 'N(tau)/N(t0)'",
                          "plot 'waveform.csv' using 1:2 with lines, '' using 1:3 with lines, '' using 1:4 with lines"});
  return exit_ok;
}

inline int cmd_average(const Context& ctx) {
  const auto& cfg = ctx.config;
  const auto& s = cfg.scenario;
  const double period = s.period_ns();
  const std::size_t n = cfg.samples_per_period;
  const auto bnm = bnm_matrix(s, cfg.average_form);
  const TimeGrid grid(0.0, period * static_cast<double>(n - 1) / static_cast<double>(n), n);
  const auto avg = averaged_intensity(s, bnm, grid);
  const std::string form = cfg.average_form == AverageForm::consistent ? "consistent" : "printed";
  const auto header = with(provenance(ctx), {{"average_form", form},
                                             {"normalisation", "full-flow rate without resonant absorption"}});
  {
    CsvWriter csv(path_in(ctx, "average.csv"), header, {"t_ns", "intensity_norm"});
    for (std::size_t i = 0; i < grid.size(); ++i) csv.row({grid[i], avg.values[i]});
  }
  {
    CsvWriter csv(path_in(ctx, "bnm.csv"), header, {"n", "m", "b_nm", "phi_nm_rad", "re", "im"});
    for (int a = -bnm.order; a <= bnm.order; ++a)
      for (int b = -bnm.order; b <= bnm.order; ++b) {
        const auto c = bnm(a, b);
        csv.row({static_cast<std::int64_t>(a), static_cast<std::int64_t>(b), std::abs(c), std::arg(c), c.real(),
                 c.imag()});
      }
  }
  {
    const auto m = pulse_metrics(averaged_periods(cfg, bnm));
    double mean = 0.0;
    for (double v : avg.values) mean += v;
    mean /= static_cast<double>(avg.values.size());
    auto cols = metric_columns();
    cols.insert(cols.begin(), "period_ns");
    CsvWriter csv(path_in(ctx, "average_metrics.csv"), with(header, {{"metrics_periods", std::to_string(metric_periods)}}), cols);
    auto row = metric_cells(m, mean);
    row.insert(row.begin(), period);
    csv.row(row);
  }
  write_plot_script(ctx, {"set xlabel 't (ns)'", "plot 'average.csv' using 1:2 with lines"});
  return exit_ok;
}

inline int cmd_mc(const Context& ctx, std::uint64_t seed) {
  const auto& cfg = ctx.config;
  ExperimentSpec spec = cfg.experiment;
  spec.seed = seed;
  spec.threads = ctx.threads;
  spec.validate();
  Histogram h;
  Waveform analytic{TimeGrid(0.0, 1.0, 2), {0.0, 0.0}};
  if (spec.mode == McMode::gated) {
    h = simulate_run(spec);
    analytic = analytic_gated(spec);
  } else {
    h = simulate_ungated(spec, spec.bins_per_period);
    analytic = analytic_ungated(spec, cfg.average_form);
  }
  const auto fit = compare_histogram(h, analytic);
  const bool pass = fit.p_value > cfg.p_value_floor;
  const auto header = with(provenance(ctx), {{"seed", std::to_string(seed)},
                                             {"mode", spec.mode == McMode::gated ? "gated" : "ungated"}});
  {
    CsvWriter csv(path_in(ctx, "histogram.csv"), header, {"bin_lo_ns", "bin_hi_ns", "counts", "expected"});
    for (std::size_t i = 0; i < h.counts.size(); ++i)
      csv.row({h.bin_edges[i], h.bin_edges[i + 1], static_cast<std::int64_t>(h.counts[i]),
               fit.scale * integrate_linear(analytic, h.bin_edges[i], h.bin_edges[i + 1])});
  }
  {
    CsvWriter csv(path_in(ctx, "analytic.csv"), header, {"t_ns", "intensity_norm"});
    for (std::size_t i = 0; i < analytic.grid.size(); ++i) csv.row({analytic.grid[i], analytic.values[i]});
  }
  {
    CsvWriter csv(path_in(ctx, "fit.csv"), header,
                  {"chi2", "dof", "p_value", "scale", "counts", "total_starts", "decays", "p_value_floor", "pass"});
    csv.row({fit.chi2, static_cast<std::int64_t>(fit.dof), fit.p_value, fit.scale, static_cast<std::int64_t>(h.total()),
             static_cast<std::int64_t>(h.total_starts), static_cast<std::int64_t>(h.decays), cfg.p_value_floor,
             static_cast<std::int64_t>(pass)});
  }
  {
    CsvWriter csv(path_in(ctx, "residuals.csv"), header, {"group", "first_bin", "observed", "expected", "residual"});
    for (std::size_t k = 0; k < fit.residuals.size(); ++k)
      csv.row({static_cast<std::int64_t>(k), static_cast<std::int64_t>(fit.group_start[k]), fit.observed[k],
               fit.expected[k], fit.residuals[k]});
  }
  write_plot_script(ctx, {"plot 'histogram.csv' using 1:3 with steps, '' using 1:4 with lines"});
  return (ctx.assert_fit && !pass) ? exit_fit : exit_ok;
}

inline constexpr std::size_t max_sweep_points = 1000000;

inline int cmd_sweep(const Context& ctx) {
  const auto axes = ctx.values.axes();
  double total = 1.0;
  for (const auto& a : axes) total *= static_cast<double>(a.values.size());
  if (total > static_cast<double>(max_sweep_points))
    throw ConfigError("sweep has " + format_double(total) + " points; the limit is " +
                      std::to_string(max_sweep_points));
  const auto count = static_cast<std::size_t>(total);

  // Row r enumerates the axes lexicographically, the first (sorted) axis slowest.
  auto point = [&](std::size_t r) {
    std::vector<std::pair<std::string, double>> p(axes.size());
    for (std::size_t a = axes.size(); a-- > 0;) {
      const auto& ax = axes[a];
      p[a] = {ax.key, ax.values[r % ax.values.size()]};
      r /= ax.values.size();
    }
    return p;
  };
  // Resolve every point up front so configuration errors surface before work starts.
  std::vector<RunConfig> configs;
  configs.reserve(count);
  for (std::size_t r = 0; r < count; ++r) configs.push_back(resolve(ctx.values.with(point(r))));

  std::vector<ObservableMetrics> results(count);
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      const std::size_t r = next.fetch_add(1);
      if (r >= count) break;
      try {
        results[r] = observable_metrics(configs[r]);
      } catch (...) {
        errors[r] = std::current_exception();
      }
    }
  };
  const unsigned threads = std::max(1u, std::min<unsigned>(ctx.threads, static_cast<unsigned>(count)));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  std::vector<std::string> cols;
  for (const auto& a : axes) cols.push_back(a.key);
  for (const auto& c : metric_columns()) cols.push_back(c);
  CsvWriter csv(path_in(ctx, "sweep.csv"),
                with(provenance(ctx), {{"points", std::to_string(count)},
                                       {"observable", ctx.config.metrics_observable}}),
                cols);
  for (std::size_t r = 0; r < count; ++r) {
    std::vector<Cell> row;
    for (const auto& [k, v] : point(r)) row.emplace_back(v);
    for (auto& c : metric_cells(results[r].metrics, results[r].throughput)) row.push_back(std::move(c));
    csv.row(row);
  }
  if (!axes.empty())
    write_plot_script(ctx, {"plot 'sweep.csv' using 1:" + std::to_string(axes.size() + 8) + " with linespoints"});
  return exit_ok;
}

}  // namespace gammashape::cli
