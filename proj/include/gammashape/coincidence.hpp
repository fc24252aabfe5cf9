// SPDX-License-Identifier: Apache-2.0
//
// Monte Carlo of the delayed-coincidence experiment. Decays form a Poisson
// process; each decay at t0 starts a photon whose vibration phase is
// Omega t0 (gated runs) or Omega t0 + theta0 (ungated runs, theta0 being the
// generator phase reference). The detection delay is drawn from the
// transmitted intensity for that phase, which is the single-photon detection
// density.
#pragma once

#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <atomic>
#include <cassert>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <sstream>
#include <thread>
#include <vector>

#include "gammashape/averaging.hpp"
#include "gammashape/errors.hpp"
#include "gammashape/rng.hpp"
#include "gammashape/scenario.hpp"
#include "gammashape/synthesis.hpp"

namespace gammashape {

enum class McMode { gated, ungated };

struct ExperimentSpec {
  ScenarioParams scenario;
  McMode mode = McMode::gated;
  double activity_kbq = 100.0;
  double duration_s = 1.0;
  /// Phase window [theta0, theta0 + gate_width] (theta0 from scenario.vibration).
  double gate_width_rad = std::numbers::pi / 2.0;
  double jitter_ns = 0.0;
  double coincidence_window_ns = 1500.0;
  double bin_width_ns = 5.0;
  std::size_t bins_per_period = 64;
  std::size_t phase_table_size = 64;
  /// Fraction of emitted 14.4 keV photons reaching the detector.
  double geometric_efficiency = 0.1;
  double batch_duration_s = 0.01;
  double tau_step_ns = 0.25;
  std::uint64_t seed = 1;
  unsigned threads = 1;

  double theta0() const { return scenario.vibration.theta0_rad; }
  /// Expected number of other detected photons inside one coincidence window.
  double overlap() const { return activity_kbq * 1e3 * geometric_efficiency * coincidence_window_ns * 1e-9; }
  /// Delay range covered by the phase tables (ns).
  double tau_max() const {
    return mode == McMode::gated ? coincidence_window_ns : 20.0 * scenario.emitter.lifetime_ns;
  }

  void validate() const {
    scenario.validate();
    if (!(activity_kbq > 0.0)) throw ConfigError("mc.activity_kbq must be > 0");
    if (!(duration_s >= 0.0)) throw ConfigError("mc.duration_s must be >= 0");
    if (!(gate_width_rad > 0.0 && gate_width_rad <= 2.0 * std::numbers::pi + 1e-12))
      throw ConfigError("gate.width_rad must be in (0, 2 pi]");
    if (!(jitter_ns >= 0.0)) throw ConfigError("mc.jitter_ns must be >= 0");
    if (!(coincidence_window_ns > 0.0)) throw ConfigError("mc.coincidence_window_ns must be > 0");
    if (!(bin_width_ns > 0.0 && bin_width_ns <= coincidence_window_ns))
      throw ConfigError("mc.bin_width_ns must be in (0, coincidence window]");
    if (bins_per_period < 3) throw ConfigError("mc.bins_per_period must be >= 3");
    if (phase_table_size < 8) throw ConfigError("mc.phase_table_size must be >= 8");
    if (!(geometric_efficiency > 0.0 && geometric_efficiency <= 1.0))
      throw ConfigError("mc.geometric_efficiency must be in (0, 1]");
    if (!(batch_duration_s > 0.0)) throw ConfigError("mc.batch_duration_s must be > 0");
    if (!(tau_step_ns > 0.0)) throw ConfigError("mc.tau_step_ns must be > 0");
    if (!(overlap() < 0.05)) {
      std::ostringstream msg;
      msg << "mc.activity_kbq too high: expected photon overlap in the coincidence window is " << overlap()
          << " (must be < 0.05)";
      throw ConfigError(msg.str());
    }
  }
};

struct Histogram {
  std::vector<double> bin_edges;        ///< ns
  std::vector<std::uint64_t> counts;
  std::uint64_t total_starts = 0;       ///< accepted starts (gated) or decays (ungated)
  std::uint64_t decays = 0;

  std::uint64_t total() const {
    std::uint64_t s = 0;
    for (auto c : counts) s += c;
    return s;
  }
  double bin_width() const { return bin_edges[1] - bin_edges[0]; }
};

inline Histogram make_histogram(double lo, double hi, std::size_t n_bins) {
  Histogram h;
  h.bin_edges.resize(n_bins + 1);
  for (std::size_t i = 0; i <= n_bins; ++i)
    h.bin_edges[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n_bins);
  h.counts.assign(n_bins, 0);
  return h;
}

/// Per-phase delay distributions: intensity tables at fixed vibration phases,
/// linearly mixed between neighbouring nodes.
class PhaseTable {
 public:
  /// Gated: nodes span [theta0, theta0 + width] inclusive. Periodic: nodes at
  /// 2 pi k / n. Throughputs are relative to the incident energy 1/(2 Gamma_r).
  PhaseTable(const SidebandFields& fields, double theta0, double width, std::size_t n_nodes, bool periodic,
             double gamma_r)
      : theta0_(periodic ? 0.0 : theta0),
        span_(periodic ? 2.0 * std::numbers::pi : width),
        periodic_(periodic),
        tau_(fields.grid().samples()) {
    if (n_nodes < 2) throw ConfigError("phase table needs at least 2 nodes");
    const double incident_energy = 1.0 / (2.0 * gamma_r);
    const double denom = periodic ? static_cast<double>(n_nodes) : static_cast<double>(n_nodes - 1);
    nodes_.resize(n_nodes);
    cdf_.resize(n_nodes);
    total_.resize(n_nodes);
    for (std::size_t k = 0; k < n_nodes; ++k) {
      nodes_[k] = theta0_ + span_ * static_cast<double>(k) / denom;
      const auto v = fields.intensity(nodes_[k]);
      auto& c = cdf_[k];
      c.assign(v.size(), 0.0);
      for (std::size_t i = 1; i < v.size(); ++i) c[i] = c[i - 1] + 0.5 * (v[i - 1] + v[i]) * (tau_[i] - tau_[i - 1]);
      if (!(c.back() > 0.0)) throw NumericalError("phase table: transmitted waveform is identically zero");
      total_[k] = c.back() / incident_energy;
    }
  }

  std::size_t size() const { return nodes_.size(); }
  double node(std::size_t k) const { return nodes_[k]; }
  double throughput(std::size_t k) const { return total_[k]; }

  /// Bracketing nodes and mixture weight of the second one.
  struct Bracket {
    std::size_t lo, hi;
    double w;
  };
  Bracket bracket(double theta) const {
    const std::size_t n = nodes_.size();
    if (periodic_) {
      double x = std::fmod(theta, 2.0 * std::numbers::pi);
      if (x < 0.0) x += 2.0 * std::numbers::pi;
      x *= static_cast<double>(n) / (2.0 * std::numbers::pi);
      auto k = static_cast<std::size_t>(x);
      if (k >= n) k = n - 1;
      return {k, (k + 1) % n, x - static_cast<double>(k)};
    }
    double x = (theta - theta0_) / span_ * static_cast<double>(n - 1);
    x = std::clamp(x, 0.0, static_cast<double>(n - 1));
    auto k = std::min(static_cast<std::size_t>(x), n - 2);
    return {k, k + 1, x - static_cast<double>(k)};
  }

  /// Probability that a photon emitted at phase theta is transmitted within
  /// the table's delay range.
  double transmission(double theta) const {
    const auto b = bracket(theta);
    return (1.0 - b.w) * total_[b.lo] + b.w * total_[b.hi];
  }

  /// Delay drawn from the mixture density at phase theta.
  template <class Rng>
  double sample_delay(double theta, Rng& rng) const {
    const auto b = bracket(theta);
    const double a = (1.0 - b.w) * total_[b.lo];
    const double c = b.w * total_[b.hi];
    const std::size_t k = rng.uniform() * (a + c) < a ? b.lo : b.hi;
    const auto& cdf = cdf_[k];
    const double target = rng.uniform() * cdf.back();
    auto it = std::upper_bound(cdf.begin(), cdf.end(), target);
    std::size_t i = static_cast<std::size_t>(it - cdf.begin());
    if (i == 0) i = 1;
    if (i >= cdf.size()) i = cdf.size() - 1;
    const double span = cdf[i] - cdf[i - 1];
    const double f = span > 0.0 ? (target - cdf[i - 1]) / span : 0.5;
    return tau_[i - 1] + f * (tau_[i] - tau_[i - 1]);
  }

 private:
  double theta0_;
  double span_;
  bool periodic_;
  std::vector<double> tau_;
  std::vector<double> nodes_;
  std::vector<std::vector<double>> cdf_;
  std::vector<double> total_;
};

inline bool in_gate(double phase, double theta0, double width) {
  double x = std::fmod(phase - theta0, 2.0 * std::numbers::pi);
  if (x < 0.0) x += 2.0 * std::numbers::pi;
  return x <= width;
}

namespace detail {

inline TimeGrid delay_grid(const ExperimentSpec& spec) {
  const auto n = static_cast<std::size_t>(std::ceil(spec.tau_max() / spec.tau_step_ns)) + 1;
  return TimeGrid::with_spacing(0.0, spec.tau_step_ns, n);
}

inline PhaseTable phase_table(const ExperimentSpec& spec) {
  const SidebandFields fields(spec.scenario, delay_grid(spec));
  return PhaseTable(fields, spec.theta0(), spec.gate_width_rad, spec.phase_table_size,
                    spec.mode == McMode::ungated, spec.scenario.gamma_r());
}

// Runs every batch, in parallel, and sums the integer histograms. Integer
// sums are exact, so the result does not depend on the thread count.
template <class BatchFn>
Histogram run_batches(const ExperimentSpec& spec, Histogram proto, BatchFn&& batch_fn) {
  const double duration_ns = spec.duration_s * 1e9;
  const double batch_ns = spec.batch_duration_s * 1e9;
  const auto n_batches = static_cast<std::uint64_t>(std::ceil(duration_ns / batch_ns - 1e-12));
  unsigned threads = spec.threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : spec.threads;
  threads = static_cast<unsigned>(std::min<std::uint64_t>(threads, std::max<std::uint64_t>(n_batches, 1)));
  std::vector<Histogram> partial(threads, proto);
  std::atomic<std::uint64_t> next{0};
  auto worker = [&](unsigned id) {
    for (;;) {
      const std::uint64_t b = next.fetch_add(1);
      if (b >= n_batches) break;
      const double start = static_cast<double>(b) * batch_ns;
      const double stop = std::min(duration_ns, start + batch_ns);
      Philox4x32 rng(spec.seed, b);
      batch_fn(rng, start, stop, partial[id]);
    }
  };
  if (threads == 1) {
    worker(0);
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker, t);
    for (auto& t : pool) t.join();
  }
  Histogram out = std::move(proto);
  for (const auto& h : partial) {
    for (std::size_t i = 0; i < out.counts.size(); ++i) out.counts[i] += h.counts[i];
    out.total_starts += h.total_starts;
    out.decays += h.decays;
  }
  return out;
}

}  // namespace detail

/// Phase-gated delayed-coincidence run: histogram of detection delays tau in
/// [0, coincidence window).
inline Histogram simulate_run(const ExperimentSpec& spec, const PhaseTable& table) {
  spec.validate();
  const auto n_bins = static_cast<std::size_t>(std::floor(spec.coincidence_window_ns / spec.bin_width_ns + 1e-9));
  auto proto = make_histogram(0.0, static_cast<double>(n_bins) * spec.bin_width_ns, n_bins);
  const double rate = spec.activity_kbq * 1e3 * 1e-9;  // per ns
  const double omega = spec.scenario.omega();
  const double period = spec.scenario.period_ns();
  const double theta0 = spec.theta0();
  const double width = spec.gate_width_rad;
  const double hi = proto.bin_edges.back();
  const double bw = spec.bin_width_ns;
  return detail::run_batches(spec, std::move(proto), [&](Philox4x32& rng, double start, double stop, Histogram& h) {
    double t = start + rng.exponential(rate);
    while (t < stop) {
      ++h.decays;
      const double phase = omega * std::fmod(t, period);
      if (in_gate(phase, theta0, width)) {
        assert(in_gate(phase, theta0, width));
        ++h.total_starts;
        double x = phase - theta0;
        if (x < 0.0) x += 2.0 * std::numbers::pi;
        const double theta = theta0 + std::min(x, width);
        if (rng.uniform() < spec.geometric_efficiency * table.transmission(theta)) {
          double tau = table.sample_delay(theta, rng);
          if (spec.jitter_ns > 0.0) tau += spec.jitter_ns * rng.normal();
          if (tau >= 0.0 && tau < hi) ++h.counts[std::min(static_cast<std::size_t>(tau / bw), h.counts.size() - 1)];
        }
      }
      t += rng.exponential(rate);
    }
  });
}

inline Histogram simulate_run(const ExperimentSpec& spec) {
  ExperimentSpec s = spec;
  s.mode = McMode::gated;
  return simulate_run(s, detail::phase_table(s));
}

/// Ungated run: arrival times of transmitted photons folded onto one vibration
/// period, t mod P.
inline Histogram simulate_ungated(const ExperimentSpec& spec, const PhaseTable& table) {
  spec.validate();
  const double period = spec.scenario.period_ns();
  auto proto = make_histogram(0.0, period, spec.bins_per_period);
  const double rate = spec.activity_kbq * 1e3 * 1e-9;
  const double omega = spec.scenario.omega();
  const double theta0 = spec.theta0();
  const double n_bins = static_cast<double>(spec.bins_per_period);
  return detail::run_batches(spec, std::move(proto), [&](Philox4x32& rng, double start, double stop, Histogram& h) {
    double t = start + rng.exponential(rate);
    while (t < stop) {
      ++h.decays;
      ++h.total_starts;
      const double t_mod = std::fmod(t, period);
      const double theta = omega * t_mod + theta0;
      if (rng.uniform() < spec.geometric_efficiency * table.transmission(theta)) {
        double arrival = t_mod + table.sample_delay(theta, rng);
        if (spec.jitter_ns > 0.0) arrival += spec.jitter_ns * rng.normal();
        double folded = std::fmod(arrival, period);
        if (folded < 0.0) folded += period;
        auto bin = static_cast<std::size_t>(folded / period * n_bins);
        ++h.counts[std::min(bin, h.counts.size() - 1)];
      }
      t += rng.exponential(rate);
    }
  });
}

inline Histogram simulate_ungated(const ExperimentSpec& spec, std::size_t bins_per_period) {
  ExperimentSpec s = spec;
  s.mode = McMode::ungated;
  s.bins_per_period = bins_per_period;
  return simulate_ungated(s, detail::phase_table(s));
}

/// Analytic curve matching simulate_run: the gate-averaged transmitted
/// waveform on the delay grid, smeared by the detector jitter.
inline Waveform analytic_gated(const ExperimentSpec& spec);
/// Analytic curve matching simulate_ungated: the full-flow intensity over one
/// period, smeared by the detector jitter.
inline Waveform analytic_ungated(const ExperimentSpec& spec, AverageForm form = AverageForm::consistent);

/// Gaussian smoothing of a sampled curve (periodic or zero-padded).
inline Waveform smear(const Waveform& w, double sigma, bool periodic) {
  if (!(sigma > 0.0)) return w;
  const double dt = w.grid.spacing();
  const auto half = static_cast<std::ptrdiff_t>(std::ceil(6.0 * sigma / dt));
  std::vector<double> kernel;
  double norm = 0.0;
  for (std::ptrdiff_t k = -half; k <= half; ++k) {
    const double x = static_cast<double>(k) * dt / sigma;
    kernel.push_back(std::exp(-0.5 * x * x));
    norm += kernel.back();
  }
  for (auto& k : kernel) k /= norm;
  const auto n = static_cast<std::ptrdiff_t>(w.values.size());
  // A periodic curve sampled at both ends of the period repeats its first sample.
  const std::ptrdiff_t period_n = periodic ? n - 1 : n;
  Waveform out{w.grid, std::vector<double>(w.values.size(), 0.0)};
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    double acc = 0.0;
    for (std::ptrdiff_t k = -half; k <= half; ++k) {
      std::ptrdiff_t j = i - k;
      if (periodic) {
        j %= period_n;
        if (j < 0) j += period_n;
      } else if (j < 0 || j >= n) {
        continue;
      }
      acc += kernel[static_cast<std::size_t>(k + half)] * w.values[static_cast<std::size_t>(j)];
    }
    out.values[static_cast<std::size_t>(i)] = acc;
  }
  return out;
}

inline Waveform analytic_gated(const ExperimentSpec& spec) {
  const SidebandFields fields(spec.scenario, detail::delay_grid(spec));
  const auto w = gate_average(fields, spec.theta0(), spec.gate_width_rad, spec.phase_table_size);
  return smear(w, spec.jitter_ns, false);
}

inline Waveform analytic_ungated(const ExperimentSpec& spec, AverageForm form) {
  const double period = spec.scenario.period_ns();
  const std::size_t n = 16 * spec.bins_per_period + 1;
  const TimeGrid grid(0.0, period, n);
  return smear(averaged_intensity(spec.scenario, grid, form), spec.jitter_ns, true);
}

struct GoodnessOfFit {
  double chi2 = 0.0;
  int dof = 0;
  double p_value = 0.0;
  double scale = 0.0;                    ///< fitted analytic-to-counts factor
  std::vector<double> residuals;         ///< standardised, per merged bin
  std::vector<double> observed;          ///< per merged bin
  std::vector<double> expected;          ///< scaled, per merged bin
  std::vector<std::size_t> group_start;  ///< first original bin of each merged bin
};

/// Integral of the piecewise-linear interpolant of w over [a, b].
inline double integrate_linear(const Waveform& w, double a, double b) {
  const auto& g = w.grid;
  const double dt = g.spacing();
  auto value = [&](double t) {
    double x = (t - g.t_start()) / dt;
    x = std::clamp(x, 0.0, static_cast<double>(g.size() - 1));
    auto i = std::min(static_cast<std::size_t>(x), g.size() - 2);
    const double f = x - static_cast<double>(i);
    return (1.0 - f) * w.values[i] + f * w.values[i + 1];
  };
  double acc = 0.0;
  double t = a;
  while (t < b) {
    double x = std::floor((t - g.t_start()) / dt + 1e-12);
    double next = std::min(b, g.t_start() + (x + 1.0) * dt);
    if (next <= t) next = std::min(b, t + dt);
    acc += 0.5 * (value(t) + value(next)) * (next - t);
    t = next;
  }
  return acc;
}

/// Pearson chi-square of observed counts against the analytic curve
/// integrated over each bin, with one fitted scale. Adjacent bins are merged
/// until each expects at least 5 counts.
inline GoodnessOfFit compare_histogram(const Histogram& h, const Waveform& analytic) {
  const std::size_t n = h.counts.size();
  std::vector<double> expected(n);
  double sum_e = 0.0, sum_o = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    expected[i] = integrate_linear(analytic, h.bin_edges[i], h.bin_edges[i + 1]);
    sum_e += expected[i];
    sum_o += static_cast<double>(h.counts[i]);
  }
  if (!(sum_o > 0.0)) throw NumericalError("compare_histogram: histogram is empty");
  if (!(sum_e > 0.0)) throw NumericalError("compare_histogram: analytic curve has no weight on the histogram support");
  GoodnessOfFit fit;
  fit.scale = sum_o / sum_e;
  double o = 0.0, e = 0.0;
  std::size_t start = 0;
  for (std::size_t i = 0; i < n; ++i) {
    o += static_cast<double>(h.counts[i]);
    e += fit.scale * expected[i];
    if (e >= 5.0) {
      fit.observed.push_back(o);
      fit.expected.push_back(e);
      fit.group_start.push_back(start);
      o = e = 0.0;
      start = i + 1;
    }
  }
  if (e > 0.0 || o > 0.0) {
    if (fit.expected.empty()) {
      fit.observed.push_back(o);
      fit.expected.push_back(e);
      fit.group_start.push_back(start);
    } else {
      fit.observed.back() += o;
      fit.expected.back() += e;
    }
  }
  if (fit.expected.size() < 3) {
    std::ostringstream msg;
    msg << "compare_histogram: only " << fit.expected.size() << " usable bins after merging (need >= 3)";
    throw NumericalError(msg.str());
  }
  for (std::size_t k = 0; k < fit.expected.size(); ++k) {
    const double r = (fit.observed[k] - fit.expected[k]) / std::sqrt(fit.expected[k]);
    fit.residuals.push_back(r);
    fit.chi2 += r * r;
  }
  fit.dof = static_cast<int>(fit.expected.size()) - 1;
  fit.p_value = boost::math::gamma_q(0.5 * fit.dof, 0.5 * fit.chi2);
  return fit;
}

}  // namespace gammashape
