// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "gammashape/grid.hpp"

namespace gammashape {

struct Pulse {
  double time = 0.0;    ///< ns
  double height = 0.0;  ///< normalised intensity
  double fwhm = 0.0;    ///< ns; NaN when the half level is not reached on both sides
};

struct PulseMetrics {
  std::vector<Pulse> pulses;  ///< in time order
  /// Median spacing of consecutive peaks (ns); NaN with fewer than 2 peaks.
  double median_peak_spacing = std::nan("");
  /// Dominant repetition period from the autocorrelation (ns); NaN if none.
  double repetition_period = std::nan("");
  /// Highest peak divided by the incident intensity at tau = 0+ (1 in
  /// normalised units).
  double peak_to_incident = std::nan("");

  const Pulse* strongest() const {
    if (pulses.empty()) return nullptr;
    return &*std::max_element(pulses.begin(), pulses.end(),
                              [](const Pulse& a, const Pulse& b) { return a.height < b.height; });
  }
};

namespace detail {

// Crossing time of `level` between samples i and j by linear interpolation.
inline double crossing(const Waveform& w, std::size_t i, std::size_t j, double level) {
  const double a = w.values[i], b = w.values[j];
  const double f = (a == b) ? 0.5 : (level - a) / (b - a);
  return w.grid[i] + f * (w.grid[j] - w.grid[i]);
}

inline double autocorrelation_period(const Waveform& w, double envelope_rate) {
  const std::size_t n = w.values.size();
  if (n < 8) return std::nan("");
  std::vector<double> d(n);
  double mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    d[i] = w.values[i] * std::exp(envelope_rate * (w.grid[i] - w.grid.t_start()));
    mean += d[i];
  }
  mean /= static_cast<double>(n);
  for (auto& x : d) x -= mean;
  const std::size_t max_lag = n / 2;
  std::vector<double> r(max_lag + 1, 0.0);
  for (std::size_t lag = 0; lag <= max_lag; ++lag) {
    double acc = 0.0;
    for (std::size_t i = 0; i + lag < n; ++i) acc += d[i] * d[i + lag];
    r[lag] = acc / static_cast<double>(n);
  }
  if (!(r[0] > 0.0)) return std::nan("");
  // Skip the central lobe (up to its first local minimum), then take the
  // highest remaining lag. Decaying trains keep r > 0 well past one period,
  // so a zero-crossing rule would fail.
  std::size_t lag = 1;
  while (lag < max_lag && r[lag + 1] < r[lag]) ++lag;
  if (lag >= max_lag) return std::nan("");
  std::size_t best = lag;
  for (std::size_t k = lag; k <= max_lag; ++k)
    if (r[k] > r[best]) best = k;
  if (best == lag || best == max_lag) return std::nan("");
  const double y0 = r[best - 1], y1 = r[best], y2 = r[best + 1];
  const double denom = y0 - 2.0 * y1 + y2;
  const double shift = denom != 0.0 ? 0.5 * (y0 - y2) / denom : 0.0;
  return (static_cast<double>(best) + shift) * w.grid.spacing();
}

}  // namespace detail

struct PulseMetricOptions {
  double relative_threshold = 0.05;
  std::size_t min_separation = 3;
  /// Known exponential decay rate of the whole curve (1/ns, 2 Gamma_r for a
  /// single-photon waveform). It is divided out before the autocorrelation.
  double envelope_rate = 0.0;
};

/// Peaks are local maxima strictly above 5% of the global maximum, at least
/// 3 samples apart (the higher one wins). Pulse width is the full width at
/// half of the peak height; the search on each side stops at the neighbouring
/// valley.
inline PulseMetrics pulse_metrics(const Waveform& w, const PulseMetricOptions& opt = {}) {
  const double relative_threshold = opt.relative_threshold;
  const std::size_t min_separation = opt.min_separation;
  PulseMetrics m;
  const auto& v = w.values;
  const std::size_t n = v.size();
  if (n < 3) return m;
  const double vmax = *std::max_element(v.begin(), v.end());
  if (!(vmax > 0.0)) return m;

  std::vector<std::size_t> peaks;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (!(v[i] > relative_threshold * vmax)) continue;
    if (!(v[i] > v[i - 1] && v[i] >= v[i + 1])) continue;
    if (!peaks.empty() && i - peaks.back() < min_separation) {
      if (v[i] > v[peaks.back()]) peaks.back() = i;
      continue;
    }
    peaks.push_back(i);
  }

  for (std::size_t k = 0; k < peaks.size(); ++k) {
    const std::size_t i = peaks[k];
    const double half = 0.5 * v[i];
    double left = std::nan(""), right = std::nan("");
    const std::size_t lo = k > 0 ? peaks[k - 1] : 0;
    const std::size_t hi = k + 1 < peaks.size() ? peaks[k + 1] : n - 1;
    for (std::size_t j = i; j > lo; --j)
      if (v[j - 1] <= half) {
        left = detail::crossing(w, j - 1, j, half);
        break;
      }
    for (std::size_t j = i; j < hi; ++j)
      if (v[j + 1] <= half) {
        right = detail::crossing(w, j, j + 1, half);
        break;
      }
    m.pulses.push_back({w.grid[i], v[i], right - left});
  }

  if (peaks.size() >= 2) {
    std::vector<double> gaps;
    for (std::size_t k = 1; k < peaks.size(); ++k) gaps.push_back(w.grid[peaks[k]] - w.grid[peaks[k - 1]]);
    std::sort(gaps.begin(), gaps.end());
    const std::size_t h = gaps.size() / 2;
    m.median_peak_spacing = gaps.size() % 2 ? gaps[h] : 0.5 * (gaps[h - 1] + gaps[h]);
  }
  if (!peaks.empty()) {
    m.repetition_period = detail::autocorrelation_period(w, opt.envelope_rate);
    m.peak_to_incident = vmax;
  }
  return m;
}

}  // namespace gammashape
