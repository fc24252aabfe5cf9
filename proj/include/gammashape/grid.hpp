// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <sstream>
#include <vector>

#include "gammashape/errors.hpp"

namespace gammashape {

using complex = std::complex<double>;

/// Uniform sampling of the delay tau = t - t0, in ns.
class TimeGrid {
 public:
  TimeGrid(double t_start, double t_end, std::size_t n_samples)
      : t_start_(t_start), t_end_(t_end), n_(n_samples) {
    if (n_samples < 2) throw ConfigError("TimeGrid: n_samples must be >= 2");
    if (!(t_end > t_start)) throw ConfigError("TimeGrid: t_end must exceed t_start");
  }

  /// Grid with a prescribed spacing; the end point is start + (n-1) dt.
  static TimeGrid with_spacing(double t_start, double dt, std::size_t n_samples) {
    return TimeGrid(t_start, t_start + dt * static_cast<double>(n_samples - 1), n_samples);
  }

  double t_start() const { return t_start_; }
  double t_end() const { return t_end_; }
  std::size_t size() const { return n_; }
  double spacing() const { return (t_end_ - t_start_) / static_cast<double>(n_ - 1); }
  double operator[](std::size_t i) const { return t_start_ + spacing() * static_cast<double>(i); }

  std::vector<double> samples() const {
    std::vector<double> out(n_);
    for (std::size_t i = 0; i < n_; ++i) out[i] = (*this)[i];
    return out;
  }

 private:
  double t_start_;
  double t_end_;
  std::size_t n_;
};

/// Uniform baseband frequency grid omega_k = center + (k - n/2) * spacing,
/// rad/ns, relative to a carrier. n is a power of two so the grid maps onto an
/// FFT without padding.
class FrequencyGrid {
 public:
  FrequencyGrid(std::size_t n_samples, double spacing, double center = 0.0)
      : n_(n_samples), spacing_(spacing), center_(center) {
    if (n_samples < 2 || (n_samples & (n_samples - 1)) != 0)
      throw ConfigError("FrequencyGrid: n_samples must be a power of two >= 2");
    if (!(spacing > 0.0)) throw ConfigError("FrequencyGrid: spacing must be > 0");
  }

  /// Smallest power-of-two grid with the given maximum spacing covering
  /// [center - half_span, center + half_span].
  static FrequencyGrid covering(double half_span, double max_spacing, double center = 0.0) {
    std::size_t n = 2;
    while (static_cast<double>(n / 2 - 1) * max_spacing < half_span) n *= 2;
    return FrequencyGrid(n, max_spacing, center);
  }

  std::size_t size() const { return n_; }
  double spacing() const { return spacing_; }
  double center() const { return center_; }
  /// Largest |omega - center| that is sampled on both sides.
  double half_span() const { return static_cast<double>(n_ / 2 - 1) * spacing_; }
  double operator[](std::size_t k) const {
    return center_ + (static_cast<double>(k) - static_cast<double>(n_ / 2)) * spacing_;
  }

 private:
  std::size_t n_;
  double spacing_;
  double center_;
};

/// Complex spectral amplitude sampled on a FrequencyGrid.
struct ComplexSpectrum {
  FrequencyGrid grid;
  std::vector<complex> values;
};

/// Real, nonnegative count rate sampled on a TimeGrid.
struct Waveform {
  TimeGrid grid;
  std::vector<double> values;

  std::size_t size() const { return values.size(); }
  double time(std::size_t i) const { return grid[i]; }
};

}  // namespace gammashape
