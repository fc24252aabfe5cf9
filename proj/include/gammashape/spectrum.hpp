// SPDX-License-Identifier: Apache-2.0
//
// Incident single-photon field, its Bessel sideband decomposition in the
// vibrating absorber's frame, and the resulting comb spectrum.
//
// Conventions: fields are complex envelopes relative to the emitter carrier,
// E(tau) = (1/2pi) * integral dw  E~(w) exp(-i w tau), so a component
// 1 / (Gamma_r + i (w_c - w)) is the causal decay theta(tau) exp(-(i w_c + Gamma_r) tau).
// The incident intensity is normalised to 1 at tau = 0+.
#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <sstream>
#include <vector>

#include "gammashape/bessel.hpp"
#include "gammashape/grid.hpp"
#include "gammashape/units.hpp"

namespace gammashape {

/// N_r(tau) = theta(tau) exp(-2 Gamma_r tau), with theta(0) = 1.
inline Waveform incident_waveform(const TimeGrid& grid, const EmitterSpec& emitter) {
  const double g = emitter.gamma_r();
  Waveform w{grid, std::vector<double>(grid.size(), 0.0)};
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double tau = grid[i];
    w.values[i] = tau >= 0.0 ? std::exp(-2.0 * g * tau) : 0.0;
  }
  return w;
}

/// Smallest N >= ceil(p) + 2 with sum_{|n|>N} J_n(p)^2 < eps.
inline int bessel_truncation_order(double p, double eps = 1e-12) {
  if (!(p >= 0.0)) throw std::domain_error("bessel_truncation_order: p must be >= 0");
  if (!(eps > 0.0 && eps < 1.0)) throw std::domain_error("bessel_truncation_order: eps must be in (0, 1)");
  const int floor_order = static_cast<int>(std::ceil(p)) + 2;
  const int nmax = floor_order + static_cast<int>(std::ceil(2.0 * p)) + 60;
  const auto j = bessel_j_sequence(p, nmax);
  // tail[n] = 2 * sum_{k > n} J_k^2
  std::vector<double> tail(j.size(), 0.0);
  for (int n = nmax - 1; n >= 0; --n) {
    const double jn1 = j[static_cast<std::size_t>(n + 1)];
    tail[static_cast<std::size_t>(n)] = tail[static_cast<std::size_t>(n + 1)] + 2.0 * jn1 * jn1;
  }
  for (int n = floor_order; n < nmax; ++n)
    if (tail[static_cast<std::size_t>(n)] < eps) return n;
  return nmax;
}

struct Sideband {
  int index;              ///< n; the component sits at omega_r - n Omega
  double bessel;          ///< J_n(p), signed
  double center;          ///< rad/ns relative to the emitter carrier, -n Omega
  double phase;           ///< arg(J_n e^{i n theta0}) in (-pi, pi]

  double magnitude() const { return std::abs(bessel); }
  complex weight() const { return std::polar(magnitude(), phase); }
};

/// Frequency-modulation sidebands J_n(p) e^{i n theta0}, n = -N..N. Entries
/// with J_n exactly zero (only possible for p = 0) are omitted.
struct SidebandTable {
  double modulation_index;
  double theta0;
  double omega;
  std::vector<Sideband> entries;

  const Sideband* find(int n) const {
    for (const auto& e : entries)
      if (e.index == n) return &e;
    return nullptr;
  }
};

inline double wrap_phase(double a) {
  constexpr double pi = std::numbers::pi;
  double r = std::remainder(a, 2.0 * pi);  // [-pi, pi]
  if (r <= -pi) r += 2.0 * pi;
  return r;
}

inline SidebandTable sideband_table(double p, double theta0, int n_trunc, double omega = 0.0) {
  if (n_trunc < 1) throw std::invalid_argument("sideband_table: n_trunc must be >= 1");
  const auto j = bessel_j_sequence(p, n_trunc);
  SidebandTable table{p, theta0, omega, {}};
  for (int n = -n_trunc; n <= n_trunc; ++n) {
    const double jabs = j[static_cast<std::size_t>(std::abs(n))];
    const double jn = (n < 0 && (-n) % 2) ? -jabs : jabs;
    if (jn == 0.0) continue;
    const double phase = wrap_phase(n * theta0 + (jn < 0.0 ? std::numbers::pi : 0.0));
    table.entries.push_back({n, jn, -n * omega, phase});
  }
  // J_{-n} = (-1)^n J_n is built in above; keep the check explicit.
  for (const auto& e : table.entries) {
    if (e.index <= 0) continue;
    const auto* mirror = table.find(-e.index);
    const double expect = (e.index % 2) ? -e.bessel : e.bessel;
    if (mirror == nullptr || mirror->bessel != expect)
      throw NumericalError("sideband_table: J_{-n} = (-1)^n J_n violated");
  }
  return table;
}

/// Which baseband origin a spectrum is expressed in.
enum class Frame {
  /// Origin at the (Doppler-shifted) emitter carrier: sidebands at -n Omega,
  /// absorber line at rest_detuning - doppler_shift.
  emitter_carrier,
  /// Origin at the emitter line at rest: the whole comb is shifted by
  /// +doppler_shift, absorber line at rest_detuning.
  absorber_line,
};

/// Incident field at tau via the truncated Bessel sum,
/// theta(tau) e^{-Gamma_r tau} e^{i phi0} sum_n J_n e^{i n (Omega tau + theta0)}.
inline complex incident_field_bessel(const SidebandTable& table, const EmitterSpec& emitter, double tau) {
  if (tau < 0.0) return {0.0, 0.0};
  complex acc{0.0, 0.0};
  for (const auto& e : table.entries) acc += e.weight() * std::polar(1.0, e.index * table.omega * tau);
  return acc * std::polar(std::exp(-emitter.gamma_r() * tau), emitter.carrier_phase_rad);
}

/// Incident field at tau from the closed form
/// theta(tau) e^{-Gamma_r tau} e^{i phi0} e^{i p sin(Omega tau + theta0)}.
inline complex incident_field_exact(double p, double omega, double theta0, const EmitterSpec& emitter,
                                    double tau) {
  if (tau < 0.0) return {0.0, 0.0};
  return std::polar(std::exp(-emitter.gamma_r() * tau),
                    emitter.carrier_phase_rad + p * std::sin(omega * tau + theta0));
}

/// Comb spectrum sum_n J_n e^{i n theta0} e^{i phi0} / (Gamma_r + i (w_n - w)).
/// Throws ConfigError if the grid does not resolve Gamma_r or does not span
/// every sideband.
inline ComplexSpectrum comb_spectrum(const FrequencyGrid& grid, const EmitterSpec& emitter,
                                     const SidebandTable& table, Frame frame = Frame::emitter_carrier) {
  const double g = emitter.gamma_r();
  const double shift = frame == Frame::absorber_line
                           ? doppler_shift(emitter.photon_energy_kev, emitter.velocity_mm_s)
                           : 0.0;
  int n_max = 0;
  for (const auto& e : table.entries) n_max = std::max(n_max, std::abs(e.index));
  const double need_span = n_max * table.omega + std::abs(shift) + 40.0 * g;
  if (grid.spacing() > g / 8.0 || grid.half_span() < need_span) {
    std::ostringstream msg;
    msg << "comb_spectrum: frequency grid too coarse or narrow (spacing " << grid.spacing()
        << " rad/ns, needs <= " << g / 8.0 << "; half span " << grid.half_span() << " rad/ns, needs >= "
        << need_span << ")";
    throw ConfigError(msg.str());
  }
  ComplexSpectrum out{grid, std::vector<complex>(grid.size())};
  const complex global = std::polar(1.0, emitter.carrier_phase_rad);
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double w = grid[k];
    complex acc{0.0, 0.0};
    for (const auto& e : table.entries) acc += e.weight() / complex(g, e.center + shift - w);
    out.values[k] = global * acc;
  }
  return out;
}

}  // namespace gammashape
