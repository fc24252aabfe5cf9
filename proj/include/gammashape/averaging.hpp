// SPDX-License-Identifier: Apache-2.0
//
// Full-flow intensity: the transmitted count rate averaged over the emission
// moment t0, as observed without phase gating.
//
//   N(t) = 2 Gamma_r e^{-2 delta_e L} sum_{n,m} J_n J_m Re[e^{i(n-m)(Omega t + theta0)} C_nm]
//   C_nm = (1/2pi) integral dw H~(w - n Omega) conj(H~(w - m Omega)) / (w^2 + Gamma_r^2)
//
// With T_M = 0 every C_nm = 1/(2 Gamma_r), so N = 1: the curve is normalised to
// the full-flow rate without resonant absorption. C_nm = B_nm e^{i phi_nm}.
#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "gammashape/absorber.hpp"
#include "gammashape/grid.hpp"
#include "gammashape/line_integral.hpp"
#include "gammashape/scenario.hpp"

namespace gammashape {

enum class AverageForm {
  /// Exponent -T_M (x_n + conj x_m), the direct consequence of the
  /// single-phase transfer function.
  consistent,
  /// Exponent -(T_M/2)(x_n + conj x_m) with an e^{-T_M} prefactor.
  printed,
};

/// C_nm by adaptive quadrature over the whole frequency axis (tan mapping,
/// relative tolerance 1e-8 of 1/(2 Gamma_r)).
inline complex bnm_phi(int n, int m, const ScenarioParams& params, AverageForm form = AverageForm::consistent) {
  const double g = params.gamma_r();
  const double omega = params.omega();
  const double center = params.absorber_center();
  const double gamma_a = params.absorber.halfwidth_rad_per_ns;
  const double t_m = params.absorber.t_m();
  const double t_exp = form == AverageForm::printed ? 0.5 * t_m : t_m;
  const double prefactor = form == AverageForm::printed ? std::exp(-t_m) : 1.0;

  // Integrand in phi with w = Gamma_r tan(phi): 1/(w^2+Gamma^2) dw = dphi / Gamma.
  auto f = [&](double phi) {
    const double w = g * std::tan(phi);
    const complex zn = -t_exp / complex(1.0, (center + n * omega - w) / gamma_a);
    const complex zm = -t_exp / complex(1.0, -(center + m * omega - w) / gamma_a);
    return std::exp(zn + zm);
  };
  std::vector<double> cuts{0.0, std::atan(1.0), -std::atan(1.0)};
  const double line_width = gamma_a * (1.0 + t_exp);
  for (int idx : {n, m}) {
    const double c = center + idx * omega;
    for (double k : {0.0, 0.3, 1.0, 3.0, 10.0, 30.0}) {
      cuts.push_back(std::atan((c + k * line_width) / g));
      cuts.push_back(std::atan((c - k * line_width) / g));
    }
  }
  quad::Options opt;
  opt.abs_tol = 1e-10 * std::numbers::pi;
  opt.rel_tol = 1e-10;
  opt.max_intervals = 50000;
  const auto r = quad::integrate(f, -std::numbers::pi / 2.0, std::numbers::pi / 2.0, opt, cuts);
  return prefactor * r.value / (2.0 * std::numbers::pi * g);
}

/// All C_nm for |n|, |m| <= N; stored row-major with index (n + N).
struct BnmMatrix {
  int order = 0;
  AverageForm form = AverageForm::consistent;
  std::vector<complex> values;

  complex operator()(int n, int m) const {
    const int dim = 2 * order + 1;
    return values[static_cast<std::size_t>((n + order) * dim + (m + order))];
  }
};

/// Only n <= m is integrated; the rest follows from C_mn = conj(C_nm).
inline BnmMatrix bnm_matrix(const ScenarioParams& params, AverageForm form = AverageForm::consistent) {
  BnmMatrix b;
  b.order = params.truncation_order();
  b.form = form;
  const int dim = 2 * b.order + 1;
  b.values.assign(static_cast<std::size_t>(dim * dim), complex{});
  for (int n = -b.order; n <= b.order; ++n)
    for (int m = n; m <= b.order; ++m) {
      const complex c = bnm_phi(n, m, params, form);
      b.values[static_cast<std::size_t>((n + b.order) * dim + (m + b.order))] = c;
      b.values[static_cast<std::size_t>((m + b.order) * dim + (n + b.order))] = n == m ? complex(c.real(), 0.0)
                                                                                     : std::conj(c);
    }
  return b;
}

/// Full-flow intensity on an absolute time grid t (ns), phase reference
/// Omega t + theta0.
inline Waveform averaged_intensity(const ScenarioParams& params, const BnmMatrix& bnm, const TimeGrid& grid) {
  const auto table = params.sidebands(0.0);
  const double g = params.gamma_r();
  const double omega = params.omega();
  const double theta0 = params.vibration.theta0_rad;
  const double scale = 2.0 * g * std::exp(-2.0 * params.absorber.nonresonant_depth);
  Waveform w{grid, std::vector<double>(grid.size(), 0.0)};
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double phase = omega * grid[i] + theta0;
    double acc = 0.0;
    for (const auto& a : table.entries)
      for (const auto& b : table.entries) {
        if (std::abs(a.index) > bnm.order || std::abs(b.index) > bnm.order) continue;
        const complex c = bnm(a.index, b.index);
        acc += a.bessel * b.bessel * (std::polar(1.0, (a.index - b.index) * phase) * c).real();
      }
    w.values[i] = scale * acc;
  }
  return w;
}

inline Waveform averaged_intensity(const ScenarioParams& params, const TimeGrid& grid,
                                   AverageForm form = AverageForm::consistent) {
  return averaged_intensity(params, bnm_matrix(params, form), grid);
}

}  // namespace gammashape
