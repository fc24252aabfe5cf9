// SPDX-License-Identifier: Apache-2.0
//
// Spectral transfer function of a single-line resonant absorber,
//   H(w) = exp(-delta_e L) * exp(-T_M / (1 + i (w_a - w) / gamma_a)),
// and its causal time-domain response kernel.
//
// T_M here is the amplitude exponent: on resonance the amplitude drops by
// e^{-T_M} and the intensity by e^{-2 T_M}. The conventional Mossbauer
// effective thickness is T_a = 2 T_M (see ThicknessConvention).
#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "gammashape/grid.hpp"
#include "gammashape/quadrature.hpp"
#include "gammashape/spectrum.hpp"
#include "gammashape/units.hpp"

namespace gammashape {

/// Absorber line centre (rad/ns) in the requested baseband frame.
inline double absorber_center(const EmitterSpec& emitter, const AbsorberSpec& absorber,
                              Frame frame = Frame::emitter_carrier) {
  if (frame == Frame::absorber_line) return absorber.rest_detuning_rad_per_ns;
  return absorber.rest_detuning_rad_per_ns - doppler_shift(emitter.photon_energy_kev, emitter.velocity_mm_s);
}

/// H(w) for an absorber line centred at `center` (rad/ns).
inline complex transfer_value(const AbsorberSpec& absorber, double center, double w) {
  const double x = (center - w) / absorber.halfwidth_rad_per_ns;
  return std::exp(-absorber.nonresonant_depth - absorber.t_m() / complex(1.0, x));
}

struct TransferFunction {
  FrequencyGrid grid;
  std::vector<complex> values;
};

inline TransferFunction transfer_function(const FrequencyGrid& grid, const AbsorberSpec& absorber,
                                          double center) {
  if (grid.spacing() > absorber.halfwidth_rad_per_ns / 8.0)
    throw ConfigError("transfer_function: frequency spacing must be <= gamma_a / 8");
  TransferFunction tf{grid, std::vector<complex>(grid.size())};
  for (std::size_t k = 0; k < grid.size(); ++k) tf.values[k] = transfer_value(absorber, center, grid[k]);
  return tf;
}

/// |H(w)|^2, the conventional transmission spectrum.
inline std::vector<double> absorption_spectrum(const TransferFunction& tf) {
  std::vector<double> out(tf.values.size());
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = std::norm(tf.values[k]);
  return out;
}

/// Causal response kernel K of the resonant part: for an input field e(t) the
/// output is exp(-delta_e L) * (e(t) + integral_0^t K(s) e(t - s) ds).
///
/// K(t) = e^{-i w_a t} K0(t). K0 is obtained by numerically inverting
/// exp(-T/(1 - i x)) - 1, x = (w - w_a)/gamma_a: the first `series_order`
/// powers of 1/(1 - i x) are inverted in closed form
/// (gamma (gamma t)^{k-1}/(k-1)! e^{-gamma t} each) and the remainder, which
/// decays as |x|^{-(order+1)}, is integrated by adaptive quadrature.
class ResponseKernel {
 public:
  static constexpr int series_order = 6;

  ResponseKernel(const AbsorberSpec& absorber, double center)
      : t_m_(absorber.t_m()), gamma_(absorber.halfwidth_rad_per_ns), center_(center) {
    // Cut-off X where the neglected remainder tail drops below ~1e-13.
    double coef = std::pow(t_m_, series_order + 1) / std::tgamma(series_order + 2.0) / series_order;
    coef *= gamma_ / std::numbers::pi;
    cutoff_ = std::max(20.0, std::pow(std::max(coef, 1e-300) / 1e-13, 1.0 / series_order));
    const double sat = std::sqrt(1.0 + t_m_);
    breakpoints_ = {0.0, -1.0, 1.0, -3.0 * sat, 3.0 * sat, -10.0 * sat, 10.0 * sat};
  }

  double t_m() const { return t_m_; }
  double center() const { return center_; }

  /// Slowly varying envelope K0(t) (zero for t < 0 up to quadrature error).
  complex envelope(double t, double abs_tol = 1e-14) const {
    if (t_m_ == 0.0) return {0.0, 0.0};
    complex series{0.0, 0.0};
    if (t >= 0.0) {
      const double gt = gamma_ * t;
      double term_t = 1.0;  // (gamma t)^{k-1} / (k-1)!
      double term_T = 1.0;  // (-T)^k / k!
      for (int k = 1; k <= series_order; ++k) {
        term_T *= -t_m_ / k;
        if (k > 1) term_t *= gt / (k - 1);
        series += term_T * gamma_ * term_t;
      }
      series *= std::exp(-gt);
    }
    auto integrand = [this, t](double x) {
      return remainder(x) * std::polar(1.0, -gamma_ * x * t);
    };
    quad::Options opt;
    opt.abs_tol = abs_tol;
    opt.rel_tol = 1e-11;
    opt.max_intervals = 20000;
    const auto r = quad::integrate(integrand, -cutoff_, cutoff_, opt, breakpoints_);
    return series + gamma_ / (2.0 * std::numbers::pi) * r.value;
  }

  /// Full kernel K(t) = e^{-i w_a t} K0(t).
  complex operator()(double t) const { return std::polar(1.0, -center_ * t) * envelope(t); }

 private:
  // exp(u) - sum_{k<=order} u^k/k!, u = -T/(1 - i x).
  complex remainder(double x) const {
    const complex u = -t_m_ / complex(1.0, -x);
    if (std::abs(u) < 0.5) {
      complex term{1.0, 0.0};
      for (int k = 1; k <= series_order; ++k) term *= u / static_cast<double>(k);
      complex sum{0.0, 0.0};
      for (int k = series_order + 1; k < series_order + 40; ++k) {
        term *= u / static_cast<double>(k);
        sum += term;
        if (std::abs(term) < 1e-18 * std::abs(sum)) break;
      }
      return sum;
    }
    complex partial{1.0, 0.0};
    complex term{1.0, 0.0};
    for (int k = 1; k <= series_order; ++k) {
      term *= u / static_cast<double>(k);
      partial += term;
    }
    return std::exp(u) - partial;
  }

  double t_m_;
  double gamma_;
  double center_;
  double cutoff_;
  std::vector<double> breakpoints_;
};

/// K0 tabulated on t = 0, h, 2h, ... and interpolated with 4-point Lagrange
/// polynomials; the carrier factor e^{-i w_a t} is applied exactly.
class ResponseKernelTable {
 public:
  ResponseKernelTable(const ResponseKernel& kernel, double t_max, double step) : center_(kernel.center()), h_(step) {
    const auto n = static_cast<std::size_t>(std::ceil(t_max / step)) + 4;
    values_.resize(n);
    for (std::size_t i = 0; i < n; ++i) values_[i] = kernel.envelope(static_cast<double>(i) * step);
  }

  complex envelope(double t) const {
    if (t < 0.0) return {0.0, 0.0};
    const double u = t / h_;
    auto i0 = static_cast<std::ptrdiff_t>(std::floor(u)) - 1;
    const auto last = static_cast<std::ptrdiff_t>(values_.size()) - 4;
    i0 = std::clamp<std::ptrdiff_t>(i0, 0, last);
    const double s = u - static_cast<double>(i0);  // position relative to node i0
    complex acc{0.0, 0.0};
    for (int a = 0; a < 4; ++a) {
      double l = 1.0;
      for (int b = 0; b < 4; ++b)
        if (b != a) l *= (s - b) / static_cast<double>(a - b);
      acc += l * values_[static_cast<std::size_t>(i0 + a)];
    }
    return acc;
  }

  complex operator()(double t) const { return std::polar(1.0, -center_ * t) * envelope(t); }

 private:
  double center_;
  double h_;
  std::vector<complex> values_;
};

}  // namespace gammashape
