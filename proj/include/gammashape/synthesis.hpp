// SPDX-License-Identifier: Apache-2.0
//
// Transmitted single-photon waveform behind the vibrating absorber.
//
// The output field is exp(-delta_e L) * (E_in(tau) + E_s(tau)) where E_s is the
// field re-radiated by the resonant line. E_in is evaluated exactly. E_s is
// split into its first-order term in T_M, a closed-form convolution of two
// exponentials, and the remainder E~_in(w) (H~ - 1 - ln H~), H~ being the
// resonant factor of the transfer function. The remainder spectrum decays as
// 1/w^3, so the discrete transform sees neither the step nor the kink of the
// field at tau = 0.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <sstream>
#include <vector>

#include "gammashape/absorber.hpp"
#include "gammashape/fft.hpp"
#include "gammashape/grid.hpp"
#include "gammashape/line_integral.hpp"
#include "gammashape/quadrature.hpp"
#include "gammashape/scenario.hpp"
#include "gammashape/spectrum.hpp"

namespace gammashape {

/// Internal FFT layout for one output time grid. The FFT time step divides
/// the output step exactly, so every output sample is an FFT sample.
struct SynthesisPlan {
  double t_start = 0.0;
  double dt = 0.0;               ///< FFT time step (ns)
  std::size_t stride = 1;        ///< output step / dt
  std::size_t n_out = 0;         ///< output samples
  std::size_t n_fft = 0;         ///< power of two
  double d_omega = 0.0;          ///< 2 pi / (n_fft dt)

  FrequencyGrid frequency_grid() const { return FrequencyGrid(n_fft, d_omega); }
  double window_ns() const { return static_cast<double>(n_fft) * dt; }
};

inline SynthesisPlan make_synthesis_plan(const ScenarioParams& params, const TimeGrid& grid) {
  const double g = params.gamma_r();
  const double gamma_a = params.absorber.halfwidth_rad_per_ns;
  const double extent = grid.t_end() - grid.t_start();
  const double step = grid.spacing();

  // Spectral half span pi/dt must cover every sideband plus the line wings.
  const double need_span = params.truncation_order() * params.omega() + std::abs(params.absorber_center()) +
                           40.0 * std::max(gamma_a, g);
  const double dt_max = std::min(params.synthesis.max_time_step_ns, std::numbers::pi / need_span);

  SynthesisPlan plan;
  plan.t_start = grid.t_start();
  plan.stride = static_cast<std::size_t>(std::ceil(step / dt_max - 1e-9));
  plan.stride = std::max<std::size_t>(plan.stride, 1);
  plan.dt = step / static_cast<double>(plan.stride);
  plan.n_out = grid.size();

  // Window: resolve both lines, honour the spacing cap and keep the
  // periodic images of the decay below e^{-27.6} ~ 1e-12.
  const double max_spacing = std::min({g / 8.0, gamma_a / 8.0,
                                       units::mhz_to_rad_per_ns(params.synthesis.max_frequency_spacing_mhz)});
  const double window = std::max(2.0 * std::numbers::pi / max_spacing, extent + 27.7 / (2.0 * g));
  std::size_t n = 2;
  while (static_cast<double>(n) * plan.dt < window) n *= 2;
  if (n > (std::size_t{1} << 27)) {
    std::ostringstream msg;
    msg << "synthesis grid would need " << n << " points; increase grid.max_time_step_ns or shorten the time grid";
    throw ConfigError(msg.str());
  }
  plan.n_fft = n;
  plan.d_omega = 2.0 * std::numbers::pi / (static_cast<double>(n) * plan.dt);
  return plan;
}

namespace detail {

// (1/2pi) sum_k S(w_k) e^{-i w_k tau_j} dw at the plan's output samples.
template <class Spectrum>
std::vector<complex> synthesize(const SynthesisPlan& plan, Spectrum&& spectrum_at) {
  const auto grid = plan.frequency_grid();
  std::vector<complex> buf(plan.n_fft);
  for (std::size_t k = 0; k < plan.n_fft; ++k) {
    const double w = grid[k];
    buf[k] = spectrum_at(k, w) * std::polar(1.0, -w * plan.t_start);
  }
  fft::forward_in_place(buf);
  std::vector<complex> out(plan.n_out);
  const double scale = plan.d_omega / (2.0 * std::numbers::pi);
  for (std::size_t i = 0; i < plan.n_out; ++i) {
    const std::size_t j = i * plan.stride;
    out[i] = buf[j] * ((j % 2) ? -scale : scale);
  }
  return out;
}

// exp(z) - 1 - z with z = -T_M / (1 + i x), the part of the resonant factor
// beyond first order.
inline std::vector<complex> resonant_factor_remainder(const SynthesisPlan& plan, const AbsorberSpec& absorber,
                                                      double center) {
  const auto grid = plan.frequency_grid();
  std::vector<complex> out(plan.n_fft);
  for (std::size_t k = 0; k < plan.n_fft; ++k) {
    const double x = (center - grid[k]) / absorber.halfwidth_rad_per_ns;
    const complex z = -absorber.t_m() / complex(1.0, x);
    if (std::abs(z) < 1e-2) {
      complex term = 0.5 * z * z, sum{0.0, 0.0};
      for (int n = 3; n < 12; ++n) {
        sum += term;
        term *= z / static_cast<double>(n);
      }
      out[k] = sum;
    } else {
      out[k] = std::exp(z) - 1.0 - z;
    }
  }
  return out;
}

// First-order scattered field for the incident component e^{-(Gamma_r + i c) tau}:
// -T_M gamma_a (e^{-alpha tau} - e^{-beta tau}) / (beta - alpha) with
// alpha = Gamma_r + i c and beta = gamma_a + i w_a.
inline complex first_order_field(const AbsorberSpec& absorber, double center, double gamma_r, double c, double tau) {
  if (tau <= 0.0 || absorber.t_m() == 0.0) return {0.0, 0.0};
  const complex alpha(gamma_r, c), beta(absorber.halfwidth_rad_per_ns, center);
  const complex z = (alpha - beta) * tau;
  complex phi;  // (e^z - 1) / z
  if (std::abs(z) < 1e-3) {
    phi = 1.0 + z * (0.5 + z * (1.0 / 6.0 + z / 24.0));
    return -absorber.t_m() * absorber.halfwidth_rad_per_ns * std::exp(-alpha * tau) * tau * phi;
  }
  return -absorber.t_m() * absorber.halfwidth_rad_per_ns * (std::exp(-alpha * tau) - std::exp(-beta * tau)) /
         (beta - alpha);
}

}  // namespace detail

/// Complex output field e^{-delta_e L}(E_in + E_s) on the grid for vibration
/// phase theta0 (the value stored in params.vibration is ignored).
inline std::vector<complex> transmitted_field(const ScenarioParams& params, const TimeGrid& grid, double theta0) {
  const auto plan = make_synthesis_plan(params, grid);
  const auto table = params.sidebands(theta0);
  const double g = params.gamma_r();
  const double center = params.absorber_center();
  const auto rem = detail::resonant_factor_remainder(plan, params.absorber, center);
  const complex global = std::polar(1.0, params.emitter.carrier_phase_rad);
  std::vector<complex> weights;
  std::vector<double> centers;
  for (const auto& e : table.entries) {
    weights.push_back(e.weight());
    centers.push_back(e.center);
  }
  auto scattered = detail::synthesize(plan, [&](std::size_t k, double w) {
    complex acc{0.0, 0.0};
    for (std::size_t s = 0; s < weights.size(); ++s) acc += weights[s] / complex(g, centers[s] - w);
    return global * acc * rem[k];
  });
  const double att = std::exp(-params.absorber.nonresonant_depth);
  std::vector<complex> out(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double tau = grid[i];
    if (tau < 0.0) continue;
    complex first{0.0, 0.0};
    for (std::size_t s = 0; s < weights.size(); ++s)
      first += weights[s] * detail::first_order_field(params.absorber, center, g, centers[s], tau);
    out[i] = att * (incident_field_bessel(table, params.emitter, tau) + global * first + scattered[i]);
  }
  return out;
}

inline Waveform intensity_of(const TimeGrid& grid, const std::vector<complex>& field) {
  Waveform w{grid, std::vector<double>(field.size())};
  for (std::size_t i = 0; i < field.size(); ++i) w.values[i] = std::norm(field[i]);
  return w;
}

/// N_out(tau) normalised to the incident intensity at tau = 0+.
inline Waveform transmitted_waveform(const ScenarioParams& params, const TimeGrid& grid) {
  return intensity_of(grid, transmitted_field(params, grid, params.vibration.theta0_rad));
}

/// Per-sideband output fields f_n(tau): response of the absorber to the single
/// decaying component theta(tau) e^{-Gamma_r tau} e^{i n Omega tau}. The field
/// for any vibration phase is e^{-delta_e L} e^{i phi0} sum_n J_n e^{i n theta} f_n,
/// which makes phase averages cheap.
class SidebandFields {
 public:
  SidebandFields(const ScenarioParams& params, const TimeGrid& grid)
      : grid_(grid),
        table_(params.sidebands(0.0)),
        attenuation_(std::exp(-params.absorber.nonresonant_depth)),
        global_(std::polar(1.0, params.emitter.carrier_phase_rad)) {
    const auto plan = make_synthesis_plan(params, grid);
    const double g = params.gamma_r();
    const double omega = params.omega();
    const double center = params.absorber_center();
    const auto rem = detail::resonant_factor_remainder(plan, params.absorber, center);
    fields_.reserve(table_.entries.size());
    for (const auto& e : table_.entries) {
      auto f = detail::synthesize(plan, [&](std::size_t k, double w) { return rem[k] / complex(g, e.center - w); });
      for (std::size_t i = 0; i < grid.size(); ++i) {
        const double tau = grid[i];
        if (tau < 0.0) {
          f[i] = 0.0;
          continue;
        }
        f[i] += std::polar(std::exp(-g * tau), e.index * omega * tau) +
                detail::first_order_field(params.absorber, center, g, e.center, tau);
      }
      fields_.push_back(std::move(f));
    }
  }

  const TimeGrid& grid() const { return grid_; }
  const SidebandTable& table() const { return table_; }
  std::size_t size() const { return fields_.size(); }
  const std::vector<complex>& field(std::size_t s) const { return fields_[s]; }

  /// Output field at sample i for vibration phase theta.
  complex field_at(std::size_t i, double theta) const {
    complex acc{0.0, 0.0};
    for (std::size_t s = 0; s < fields_.size(); ++s) {
      const auto& e = table_.entries[s];
      acc += e.bessel * std::polar(1.0, e.index * theta) * fields_[s][i];
    }
    return attenuation_ * global_ * acc;
  }

  std::vector<double> intensity(double theta) const {
    std::vector<double> out(grid_.size());
    std::vector<complex> phase(fields_.size());
    for (std::size_t s = 0; s < fields_.size(); ++s) {
      const auto& e = table_.entries[s];
      phase[s] = e.bessel * std::polar(1.0, e.index * theta);
    }
    for (std::size_t i = 0; i < grid_.size(); ++i) {
      complex acc{0.0, 0.0};
      for (std::size_t s = 0; s < fields_.size(); ++s) acc += phase[s] * fields_[s][i];
      out[i] = attenuation_ * attenuation_ * std::norm(acc);
    }
    return out;
  }

 private:
  TimeGrid grid_;
  SidebandTable table_;
  double attenuation_;
  complex global_;
  std::vector<std::vector<complex>> fields_;
};

/// Mean of the transmitted waveform over theta in [theta0, theta0 + gate_width]
/// (composite midpoint rule with n_phase_samples nodes).
inline Waveform gate_average(const SidebandFields& fields, double theta0, double gate_width,
                             std::size_t n_phase_samples) {
  if (!(gate_width > 0.0 && gate_width <= 2.0 * std::numbers::pi + 1e-12))
    throw ConfigError("gate_average: gate width must be in (0, 2 pi]");
  if (n_phase_samples < 8) throw ConfigError("gate_average: need at least 8 phase samples");
  Waveform w{fields.grid(), std::vector<double>(fields.grid().size(), 0.0)};
  for (std::size_t k = 0; k < n_phase_samples; ++k) {
    const double theta = theta0 + (static_cast<double>(k) + 0.5) * gate_width / static_cast<double>(n_phase_samples);
    const auto v = fields.intensity(theta);
    for (std::size_t i = 0; i < v.size(); ++i) w.values[i] += v[i];
  }
  for (auto& v : w.values) v /= static_cast<double>(n_phase_samples);
  return w;
}

inline Waveform gate_average(const ScenarioParams& params, const TimeGrid& grid, double gate_width,
                             std::size_t n_phase_samples) {
  return gate_average(SidebandFields(params, grid), params.vibration.theta0_rad, gate_width, n_phase_samples);
}

/// Independent route to the same waveform: the response kernel is obtained by
/// adaptive quadrature of the transfer function and convolved with the exact
/// incident field e^{-Gamma_r u} e^{i p sin(Omega u + theta0)} in the time domain.
inline Waveform time_domain_oracle(const ScenarioParams& params, const TimeGrid& grid,
                                   double kernel_step_ns = 0.5) {
  const double p = params.modulation_index();
  const double omega = params.omega();
  const double theta0 = params.vibration.theta0_rad;
  const double att = std::exp(-params.absorber.nonresonant_depth);
  const ResponseKernel kernel(params.absorber, params.absorber_center());
  const double t_max = std::max(grid.t_end(), 0.0);
  const ResponseKernelTable table(kernel, t_max + kernel_step_ns, kernel_step_ns);
  auto incident = [&](double u) { return incident_field_exact(p, omega, theta0, params.emitter, u); };

  quad::Options opt;
  opt.abs_tol = 1e-12;
  opt.rel_tol = 1e-11;
  opt.max_intervals = 20000;
  Waveform w{grid, std::vector<double>(grid.size(), 0.0)};
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double tau = grid[i];
    if (tau < 0.0) continue;
    complex e = incident(tau);
    if (tau > 0.0 && kernel.t_m() > 0.0) {
      std::vector<double> cuts;
      for (double s = 10.0; s < tau; s += 10.0) cuts.push_back(s);
      auto integrand = [&](double s) { return table(s) * incident(tau - s); };
      e += quad::integrate(integrand, 0.0, tau, opt, cuts).value;
    }
    w.values[i] = std::norm(att * e);
  }
  return w;
}

/// Ratio of transmitted to incident photon energy, 2 Gamma_r * integral |E_out|^2 dtau,
/// evaluated in the frequency domain by adaptive quadrature over the whole axis.
inline double energy_throughput(const ScenarioParams& params, double theta0) {
  const auto table = params.sidebands(theta0);
  const double g = params.gamma_r();
  const double center = params.absorber_center();
  const double gamma_a = params.absorber.halfwidth_rad_per_ns;
  std::vector<LineFeature> features;
  for (const auto& e : table.entries) features.push_back({e.center, g});
  if (params.absorber.t_m() > 0.0) features.push_back({center, gamma_a * (1.0 + params.absorber.t_m())});
  auto f = [&](double w) {
    complex acc{0.0, 0.0};
    for (const auto& e : table.entries) acc += e.weight() / complex(g, e.center - w);
    return std::norm(acc * transfer_value(params.absorber, center, w));
  };
  quad::Options opt;
  opt.abs_tol = 1e-13;
  opt.rel_tol = 1e-12;
  opt.max_intervals = 200000;
  const double integral = integrate_real_line(f, 0.0, g, features, opt).value;
  return 2.0 * g * integral / (2.0 * std::numbers::pi);
}

inline double energy_throughput(const ScenarioParams& params) {
  return energy_throughput(params, params.vibration.theta0_rad);
}

}  // namespace gammashape
