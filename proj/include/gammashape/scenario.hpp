// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "gammashape/absorber.hpp"
#include "gammashape/spectrum.hpp"
#include "gammashape/units.hpp"

namespace gammashape {

/// Resolution of the spectral synthesis grid.
struct SynthesisOptions {
  /// Upper bound on the frequency spacing (cyclic, MHz). Sets the periodic
  /// time window 1/spacing (20 us at 0.05 MHz).
  double max_frequency_spacing_mhz = 0.05;
  /// Upper bound on the internal time step (ns); the spectral half span is
  /// pi / step (31 rad/ns at 0.1 ns).
  double max_time_step_ns = 0.1;
};

/// Everything that defines one emitter / vibrating-absorber configuration.
struct ScenarioParams {
  EmitterSpec emitter;
  AbsorberSpec absorber;
  VibrationSpec vibration;
  double truncation_epsilon = 1e-12;
  SynthesisOptions synthesis;

  double wavelength_angstrom() const { return photon_wavelength(emitter.photon_energy_kev); }
  double modulation_index() const {
    return gammashape::modulation_index(vibration.amplitude_angstrom, wavelength_angstrom());
  }
  double gamma_r() const { return emitter.gamma_r(); }
  double omega() const { return vibration.omega_rad_per_ns; }
  double period_ns() const { return vibration.period_ns(); }
  int truncation_order() const { return bessel_truncation_order(modulation_index(), truncation_epsilon); }
  /// Absorber line relative to the emitter carrier (rad/ns).
  double absorber_center() const { return gammashape::absorber_center(emitter, absorber); }
  double doppler_shift() const {
    return gammashape::doppler_shift(emitter.photon_energy_kev, emitter.velocity_mm_s);
  }
  SidebandTable sidebands(double theta0) const {
    return sideband_table(modulation_index(), theta0, truncation_order(), omega());
  }
  SidebandTable sidebands() const { return sidebands(vibration.theta0_rad); }

  /// Throws ConfigError on a violated hard invariant; returns warnings for
  /// soft ones (thin-absorber condition).
  std::vector<std::string> validate() const {
    emitter.validate();
    absorber.validate();
    vibration.validate();
    if (!(truncation_epsilon > 0.0 && truncation_epsilon < 1.0))
      throw ConfigError("truncation.epsilon must be in (0, 1)");
    if (!(synthesis.max_frequency_spacing_mhz > 0.0)) throw ConfigError("grid.max_frequency_spacing_mhz must be > 0");
    if (!(synthesis.max_time_step_ns > 0.0)) throw ConfigError("grid.max_time_step_ns must be > 0");
    std::vector<std::string> warnings;
    const auto thin = validate_thin_absorber(absorber.thickness_um, absorber.sound_speed_m_s, omega());
    if (!thin.ok)
      warnings.push_back("absorber is not thin compared to the acoustic wavelength (L / (2 pi V_s / Omega) = " +
                         std::to_string(thin.ratio) + ")");
    return warnings;
  }
};

}  // namespace gammashape
