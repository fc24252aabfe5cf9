// SPDX-License-Identifier: Apache-2.0
//
// Physical constants, unit conversions and the input parameter records shared
// by every other module.
//
// Internal unit system: times in ns, angular frequencies in rad/ns, lengths in
// Angstrom, velocities in mm/s, photon energies in keV. Field and function
// names carry their unit so that call sites stay readable.
#pragma once

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <string>

#include "gammashape/errors.hpp"

namespace gammashape {

/// CODATA 2018 exact values (SI).
struct PhysicalConstants {
  static constexpr double c = 299792458.0;                // m/s
  static constexpr double h = 6.62607015e-34;             // J s
  static constexpr double hbar = h / (2.0 * std::numbers::pi);  // J s
  static constexpr double elementary_charge = 1.602176634e-19;  // C
  static constexpr double joule_per_kev = 1e3 * elementary_charge;
};

namespace units {

inline constexpr double two_pi = 2.0 * std::numbers::pi;

/// Cyclic frequency in MHz to angular frequency in rad/ns.
constexpr double mhz_to_rad_per_ns(double f_mhz) { return two_pi * f_mhz * 1e-3; }
constexpr double rad_per_ns_to_mhz(double w) { return w / (two_pi * 1e-3); }

/// Carrier angular frequency E/hbar of a photon, in rad/ns.
inline double carrier_rad_per_ns(double energy_kev) {
  return energy_kev * PhysicalConstants::joule_per_kev / PhysicalConstants::hbar * 1e-9;
}

}  // namespace units

/// Emitting transition of the source nucleus.
struct EmitterSpec {
  double photon_energy_kev = 14.4;
  double lifetime_ns = 141.0;
  /// Constant source velocity, positive towards the absorber.
  double velocity_mm_s = 0.0;
  double carrier_phase_rad = 0.0;

  /// Amplitude decay rate Gamma_r = 1 / (2 T_r), rad/ns.
  double gamma_r() const { return 1.0 / (2.0 * lifetime_ns); }

  void validate() const {
    if (!(photon_energy_kev > 0.0)) throw ConfigError("emitter.photon_energy_kev must be > 0");
    if (!(lifetime_ns > 0.0)) throw ConfigError("emitter.lifetime_ns must be > 0");
    if (!(std::abs(velocity_mm_s) * 1e-3 / PhysicalConstants::c < 1e-6))
      throw ConfigError("emitter.velocity_mm_s must satisfy |V|/c < 1e-6");
    if (!std::isfinite(carrier_phase_rad)) throw ConfigError("emitter.carrier_phase_rad must be finite");
  }
};

/// How the user-supplied optical thickness maps onto the amplitude exponent of
/// the transfer function exp(-T_M / (1 + i x)).
enum class ThicknessConvention {
  amplitude,  ///< value is T_M itself (amplitude attenuated by e^{-T_M} on resonance)
  intensity,  ///< value is the conventional effective thickness T_a = 2 T_M
};

/// Single-line resonant absorber.
struct AbsorberSpec {
  /// Half width gamma_a of the absorption line, rad/ns (FWHM 1.13 MHz).
  double halfwidth_rad_per_ns = units::mhz_to_rad_per_ns(0.565);
  /// Absorber line centre relative to the emitter line at rest, rad/ns.
  double rest_detuning_rad_per_ns = 0.0;
  double thickness_value = 5.18;
  ThicknessConvention convention = ThicknessConvention::amplitude;
  /// Product delta_e * L of the nonresonant (photoelectric) loss.
  double nonresonant_depth = 0.0;
  /// Physical thickness, used only by validate_thin_absorber.
  double thickness_um = 25.0;
  double sound_speed_m_s = 5000.0;
  static constexpr double epsilon = 1.0;

  /// Amplitude exponent T_M entering the transfer function.
  double t_m() const {
    return convention == ThicknessConvention::amplitude ? thickness_value : 0.5 * thickness_value;
  }

  void validate() const {
    if (!(halfwidth_rad_per_ns > 0.0)) throw ConfigError("absorber.halfwidth_mhz must be > 0");
    if (!(thickness_value >= 0.0)) throw ConfigError("absorber.t_m must be >= 0");
    if (!(nonresonant_depth >= 0.0)) throw ConfigError("absorber.nonresonant_depth must be >= 0");
    if (!std::isfinite(rest_detuning_rad_per_ns)) throw ConfigError("absorber.rest_detuning_mhz must be finite");
    if (!(thickness_um >= 0.0)) throw ConfigError("absorber.thickness_um must be >= 0");
    if (!(sound_speed_m_s > 0.0)) throw ConfigError("absorber.sound_speed_m_s must be > 0");
  }
};

/// Harmonic absorber motion z = z' + R sin(Omega t).
struct VibrationSpec {
  double omega_rad_per_ns = units::mhz_to_rad_per_ns(10.2);
  double amplitude_angstrom = 0.0;
  double theta0_rad = 0.0;

  double period_ns() const { return units::two_pi / omega_rad_per_ns; }

  void validate() const {
    if (!(omega_rad_per_ns > 0.0)) throw ConfigError("vibration.frequency_mhz must be > 0");
    if (!(amplitude_angstrom >= 0.0)) throw ConfigError("vibration.amplitude_angstrom must be >= 0");
    if (!std::isfinite(theta0_rad)) throw ConfigError("vibration.phase_rad must be finite");
  }
};

/// lambda = h c / E, in Angstrom.
inline double photon_wavelength(double energy_kev) {
  if (!(energy_kev > 0.0)) throw std::domain_error("photon_wavelength: energy must be positive");
  const double joules = energy_kev * PhysicalConstants::joule_per_kev;
  return PhysicalConstants::h * PhysicalConstants::c / joules * 1e10;
}

/// p = 2 pi R / lambda.
inline double modulation_index(double amplitude_angstrom, double wavelength_angstrom) {
  if (!(wavelength_angstrom > 0.0)) throw std::domain_error("modulation_index: wavelength must be positive");
  if (!(amplitude_angstrom >= 0.0)) throw std::domain_error("modulation_index: amplitude must be >= 0");
  return units::two_pi * amplitude_angstrom / wavelength_angstrom;
}

/// First-order Doppler shift (E/hbar)(V/c) in rad/ns. Positive V (towards the
/// absorber) raises the frequency seen by the absorber.
inline double doppler_shift(double energy_kev, double velocity_mm_s) {
  const double beta = velocity_mm_s * 1e-3 / PhysicalConstants::c;
  if (!(std::abs(beta) < 1e-6)) throw std::domain_error("doppler_shift: |V|/c must be < 1e-6");
  return units::carrier_rad_per_ns(energy_kev) * beta;
}

/// Constant emitter velocity (mm/s) that moves sideband `n` (centred at
/// omega_r - n Omega) onto an absorber line with zero rest detuning.
inline double resonance_tuning_velocity(int n, double omega_rad_per_ns, double energy_kev) {
  if (!(omega_rad_per_ns > 0.0)) throw std::domain_error("resonance_tuning_velocity: Omega must be > 0");
  if (!(energy_kev > 0.0)) throw std::domain_error("resonance_tuning_velocity: energy must be > 0");
  return static_cast<double>(n) * omega_rad_per_ns / units::carrier_rad_per_ns(energy_kev) *
         PhysicalConstants::c * 1e3;
}

struct ThinAbsorberCheck {
  bool ok;
  /// L / (2 pi V_s / Omega); the condition is ratio < 0.1.
  double ratio;
};

/// Uniform-vibration condition L << 2 pi V_s / Omega, with "<<" read as a
/// factor of ten.
inline ThinAbsorberCheck validate_thin_absorber(double thickness_um, double sound_speed_m_s,
                                                double omega_rad_per_ns) {
  const double acoustic_wavelength_m = units::two_pi * sound_speed_m_s * 1e-9 / omega_rad_per_ns;
  const double ratio = thickness_um * 1e-6 / acoustic_wavelength_m;
  return {ratio < 0.1, ratio};
}

}  // namespace gammashape
