#pragma once

#include <cmath>

namespace deflectlab {

inline constexpr double kPi = 3.14159265358979323846;

// SI defining constants (2019 redefinition).
inline constexpr double kPlanck = 6.62607015e-34;        // J s
inline constexpr double kSpeedOfLight = 299792458.0;     // m/s

/// Energy of one photon at vacuum wavelength `lambda` (meters) -> joules.
inline double photon_energy(double lambda) {
  return kPlanck * kSpeedOfLight / lambda;
}

/// Wavenumber 2*pi/lambda (1/meter).
inline double wavenumber(double lambda) { return 2.0 * kPi / lambda; }

}  // namespace deflectlab
