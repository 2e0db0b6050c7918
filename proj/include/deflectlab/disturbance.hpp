#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "deflectlab/constants.hpp"

namespace deflectlab {

struct Sinusoid {
  double amplitude = 0.0;  // units of the quantity being modulated
  double frequency = 0.0;  // Hz
  double phase = 0.0;      // rad

  double at(double t) const {
    return amplitude == 0.0
               ? 0.0
               : amplitude * std::sin(2.0 * kPi * frequency * t + phase);
  }

  void validate(const char* what) const {
    if (amplitude < 0.0)
      throw std::invalid_argument(std::string(what) + ": amplitude < 0");
    if (amplitude > 0.0 && !(frequency > 0.0))
      throw std::invalid_argument(std::string(what) + ": frequency must be > 0");
  }
};

struct JitterTone {
  double frequency = 0.0;      // Hz
  double amplitude_rad = 0.0;  // rad
};

/// Composite angular-jitter model: discrete tones plus band-limited
/// Gaussian noise (brickwall low-pass at `band_cutoff_hz`, scaled to
/// `band_rms_rad`).
struct LaserJitterSpec {
  std::vector<JitterTone> tones;
  double band_cutoff_hz = 0.0;
  double band_rms_rad = 0.0;

  bool empty() const {
    if (band_rms_rad > 0.0) return false;
    for (const auto& tone : tones)
      if (tone.amplitude_rad > 0.0) return false;
    return true;
  }

  /// Highest discrete tone frequency; the Nyquist precondition applies to
  /// tones only. Band noise is brick-walled at min(cutoff, Nyquist) and
  /// rescaled to its rms, so undersampled bands keep the right statistics.
  double max_tone_frequency() const {
    double f = 0.0;
    for (const auto& tone : tones)
      if (tone.amplitude_rad > 0.0 && tone.frequency > f) f = tone.frequency;
    return f;
  }
};

/// Everything that perturbs a run besides the drive signal itself.
///
/// Units: d_mod amplitude in meters, q_mod amplitude in 1/m (momentum),
/// angular_jitter_rad / detector_jitter_m are per-shot Gaussian standard
/// deviations, sigma_J is an electronic-noise density in V/sqrt(Hz)
/// (negative = unset, detector keeps its own value).
struct DisturbanceSet {
  Sinusoid d_mod;  // transverse detector modulation (m)
  Sinusoid q_mod;  // transverse momentum modulation (1/m)
  double sigma_J = -1.0;
  double angular_jitter_rad = 0.0;
  double detector_jitter_m = 0.0;
  LaserJitterSpec laser_jitter;

  void validate() const {
    d_mod.validate("d_mod");
    q_mod.validate("q_mod");
    if (angular_jitter_rad < 0.0)
      throw std::invalid_argument("disturbances: angular jitter < 0");
    if (detector_jitter_m < 0.0)
      throw std::invalid_argument("disturbances: detector jitter < 0");
    if (laser_jitter.band_rms_rad < 0.0)
      throw std::invalid_argument("disturbances: band rms < 0");
    if (laser_jitter.band_rms_rad > 0.0 && !(laser_jitter.band_cutoff_hz > 0.0))
      throw std::invalid_argument("disturbances: band cutoff must be > 0");
    for (const auto& tone : laser_jitter.tones) {
      if (tone.amplitude_rad < 0.0)
        throw std::invalid_argument("disturbances: tone amplitude < 0");
      if (tone.amplitude_rad > 0.0 && !(tone.frequency > 0.0))
        throw std::invalid_argument("disturbances: tone frequency must be > 0");
    }
  }
};

}  // namespace deflectlab
