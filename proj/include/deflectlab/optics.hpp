#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "deflectlab/constants.hpp"

namespace deflectlab {

/// Gaussian beam and photon budget. `sigma` is the standard deviation of
/// the transverse *intensity* profile (E ~ exp(-x^2 / 4 sigma^2)).
struct BeamParams {
  double sigma = 0.0;       // m
  double lambda = 0.0;      // m
  double n_photons = 0.0;   // photons per acquisition
  double power = 0.0;       // W, optional (0 = unset)

  double k0() const { return wavenumber(lambda); }

  void validate() const {
    if (!(sigma > 0.0)) throw std::invalid_argument("beam: sigma must be > 0");
    if (!(lambda > 0.0)) throw std::invalid_argument("beam: lambda must be > 0");
    if (n_photons < 0.0) throw std::invalid_argument("beam: n_photons < 0");
    if (power < 0.0) throw std::invalid_argument("beam: power < 0");
  }
};

/// Sagnac interferometer geometry: post-selection phase and the lever arm
/// from the external momentum-modulating mirror to the detector.
struct WvConfig {
  double phi = 0.0;  // rad, in (0, pi)
  double L = 0.0;    // m

  void validate() const {
    if (!(phi > 0.0 && phi < kPi))
      throw std::domain_error("wv: phi must lie in (0, pi)");
    if (!(L > 0.0)) throw std::invalid_argument("wv: L must be > 0");
  }
};

/// Focusing-lens geometry for the standard technique.
struct StConfig {
  double f = 0.0;  // m

  /// Beam radius parameter at the focus, sigma_f = f / (2 k0 sigma).
  double sigma_f(const BeamParams& beam) const {
    return f / (2.0 * beam.k0() * beam.sigma);
  }

  void validate() const {
    if (!(f > 0.0)) throw std::invalid_argument("st: f must be > 0");
  }
};

/// Transverse momentum kick, the parameter under estimation.
struct SignalKick {
  double k = 0.0;  // 1/m

  static SignalKick from_angle(double theta_rad, const BeamParams& beam) {
    return SignalKick{theta_rad * beam.k0()};
  }
  double equivalent_angle(const BeamParams& beam) const { return k / beam.k0(); }
};

/// Detector-plane displacement of the dark-port centroid magnitude,
/// delta_d = 2 sigma^2 k cot(phi/2). The dark-port intensity is centered at
/// -delta_d (profile exp[-(x + delta_d)^2 / 2 sigma^2]); the sign convention
/// is owned by the sampling layer.
inline double dark_shift(const BeamParams& beam, const WvConfig& wv,
                         const SignalKick& kick) {
  wv.validate();
  return 2.0 * beam.sigma * beam.sigma * kick.k / std::tan(0.5 * wv.phi);
}

/// Bright-port shift delta_b = 2 sigma^2 k tan(phi/2); centroid at +delta_b.
inline double bright_shift(const BeamParams& beam, const WvConfig& wv,
                           const SignalKick& kick) {
  wv.validate();
  return 2.0 * beam.sigma * beam.sigma * kick.k * std::tan(0.5 * wv.phi);
}

/// Focused-beam displacement f k / k0.
inline double st_shift(const BeamParams& beam, const StConfig& st,
                       const SignalKick& kick) {
  st.validate();
  return st.f * kick.k / beam.k0();
}

struct PortProbabilities {
  double dark = 0.0;
  double bright = 0.0;
};

/// Post-selection fractions sin^2(phi/2) and cos^2(phi/2). The bright value
/// is computed as the complement so the pair sums to exactly 1.0.
inline PortProbabilities port_probabilities(const WvConfig& wv) {
  wv.validate();
  const double s = std::sin(0.5 * wv.phi);
  PortProbabilities p;
  p.dark = s * s;
  p.bright = 1.0 - p.dark;
  return p;
}

/// One technique's detector-plane displacements for the three sources.
struct TechniqueShifts {
  double dx_k = 0.0;  // m, signal
  double dx_d = 0.0;  // m, transverse detector modulation
  double dx_q = 0.0;  // m, transverse momentum modulation
};

struct ShiftTable {
  TechniqueShifts wv;
  TechniqueShifts st;
};

/// Displacement summary:
///   WVT row: (2 k sigma^2 cot(phi/2), d, L q / k0)
///   ST row:  (f k / k0,               d, f q / k0)
inline ShiftTable shift_table(const BeamParams& beam, const WvConfig& wv,
                              const StConfig& st, const SignalKick& kick,
                              double d, double q) {
  beam.validate();
  ShiftTable t;
  t.wv.dx_k = dark_shift(beam, wv, kick);
  t.wv.dx_d = d;
  t.wv.dx_q = wv.L * q / beam.k0();
  t.st.dx_k = st_shift(beam, st, kick);
  t.st.dx_d = d;
  t.st.dx_q = st.f * q / beam.k0();
  return t;
}

enum class Modulation { kDetector, kMomentum };

/// Signal-to-modulation displacement ratio for the weak-value technique,
/// R = dx_k / dx_{d or q}.
inline double ratio_R_wv(const BeamParams& beam, const WvConfig& wv,
                         const SignalKick& kick, Modulation mod,
                         double amplitude) {
  const double dx_mod = mod == Modulation::kDetector
                            ? amplitude
                            : wv.L * amplitude / beam.k0();
  if (dx_mod == 0.0)
    throw std::domain_error("ratio_R: modulation displacement is zero");
  return dark_shift(beam, wv, kick) / dx_mod;
}

/// Same ratio for the standard technique.
inline double ratio_R_st(const BeamParams& beam, const StConfig& st,
                         const SignalKick& kick, Modulation mod,
                         double amplitude) {
  const double dx_mod = mod == Modulation::kDetector
                            ? amplitude
                            : st.f * amplitude / beam.k0();
  if (dx_mod == 0.0)
    throw std::domain_error("ratio_R: modulation displacement is zero");
  return st_shift(beam, st, kick) / dx_mod;
}

/// Closed-form ratio of ratios R_wv / R_st: 2 k0 sigma^2 cot(phi/2) / f for
/// detector modulation, the same with f -> L for momentum modulation.
/// Independent of k and of the modulation amplitude.
inline double ratio_R_advantage(const BeamParams& beam, const WvConfig& wv,
                                const StConfig& st, Modulation mod) {
  wv.validate();
  st.validate();
  const double lever = mod == Modulation::kDetector ? st.f : wv.L;
  return 2.0 * beam.k0() * beam.sigma * beam.sigma /
         (std::tan(0.5 * wv.phi) * lever);
}

/// WVT / ST ratios of beam-radius-normalized raw detector signals:
///   r_k = cot(phi/2), r_q = L / (2 k0 sigma^2), r_d = f / (2 k0 sigma^2).
struct RawSignalRatios {
  double r_k = 0.0;
  double r_q = 0.0;
  double r_d = 0.0;
};

inline RawSignalRatios raw_signal_ratios(const BeamParams& beam,
                                         const WvConfig& wv,
                                         const StConfig& st) {
  wv.validate();
  st.validate();
  const double two_k0_sigma2 = 2.0 * beam.k0() * beam.sigma * beam.sigma;
  RawSignalRatios r;
  r.r_k = 1.0 / std::tan(0.5 * wv.phi);
  r.r_q = wv.L / two_k0_sigma2;
  r.r_d = st.f / two_k0_sigma2;
  return r;
}

struct AxisRange {
  double lo = 0.0;
  double hi = 0.0;
  std::size_t n = 0;
};

struct GeometricFactorSurface {
  std::vector<double> sigma;   // m
  std::vector<double> fprime;  // m
  std::vector<double> factor;  // row-major: [i_sigma * n_fprime + i_fprime]
  double max_factor = 0.0;

  double at(std::size_t i_sigma, std::size_t i_fprime) const {
    return factor[i_sigma * fprime.size() + i_fprime];
  }
};

/// Grid of the inverse comparison factor f' / (2 sigma^2 k0 cot(phi/2));
/// values below 1 mean the standard technique cannot out-reject external
/// modulations for that geometry.
inline GeometricFactorSurface geometric_factor_surface(double phi,
                                                       double lambda,
                                                       const AxisRange& sigma_range,
                                                       const AxisRange& fprime_range) {
  if (!(phi > 0.0 && phi < kPi))
    throw std::domain_error("geometric_factor_surface: phi outside (0, pi)");
  if (sigma_range.n < 2 || fprime_range.n < 2)
    throw std::invalid_argument("geometric_factor_surface: need >= 2 points per axis");
  GeometricFactorSurface surf;
  const double k0 = wavenumber(lambda);
  const double cot_half = 1.0 / std::tan(0.5 * phi);
  surf.sigma.resize(sigma_range.n);
  surf.fprime.resize(fprime_range.n);
  for (std::size_t i = 0; i < sigma_range.n; ++i)
    surf.sigma[i] = sigma_range.lo + (sigma_range.hi - sigma_range.lo) *
                                         static_cast<double>(i) /
                                         static_cast<double>(sigma_range.n - 1);
  for (std::size_t j = 0; j < fprime_range.n; ++j)
    surf.fprime[j] = fprime_range.lo + (fprime_range.hi - fprime_range.lo) *
                                           static_cast<double>(j) /
                                           static_cast<double>(fprime_range.n - 1);
  surf.factor.resize(sigma_range.n * fprime_range.n);
  surf.max_factor = 0.0;
  for (std::size_t i = 0; i < sigma_range.n; ++i) {
    const double s2 = surf.sigma[i] * surf.sigma[i];
    for (std::size_t j = 0; j < fprime_range.n; ++j) {
      const double value = surf.fprime[j] / (2.0 * s2 * k0 * cot_half);
      surf.factor[i * fprime_range.n + j] = value;
      if (value > surf.max_factor) surf.max_factor = value;
    }
  }
  return surf;
}

/// Dimensionless weakness parameter k^2 sigma^2 cot^2(phi/2) and the
/// advisory flag. The threshold warns; it never hard-errors, so breakdown
/// regimes stay explorable.
struct WeakValidity {
  double value = 0.0;
  bool valid = true;

  static constexpr double kWarnThreshold = 0.1;
};

inline WeakValidity weak_validity(const BeamParams& beam, const WvConfig& wv,
                                  const SignalKick& kick) {
  const double t = std::tan(0.5 * wv.phi);
  WeakValidity w;
  if (t == 0.0) {
    w.value = kick.k == 0.0 ? 0.0 : INFINITY;
  } else {
    const double u = kick.k * beam.sigma / t;
    w.value = u * u;
  }
  w.valid = w.value < WeakValidity::kWarnThreshold;
  return w;
}

}  // namespace deflectlab
