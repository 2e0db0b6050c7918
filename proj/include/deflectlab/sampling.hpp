#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "deflectlab/disturbance.hpp"
#include "deflectlab/fft.hpp"
#include "deflectlab/math_util.hpp"
#include "deflectlab/optics.hpp"
#include "deflectlab/rng.hpp"

namespace deflectlab {

enum class Port { kDark, kBright, kSt };

inline const char* port_name(Port p) {
  switch (p) {
    case Port::kDark: return "dark";
    case Port::kBright: return "bright";
    case Port::kSt: return "st";
  }
  return "?";
}

struct GaussianPdf {
  double mean = 0.0;
  double std = 0.0;

  double density(double x) const {
    const double z = (x - mean) / std;
    return std::exp(-0.5 * z * z) / (std * std::sqrt(2.0 * kPi));
  }
  double prob_right_of(double edge) const {
    return normal_cdf((mean - edge) / std);
  }
};

/// Dark/bright-port arrival density: width sigma, centered at -delta_d
/// (dark) or +delta_b (bright) following the output-profile exponents.
inline GaussianPdf pdf_wv(const BeamParams& beam, const WvConfig& wv,
                          const SignalKick& kick, Port port) {
  wv.validate();
  GaussianPdf pdf;
  pdf.std = beam.sigma;
  switch (port) {
    case Port::kDark: pdf.mean = -dark_shift(beam, wv, kick); break;
    case Port::kBright: pdf.mean = bright_shift(beam, wv, kick); break;
    case Port::kSt:
      throw std::invalid_argument("pdf_wv: port must be dark or bright");
  }
  return pdf;
}

/// Focused-beam arrival density: mean f k / k0, width sigma_f.
inline GaussianPdf pdf_st(const BeamParams& beam, const StConfig& st,
                          const SignalKick& kick) {
  st.validate();
  return GaussianPdf{st_shift(beam, st, kick), st.sigma_f(beam)};
}

/// One measurement arm. Bundles the geometry needed to map signals,
/// modulations and jitters onto the detector plane.
class Technique {
 public:
  static Technique wv_dark(const WvConfig& wv, const StConfig& st) {
    return Technique(Port::kDark, wv, st);
  }
  static Technique wv_bright(const WvConfig& wv, const StConfig& st) {
    return Technique(Port::kBright, wv, st);
  }
  static Technique standard(const WvConfig& wv, const StConfig& st) {
    return Technique(Port::kSt, wv, st);
  }

  Port port() const { return port_; }
  bool is_wv() const { return port_ != Port::kSt; }
  const WvConfig& wv() const { return wv_; }
  const StConfig& st() const { return st_; }

  /// Beam radius parameter at the detector.
  double width(const BeamParams& beam) const {
    return is_wv() ? beam.sigma : st_.sigma_f(beam);
  }

  /// Lever arm mapping an angular disturbance to displacement (m per rad).
  double angular_lever(const BeamParams&) const {
    return is_wv() ? wv_.L : st_.f;
  }

  /// Signed signal displacement at the detector for kick k.
  double signal_shift(const BeamParams& beam, const SignalKick& kick) const {
    switch (port_) {
      case Port::kDark: return -dark_shift(beam, wv_, kick);
      case Port::kBright: return bright_shift(beam, wv_, kick);
      case Port::kSt: return st_shift(beam, st_, kick);
    }
    return 0.0;
  }

  /// d(displacement)/dk; k_hat = displacement / inversion_factor.
  double inversion_factor(const BeamParams& beam) const {
    const double two_sigma2 = 2.0 * beam.sigma * beam.sigma;
    switch (port_) {
      case Port::kDark: return -two_sigma2 / std::tan(0.5 * wv_.phi);
      case Port::kBright: return two_sigma2 * std::tan(0.5 * wv_.phi);
      case Port::kSt: return st_.f / beam.k0();
    }
    return 0.0;
  }

  /// Photon fraction reaching this arm's detector.
  double port_fraction() const {
    if (!is_wv()) return 1.0;
    const auto p = port_probabilities(wv_);
    return port_ == Port::kDark ? p.dark : p.bright;
  }

  /// Mean displacement contributed by deterministic modulations at time t
  /// (Table-style mapping: d directly, q through the lever arm).
  double modulation_shift(const BeamParams& beam, const DisturbanceSet& dist,
                          double t) const {
    const double lever = is_wv() ? wv_.L : st_.f;
    return dist.d_mod.at(t) + lever * dist.q_mod.at(t) / beam.k0();
  }

  /// Effective per-photon arrival width once per-shot Gaussian jitters are
  /// folded in. Angular jitter maps through the same lever arm as q; for
  /// the weak-value arm an active angular-jitter channel also carries the
  /// free-propagation spread L / (2 k0 sigma) accumulated over that lever
  /// distance, which the idealized zero-jitter profile neglects.
  double effective_width(const BeamParams& beam,
                         const DisturbanceSet& dist) const {
    const double w = width(beam);
    double var = w * w;
    if (dist.angular_jitter_rad > 0.0) {
      const double lever = angular_lever(beam);
      const double geometric = lever * dist.angular_jitter_rad;
      var += geometric * geometric;
      if (is_wv()) {
        const double spread = wv_.L / (2.0 * beam.k0() * beam.sigma);
        var += spread * spread;
      }
    }
    if (dist.detector_jitter_m > 0.0)
      var += dist.detector_jitter_m * dist.detector_jitter_m;
    return std::sqrt(var);
  }

 private:
  Technique(Port port, const WvConfig& wv, const StConfig& st)
      : port_(port), wv_(wv), st_(st) {
    if (is_wv()) wv_.validate();
    st_.validate();
  }

  Port port_;
  WvConfig wv_;
  StConfig st_;
};

/// Monte Carlo unit of data: transverse arrival positions for one arm at
/// one timestamp.
struct PhotonBatch {
  std::vector<double> positions;  // m
  Port port = Port::kSt;
  double t = 0.0;                 // s
  std::int64_t n_injected = 0;    // photons sent into the apparatus
  std::string seed_path;          // RNG stream identifier

  std::int64_t n_detected() const {
    return static_cast<std::int64_t>(positions.size());
  }
};

/// Draws a batch of arrival positions.
///
/// `n` counts photons injected into the apparatus; for the weak-value arms
/// each photon lands in the requested port with the post-selection
/// probability, so the batch holds a binomial subset. Deterministic
/// modulations are evaluated once at the batch timestamp; per-shot Gaussian
/// jitters are folded into the effective arrival width (exact for Gaussian
/// components).
inline PhotonBatch sample_batch(const BeamParams& beam, const Technique& tech,
                                const SignalKick& kick,
                                const DisturbanceSet& dist, double t,
                                std::int64_t n, RngStream& stream) {
  if (n < 0) throw std::invalid_argument("sample_batch: n < 0");
  dist.validate();
  PhotonBatch batch;
  batch.port = tech.port();
  batch.t = t;
  batch.n_injected = n;
  batch.seed_path = stream.key().str();
  if (n == 0) return batch;

  std::int64_t detected = n;
  if (tech.is_wv()) detected = stream.binomial(n, tech.port_fraction());
  if (detected == 0) return batch;

  const double mean =
      tech.signal_shift(beam, kick) + tech.modulation_shift(beam, dist, t);
  const double width = tech.effective_width(beam, dist);

  batch.positions.resize(static_cast<std::size_t>(detected));
  for (auto& x : batch.positions) x = stream.normal(mean, width);
  return batch;
}

/// Angular time series (radians) for the composite laser-jitter model:
/// fixed tones with stream-drawn phases plus brickwall band-limited
/// Gaussian noise rescaled to the requested rms.
inline std::vector<double> laser_jitter_waveform(const LaserJitterSpec& spec,
                                                 double duration,
                                                 double sample_rate,
                                                 RngStream& stream) {
  if (!(duration > 0.0) || !(sample_rate > 0.0))
    throw std::invalid_argument("laser_jitter_waveform: bad duration/rate");
  const double f_max = spec.max_tone_frequency();
  if (f_max > 0.0 && sample_rate <= 2.0 * f_max)
    throw std::domain_error(
        "laser_jitter_waveform: sample rate must exceed twice the highest "
        "tone frequency");

  const auto n = static_cast<std::size_t>(std::llround(duration * sample_rate));
  std::vector<double> series(n, 0.0);
  if (n == 0 || spec.empty()) return series;

  for (const auto& tone : spec.tones) {
    if (tone.amplitude_rad <= 0.0) continue;
    const double phase = stream.uniform() * 2.0 * kPi;
    const double w = 2.0 * kPi * tone.frequency / sample_rate;
    for (std::size_t i = 0; i < n; ++i)
      series[i] += tone.amplitude_rad * std::sin(w * static_cast<double>(i) + phase);
  }

  if (spec.band_rms_rad > 0.0) {
    std::vector<std::complex<double>> white(n);
    for (auto& v : white) v = {stream.normal(), 0.0};
    auto freq_domain = dft(white);
    for (std::size_t m = 0; m < n; ++m) {
      const double fm = (m <= n / 2 ? static_cast<double>(m)
                                    : static_cast<double>(m) - static_cast<double>(n)) *
                        sample_rate / static_cast<double>(n);
      if (m == 0 || std::abs(fm) > spec.band_cutoff_hz) freq_domain[m] = 0.0;
    }
    auto band = idft(freq_domain);
    double power = 0.0;
    for (const auto& v : band) power += v.real() * v.real();
    const double rms = std::sqrt(power / static_cast<double>(n));
    if (rms > 0.0) {
      const double gain = spec.band_rms_rad / rms;
      for (std::size_t i = 0; i < n; ++i) series[i] += band[i].real() * gain;
    }
  }
  return series;
}

}  // namespace deflectlab
