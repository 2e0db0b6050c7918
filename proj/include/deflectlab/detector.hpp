#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>

#include "deflectlab/math_util.hpp"
#include "deflectlab/optics.hpp"
#include "deflectlab/rng.hpp"
#include "deflectlab/sampling.hpp"

namespace deflectlab {

/// Slope constant of an ideal knife-edge split detector: the linearized
/// response V/V_total = dx / (2 sigma alpha) is exact at alpha = sqrt(pi/8).
inline const double kAlphaIdeal = std::sqrt(kPi / 8.0);

/// Two-segment position detector.
///
/// sigma_J is a white-noise density in V/sqrt(Hz): a sample integrated for
/// time T carries Gaussian voltage noise of deviation sigma_J / sqrt(T),
/// which keeps the per-sample noise injection and the noise-equivalent
/// momentum conversion mutually consistent. alpha_cal defaults to the
/// measured 0.66; the ideal value is kAlphaIdeal.
struct SplitDetector {
  double alpha_cal = 0.66;
  double sigma_J = 0.0;       // V/sqrt(Hz)
  double v_total = 1.0;       // V, proportional to detected power
  double sample_time = 1.0;   // s
  double saturation_v = 0.0;  // V, 0 = clipping disabled

  double noise_std_per_sample() const {
    return sigma_J > 0.0 ? sigma_J / std::sqrt(sample_time) : 0.0;
  }

  double clip(double v) const {
    if (saturation_v <= 0.0) return v;
    if (v > saturation_v) return saturation_v;
    if (v < -saturation_v) return -saturation_v;
    return v;
  }

  bool saturated(double v) const {
    return saturation_v > 0.0 && std::abs(v) >= saturation_v;
  }

  void validate() const {
    if (!(alpha_cal > 0.0)) throw std::invalid_argument("detector: alpha_cal <= 0");
    if (sigma_J < 0.0) throw std::invalid_argument("detector: sigma_J < 0");
    if (!(v_total > 0.0)) throw std::invalid_argument("detector: v_total <= 0");
    if (!(sample_time > 0.0)) throw std::invalid_argument("detector: sample_time <= 0");
    if (saturation_v < 0.0) throw std::invalid_argument("detector: saturation_v < 0");
  }
};

/// Exact normalized left/right difference for a Gaussian beam of mean
/// `pdf_mean` and width `pdf_std` on an ideal split detector:
/// 2 Phi(mu/s) - 1. Odd in mu, monotone, bounded in (-1, 1); small-shift
/// slope sqrt(2/pi)/s.
inline double split_signal_exact(double pdf_mean, double pdf_std) {
  if (!(pdf_std > 0.0))
    throw std::invalid_argument("split_signal_exact: pdf_std must be > 0");
  return 2.0 * normal_cdf(pdf_mean / pdf_std) - 1.0;
}

/// Converts an explicit photon batch to one voltage sample:
/// V = v_total (n_right - n_left) / n + N(0, sigma_J/sqrt(T)), clipped when
/// saturation is configured.
inline double batch_to_voltage(const PhotonBatch& batch,
                               const SplitDetector& det, RngStream& stream) {
  det.validate();
  if (batch.positions.empty())
    throw std::invalid_argument(
        "batch_to_voltage: empty batch (use noise_only_voltage for "
        "electronic-noise-only sampling)");
  std::int64_t right = 0;
  for (double x : batch.positions)
    if (x >= 0.0) ++right;
  const auto n = static_cast<std::int64_t>(batch.positions.size());
  double v = det.v_total * static_cast<double>(2 * right - n) /
             static_cast<double>(n);
  const double noise = det.noise_std_per_sample();
  if (noise > 0.0) v += stream.normal(0.0, noise);
  return det.clip(v);
}

/// Electronic-noise-only sample (laser off).
inline double noise_only_voltage(const SplitDetector& det, RngStream& stream) {
  det.validate();
  const double noise = det.noise_std_per_sample();
  return det.clip(noise > 0.0 ? stream.normal(0.0, noise) : 0.0);
}

/// Aggregated equivalent of sample_batch + batch_to_voltage for large
/// photon counts: only the left/right split matters, so the count is drawn
/// binomially with p = P(x >= 0). Returns the clipped voltage; photons = 0
/// yields a noise-only sample.
inline double sample_split_voltage(std::int64_t photons, double mean,
                                   double width, const SplitDetector& det,
                                   RngStream& stream) {
  if (photons <= 0) return noise_only_voltage(det, stream);
  const double p_right = normal_cdf(mean / width);
  const std::int64_t right = stream.binomial(photons, p_right);
  double v = det.v_total * static_cast<double>(2 * right - photons) /
             static_cast<double>(photons);
  const double noise = det.noise_std_per_sample();
  if (noise > 0.0) v += stream.normal(0.0, noise);
  return det.clip(v);
}

/// Noise-equivalent momentum density J (1/m): electronic noise referred to
/// the kick parameter through the detector's displacement calibration and
/// the arm's geometry,
///   WVT: (sigma_J/sqrt(T)) (alpha 2 sigma / V_total) tan(phi/2) / (2 sigma^2)
///   ST:  (sigma_J/sqrt(T)) (alpha 2 sigma_f / V_total) k0 / f.
inline double electronic_noise_momentum(const SplitDetector& det,
                                        const BeamParams& beam,
                                        const Technique& tech) {
  det.validate();
  if (det.sigma_J == 0.0) return 0.0;
  const double volts = det.sigma_J / std::sqrt(det.sample_time);
  const double width = tech.width(beam);
  const double displacement = volts * det.alpha_cal * 2.0 * width / det.v_total;
  return displacement / std::abs(tech.inversion_factor(beam));
}

}  // namespace deflectlab
