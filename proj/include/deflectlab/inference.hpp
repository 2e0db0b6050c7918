#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "deflectlab/detector.hpp"
#include "deflectlab/math_util.hpp"
#include "deflectlab/optics.hpp"
#include "deflectlab/quadrature.hpp"
#include "deflectlab/sampling.hpp"

namespace deflectlab {

/// Fisher information values with respect to the momentum kick (m^2 per
/// the 4 N sigma^2 scaling).
struct FisherReport {
  double info_dark = 0.0;
  double info_bright = 0.0;
  double info_st = 0.0;
  double info_numeric = 0.0;
  bool regime_valid = true;
  double weakness = 0.0;  // k^2 sigma^2 cot^2(phi/2), 0 when no kick given
};

/// Closed-form informations: st = 4 N sigma^2, dark = st cos^2(phi/2),
/// bright = st - dark (the complement form keeps the port split exactly
/// additive in floating point). Valid in the weak-interaction regime; pass
/// the operating kick to get the regime flag evaluated.
inline FisherReport fisher_analytic(
    const BeamParams& beam, const WvConfig& wv,
    std::optional<SignalKick> kick = std::nullopt) {
  beam.validate();
  wv.validate();
  FisherReport report;
  report.info_st = 4.0 * beam.n_photons * beam.sigma * beam.sigma;
  const double c = std::cos(0.5 * wv.phi);
  report.info_dark = report.info_st * c * c;
  report.info_bright = report.info_st - report.info_dark;
  if (kick) {
    const auto w = weak_validity(beam, wv, *kick);
    report.weakness = w.value;
    report.regime_valid = w.valid;
  }
  return report;
}

/// A one-parameter family of arrival densities k -> N(mean(k), std(k)).
using GaussianShiftFamily = std::function<GaussianPdf(double k)>;

struct FisherNumericOptions {
  double step = 0.0;        // 0 = auto: max(1e-6 |k|, 1e-9)
  double span_sigmas = 8.0; // quadrature domain half-width in units of std
  double norm_tol = 1e-6;   // allowed deviation of the density integral from 1
};

/// Quadrature evaluation of the information integral
///   I(k) = int P(x;k) [d/dk ln P(x;k)]^2 dx   (per photon)
/// using central finite differences for the score. The density must be
/// normalized; sub-normalized port densities are handled by weighting the
/// result with the port probability outside this function.
inline double fisher_numeric(const GaussianShiftFamily& family, double k,
                             const FisherNumericOptions& opts = {}) {
  const double h =
      opts.step > 0.0 ? opts.step : std::max(1e-6 * std::abs(k), 1e-9);
  if (!(h > 0.0)) throw std::invalid_argument("fisher_numeric: step underflow");

  const GaussianPdf center = family(k);
  const GaussianPdf lo_pdf = family(k - h);
  const GaussianPdf hi_pdf = family(k + h);
  const double span = opts.span_sigmas * center.std;
  const double lo = std::min({center.mean, lo_pdf.mean, hi_pdf.mean}) - span;
  const double hi = std::max({center.mean, lo_pdf.mean, hi_pdf.mean}) + span;

  const double norm = integrate([&](double x) { return center.density(x); },
                                lo, hi, 1e-12, 1e-10);
  if (std::abs(norm - 1.0) > opts.norm_tol)
    throw std::domain_error("fisher_numeric: density is not normalized");

  auto integrand = [&](double x) {
    const double p = center.density(x);
    if (p <= 0.0) return 0.0;
    const double score =
        (std::log(hi_pdf.density(x)) - std::log(lo_pdf.density(x))) / (2.0 * h);
    return p * score * score;
  };
  return integrate(integrand, lo, hi, 1e-18, 1e-12);
}

/// Informations degraded by Gaussian angular jitter of deviation
/// `q_jitter` in momentum units (1/m; radians convert via q = k0 theta):
///   wv: 4 N sigma^2 / (1 + (L / 2 k0 sigma^2)^2 [1 + (2 sigma Q)^2])
///   st: 4 N sigma^2 / (1 + (2 sigma Q)^2)
struct JitterInfo {
  double info_wv = 0.0;
  double info_st = 0.0;
};

inline JitterInfo fisher_with_angular_jitter(const BeamParams& beam,
                                             const WvConfig& wv,
                                             const StConfig& st,
                                             double q_jitter) {
  if (q_jitter < 0.0)
    throw std::invalid_argument("fisher_with_angular_jitter: Q < 0");
  beam.validate();
  wv.validate();
  st.validate();
  const double base = 4.0 * beam.n_photons * beam.sigma * beam.sigma;
  const double sq = 2.0 * beam.sigma * q_jitter;
  const double lever =
      wv.L / (2.0 * beam.k0() * beam.sigma * beam.sigma);
  JitterInfo info;
  info.info_wv = base / (1.0 + lever * lever * (1.0 + sq * sq));
  info.info_st = base / (1.0 + sq * sq);
  return info;
}

/// Informations degraded by Gaussian detector-displacement jitter J (m):
///   wv: 4 N sigma^4 / (sigma^2 + J^2)
///   st: 4 N sigma^2 / (1 + (2 k0 sigma J / f)^2)
inline JitterInfo fisher_with_detector_jitter(const BeamParams& beam,
                                              const WvConfig& wv,
                                              const StConfig& st, double j) {
  if (j < 0.0) throw std::invalid_argument("fisher_with_detector_jitter: J < 0");
  beam.validate();
  wv.validate();
  st.validate();
  const double s2 = beam.sigma * beam.sigma;
  const double base = 4.0 * beam.n_photons * s2;
  const double ratio = 2.0 * beam.k0() * beam.sigma * j / st.f;
  JitterInfo info;
  info.info_wv = base * s2 / (s2 + j * j);
  info.info_st = base / (1.0 + ratio * ratio);
  return info;
}

/// Technical-noise Cramer-Rao bound Delta k_B = sqrt(1/I_0 + J^2). When the
/// readout is split detection the information first pays the 2/pi binary-
/// outcome penalty.
inline double crb_with_noise(double info0, double j_elec,
                             bool split_detection = true) {
  if (!(info0 > 0.0)) throw std::invalid_argument("crb_with_noise: info0 <= 0");
  const double info_eff = split_detection ? info0 * (2.0 / kPi) : info0;
  return std::sqrt(1.0 / info_eff + j_elec * j_elec);
}

/// Fisher information (position units, per photon) of the binary
/// left/right outcome at beam offset mu: (dp/dmu)^2 / (p (1-p)). At mu = 0
/// this equals (2/pi)/s^2, the split-detector share of the full-Gaussian
/// information 1/s^2.
inline double split_binary_fisher_per_photon(double mu, double s) {
  if (!(s > 0.0)) throw std::invalid_argument("split_binary_fisher: s <= 0");
  const double z = mu / s;
  const double p = normal_cdf(z);
  if (p <= 0.0 || p >= 1.0) return 0.0;
  const double dpdmu = std::exp(-0.5 * z * z) / (s * std::sqrt(2.0 * kPi));
  return dpdmu * dpdmu / (p * (1.0 - p));
}

struct EstimationReport {
  double k_hat = 0.0;          // 1/m
  double delta_k = 0.0;        // observed deviation, 1/m
  double delta_k_bound = 0.0;  // Delta k_B, 1/m
  double efficiency = 0.0;     // (Delta k_B / Delta k)^2
  std::int64_t n_used = 0;     // samples or photons contributing
  std::int64_t n_saturated = 0;
};

/// Split-detection estimate over voltage samples taken at constant k.
/// Inverts the linearized response V/V_total = dx / (2 w alpha) and the
/// arm geometry; saturated samples are excluded and counted. The bound is
/// the per-sample modified CRB with the 2/pi split penalty and the
/// detector's noise-equivalent momentum.
inline EstimationReport estimate_k_split(const std::vector<double>& samples,
                                         const SplitDetector& det,
                                         const BeamParams& beam,
                                         const Technique& tech,
                                         double photons_per_sample) {
  det.validate();
  if (photons_per_sample <= 0.0)
    throw std::invalid_argument("estimate_k_split: photons_per_sample <= 0");
  const double width = tech.width(beam);
  const double g = tech.inversion_factor(beam);

  std::vector<double> k_samples;
  k_samples.reserve(samples.size());
  std::int64_t saturated = 0;
  for (double v : samples) {
    if (det.saturated(v)) {
      ++saturated;
      continue;
    }
    const double dx = (v / det.v_total) * 2.0 * width * det.alpha_cal;
    k_samples.push_back(dx / g);
  }
  if (k_samples.empty())
    throw std::invalid_argument("estimate_k_split: no usable samples");

  // Population deviation: the record mixes deterministic modulation with
  // noise, and the modulated part's rms must not carry the n/(n-1) factor.
  const auto stats = sample_stats(k_samples);
  const double n = static_cast<double>(stats.n);
  EstimationReport report;
  report.k_hat = stats.mean;
  report.delta_k =
      stats.n > 1 ? std::sqrt(stats.variance * (n - 1.0) / n) : 0.0;
  report.n_used = static_cast<std::int64_t>(k_samples.size());
  report.n_saturated = saturated;

  BeamParams per_sample = beam;
  per_sample.n_photons = photons_per_sample;
  double info0 = 0.0;
  if (tech.is_wv()) {
    const auto fisher = fisher_analytic(per_sample, tech.wv());
    info0 = tech.port() == Port::kDark ? fisher.info_dark : fisher.info_bright;
  } else {
    info0 = 4.0 * per_sample.n_photons * beam.sigma * beam.sigma;
  }
  const double j_elec = electronic_noise_momentum(det, beam, tech);
  report.delta_k_bound = crb_with_noise(info0, j_elec, /*split_detection=*/true);
  report.efficiency = report.delta_k > 0.0
                          ? std::pow(report.delta_k_bound / report.delta_k, 2)
                          : 0.0;
  return report;
}

/// Maximum-likelihood location estimate from an explicit photon batch:
/// sample mean through the arm geometry. delta_k is the standard error of
/// the estimate; the bound uses the detected-photon information of the
/// batch's own port (no split penalty: positions are fully resolved).
inline EstimationReport estimate_k_mle(const PhotonBatch& batch,
                                       const BeamParams& beam,
                                       const Technique& tech) {
  if (batch.positions.empty())
    throw std::invalid_argument("estimate_k_mle: empty batch");
  if (batch.port != tech.port())
    throw std::invalid_argument("estimate_k_mle: batch/technique port mismatch");
  const double g = tech.inversion_factor(beam);
  const auto stats = sample_stats(batch.positions);
  const double n = static_cast<double>(stats.n);

  EstimationReport report;
  report.k_hat = stats.mean / g;
  report.delta_k = stats.n > 1 ? stats.stddev() / (std::abs(g) * std::sqrt(n)) : 0.0;
  const double width = tech.width(beam);
  const double info_detected = n * g * g / (width * width);
  report.delta_k_bound = 1.0 / std::sqrt(info_detected);
  report.efficiency = report.delta_k > 0.0
                          ? std::pow(report.delta_k_bound / report.delta_k, 2)
                          : 0.0;
  report.n_used = batch.n_detected();
  return report;
}

/// Fisher-information fractions recovered from per-port SNR values:
/// I%_{D,B} = S^2_{D,B} / (S^2_D + S^2_B).
inline std::pair<double, double> fisher_fraction_from_snr(double snr_dark,
                                                          double snr_bright) {
  if (snr_dark < 0.0 || snr_bright < 0.0)
    throw std::invalid_argument("fisher_fraction_from_snr: negative SNR");
  const double d2 = snr_dark * snr_dark;
  const double b2 = snr_bright * snr_bright;
  const double total = d2 + b2;
  if (total <= 0.0)
    throw std::invalid_argument("fisher_fraction_from_snr: both SNRs zero");
  return {d2 / total, b2 / total};
}

/// Largest post-selection angle keeping the dark-port information fraction
/// above 1 - epsilon in the weak regime: phi_max = 2 sqrt(epsilon).
inline double efficiency_angle_bound(double epsilon) {
  if (!(epsilon > 0.0 && epsilon < 1.0))
    throw std::domain_error("efficiency_angle_bound: epsilon outside (0, 1)");
  return 2.0 * std::sqrt(epsilon);
}

}  // namespace deflectlab
