#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "deflectlab/fft.hpp"
#include "deflectlab/math_util.hpp"

namespace deflectlab {

/// Averaged single-sided amplitude spectrum in dBV
/// (dBV = 20 log10(V / V_total)). Rectangular window; a sine of amplitude
/// `a` at a bin-centered frequency reads 20 log10(a / V_total) exactly.
struct SpectrumResult {
  std::vector<double> freqs;      // Hz, bins 0 .. N/2
  std::vector<double> magnitude;  // averaged amplitude, volts
  std::vector<double> dbv;        // 20 log10(magnitude / v_total)
  double bin_width = 0.0;         // Hz
  double v_total = 1.0;
  int n_averages = 1;
  std::string window = "rectangular";
  double parseval_rel_error = 0.0;

  std::size_t bin_of(double freq, double tol_fraction = 0.25) const {
    const double ideal = freq / bin_width;
    const auto bin = static_cast<std::size_t>(std::llround(ideal));
    if (bin >= freqs.size() || std::abs(ideal - std::round(ideal)) > tol_fraction)
      throw std::invalid_argument("spectrum: frequency is not bin-centered: " +
                                  std::to_string(freq));
    return bin;
  }

  double magnitude_at(double freq) const { return magnitude[bin_of(freq)]; }
  double dbv_at(double freq) const { return dbv[bin_of(freq)]; }
};

/// Splits `trace` into `n_avg` equal segments, averages the segment
/// amplitude spectra, and records a Parseval self-check from the first
/// segment (time-domain variance vs integrated spectral power).
inline SpectrumResult averaged_spectrum(const std::vector<double>& trace,
                                        int n_avg, double v_total,
                                        double sample_rate) {
  if (n_avg < 1) throw std::invalid_argument("averaged_spectrum: n_avg < 1");
  if (!(v_total > 0.0))
    throw std::invalid_argument("averaged_spectrum: v_total <= 0");
  if (trace.empty() || trace.size() % static_cast<std::size_t>(n_avg) != 0)
    throw std::invalid_argument(
        "averaged_spectrum: trace length must be a positive multiple of n_avg");
  const std::size_t seg_len = trace.size() / static_cast<std::size_t>(n_avg);
  if (seg_len < 2)
    throw std::invalid_argument("averaged_spectrum: segments too short");

  SpectrumResult result;
  result.v_total = v_total;
  result.n_averages = n_avg;
  result.bin_width = sample_rate / static_cast<double>(seg_len);
  const std::size_t n_bins = seg_len / 2 + 1;
  result.freqs.resize(n_bins);
  for (std::size_t m = 0; m < n_bins; ++m)
    result.freqs[m] = result.bin_width * static_cast<double>(m);
  result.magnitude.assign(n_bins, 0.0);

  for (int s = 0; s < n_avg; ++s) {
    std::vector<double> segment(trace.begin() + s * seg_len,
                                trace.begin() + (s + 1) * seg_len);
    const auto bins = dft_real(segment);

    if (s == 0) {
      // Parseval: sum |x|^2 = (1/N) sum |X|^2, rearranged as variance vs
      // integrated AC spectral power.
      const double n = static_cast<double>(seg_len);
      double sum_sq = 0.0;
      for (double v : segment) sum_sq += v * v;
      const double mean = bins[0].real() / n;
      const double var_time = sum_sq / n - mean * mean;
      double var_spec = 0.0;
      for (std::size_t m = 1; m < seg_len; ++m) var_spec += std::norm(bins[m]);
      var_spec /= n * n;
      const double scale = std::max(std::abs(var_time), 1e-300);
      result.parseval_rel_error = std::abs(var_time - var_spec) / scale;
    }

    const double n = static_cast<double>(seg_len);
    for (std::size_t m = 0; m < n_bins; ++m) {
      const bool paired = m != 0 && !(seg_len % 2 == 0 && m == seg_len / 2);
      const double amp = (paired ? 2.0 : 1.0) * std::abs(bins[m]) / n;
      result.magnitude[m] += amp;
    }
  }
  for (auto& m : result.magnitude) m /= static_cast<double>(n_avg);

  result.dbv.resize(n_bins);
  for (std::size_t m = 0; m < n_bins; ++m)
    result.dbv[m] = result.magnitude[m] > 0.0
                        ? 20.0 * std::log10(result.magnitude[m] / v_total)
                        : -std::numeric_limits<double>::infinity();
  return result;
}

/// Phase-coherent variant: averages the complex segment spectra before
/// taking magnitudes. Deterministic tones (integer cycles per segment) are
/// preserved while incoherent noise averages down as 1/sqrt(n_avg); use it
/// for low-variance peak amplitude estimates alongside the magnitude-
/// averaged floor.
inline SpectrumResult coherent_spectrum(const std::vector<double>& trace,
                                        int n_avg, double v_total,
                                        double sample_rate) {
  if (n_avg < 1) throw std::invalid_argument("coherent_spectrum: n_avg < 1");
  if (!(v_total > 0.0))
    throw std::invalid_argument("coherent_spectrum: v_total <= 0");
  if (trace.empty() || trace.size() % static_cast<std::size_t>(n_avg) != 0)
    throw std::invalid_argument(
        "coherent_spectrum: trace length must be a positive multiple of n_avg");
  const std::size_t seg_len = trace.size() / static_cast<std::size_t>(n_avg);
  const std::size_t n_bins = seg_len / 2 + 1;

  std::vector<std::complex<double>> acc(n_bins, {0.0, 0.0});
  for (int s = 0; s < n_avg; ++s) {
    std::vector<double> segment(trace.begin() + s * seg_len,
                                trace.begin() + (s + 1) * seg_len);
    const auto bins = dft_real(segment);
    for (std::size_t m = 0; m < n_bins; ++m) acc[m] += bins[m];
  }

  SpectrumResult result;
  result.v_total = v_total;
  result.n_averages = n_avg;
  result.bin_width = sample_rate / static_cast<double>(seg_len);
  result.freqs.resize(n_bins);
  result.magnitude.resize(n_bins);
  result.dbv.resize(n_bins);
  const double n = static_cast<double>(seg_len);
  for (std::size_t m = 0; m < n_bins; ++m) {
    result.freqs[m] = result.bin_width * static_cast<double>(m);
    const bool paired = m != 0 && !(seg_len % 2 == 0 && m == seg_len / 2);
    result.magnitude[m] = (paired ? 2.0 : 1.0) * std::abs(acc[m]) /
                          (n * static_cast<double>(n_avg));
    result.dbv[m] = result.magnitude[m] > 0.0
                        ? 20.0 * std::log10(result.magnitude[m] / v_total)
                        : -std::numeric_limits<double>::infinity();
  }
  return result;
}

/// Median linear magnitude over [f_lo, f_hi], excluding DC and a guard of
/// +-`guard_bins` around each frequency in `exclude`.
inline double noise_floor_magnitude(const SpectrumResult& spec, double f_lo,
                                    double f_hi,
                                    const std::vector<double>& exclude = {},
                                    int guard_bins = 2) {
  std::vector<double> values;
  for (std::size_t m = 1; m < spec.freqs.size(); ++m) {
    const double f = spec.freqs[m];
    if (f < f_lo || f > f_hi) continue;
    bool skip = false;
    for (double fx : exclude) {
      if (std::abs(f - fx) <=
          static_cast<double>(guard_bins) * spec.bin_width + 1e-9) {
        skip = true;
        break;
      }
    }
    if (!skip) values.push_back(spec.magnitude[m]);
  }
  if (values.empty())
    throw std::invalid_argument("noise_floor_magnitude: no bins in band");
  return median(std::move(values));
}

/// Amplitude SNR of the bin at `freq` against the local noise floor,
/// bias-corrected for the noise power sitting inside the peak bin.
inline double snr_at(const SpectrumResult& spec, double freq,
                     double band_half_width_hz = 0.0) {
  const double peak = spec.magnitude_at(freq);
  const double lo = band_half_width_hz > 0.0 ? std::max(0.0, freq - band_half_width_hz)
                                             : spec.freqs.front();
  const double hi = band_half_width_hz > 0.0 ? freq + band_half_width_hz
                                             : spec.freqs.back();
  const double floor = noise_floor_magnitude(spec, lo, hi, {freq});
  if (!(floor > 0.0)) throw std::domain_error("snr_at: zero noise floor");
  const double ratio2 = (peak / floor) * (peak / floor);
  return std::sqrt(std::max(ratio2 - 1.0, 0.0));
}

}  // namespace deflectlab
