#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "deflectlab/constants.hpp"

namespace deflectlab {

namespace detail {

inline bool is_power_of_two(std::size_t n) { return n && !(n & (n - 1)); }

/// In-place iterative radix-2 Cooley-Tukey. sign = -1 forward, +1 inverse
/// (unscaled).
inline void fft_radix2(std::vector<std::complex<double>>& a, int sign) {
  const std::size_t n = a.size();
  if (!is_power_of_two(n)) throw std::invalid_argument("fft_radix2: size not 2^k");
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double angle = sign * 2.0 * kPi / static_cast<double>(len);
    const std::complex<double> wlen(std::cos(angle), std::sin(angle));
    for (std::size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (std::size_t j = 0; j < len / 2; ++j) {
        const std::complex<double> u = a[i + j];
        const std::complex<double> v = a[i + j + len / 2] * w;
        a[i + j] = u + v;
        a[i + j + len / 2] = u - v;
        w *= wlen;
      }
    }
  }
}

}  // namespace detail

/// Forward DFT of arbitrary length: X[m] = sum_n x[n] exp(-2 pi i m n / N).
/// Power-of-two sizes go straight to radix-2; other sizes use Bluestein's
/// chirp-z reduction. Phase arguments are reduced modulo 2N in integer
/// arithmetic so large n^2 does not lose precision.
inline std::vector<std::complex<double>> dft(
    const std::vector<std::complex<double>>& x) {
  const std::size_t n = x.size();
  if (n == 0) return {};
  if (detail::is_power_of_two(n)) {
    auto a = x;
    detail::fft_radix2(a, -1);
    return a;
  }

  std::size_t m = 1;
  while (m < 2 * n - 1) m <<= 1;

  std::vector<std::complex<double>> chirp(n);
  for (std::size_t k = 0; k < n; ++k) {
    const std::uint64_t k2 = (static_cast<std::uint64_t>(k) * k) %
                             (2 * static_cast<std::uint64_t>(n));
    const double angle = kPi * static_cast<double>(k2) / static_cast<double>(n);
    chirp[k] = std::complex<double>(std::cos(angle), -std::sin(angle));
  }

  std::vector<std::complex<double>> a(m, {0.0, 0.0});
  std::vector<std::complex<double>> b(m, {0.0, 0.0});
  for (std::size_t k = 0; k < n; ++k) a[k] = x[k] * chirp[k];
  b[0] = std::conj(chirp[0]);
  for (std::size_t k = 1; k < n; ++k) {
    b[k] = std::conj(chirp[k]);
    b[m - k] = b[k];
  }

  detail::fft_radix2(a, -1);
  detail::fft_radix2(b, -1);
  for (std::size_t k = 0; k < m; ++k) a[k] *= b[k];
  detail::fft_radix2(a, +1);

  std::vector<std::complex<double>> out(n);
  const double inv_m = 1.0 / static_cast<double>(m);
  for (std::size_t k = 0; k < n; ++k) out[k] = a[k] * inv_m * chirp[k];
  return out;
}

inline std::vector<std::complex<double>> dft_real(const std::vector<double>& x) {
  std::vector<std::complex<double>> c(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) c[i] = {x[i], 0.0};
  return dft(c);
}

/// Inverse DFT (scaled by 1/N).
inline std::vector<std::complex<double>> idft(
    const std::vector<std::complex<double>>& x) {
  const std::size_t n = x.size();
  if (n == 0) return {};
  std::vector<std::complex<double>> conj_in(n);
  for (std::size_t i = 0; i < n; ++i) conj_in[i] = std::conj(x[i]);
  auto y = dft(conj_in);
  const double inv_n = 1.0 / static_cast<double>(n);
  for (auto& v : y) v = std::conj(v) * inv_n;
  return y;
}

}  // namespace deflectlab
