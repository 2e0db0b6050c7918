#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <vector>

#include "deflectlab/fft.hpp"
#include "deflectlab/rng.hpp"
#include "deflectlab/spectrum.hpp"

using namespace deflectlab;

namespace {

// Independent O(n^2) oracle for the transform.
std::vector<std::complex<double>> naive_dft(
    const std::vector<std::complex<double>>& x) {
  const std::size_t n = x.size();
  std::vector<std::complex<double>> out(n);
  for (std::size_t m = 0; m < n; ++m) {
    std::complex<double> acc{0.0, 0.0};
    for (std::size_t j = 0; j < n; ++j) {
      const double angle = -2.0 * kPi * double(m) * double(j) / double(n);
      acc += x[j] * std::complex<double>(std::cos(angle), std::sin(angle));
    }
    out[m] = acc;
  }
  return out;
}

std::vector<double> sine_trace(double amp, double freq, double fs,
                               std::size_t n, double phase = 0.3) {
  std::vector<double> trace(n);
  for (std::size_t i = 0; i < n; ++i)
    trace[i] = amp * std::sin(2.0 * kPi * freq * double(i) / fs + phase);
  return trace;
}

}  // namespace

TEST_CASE("dft agrees with the quadratic-time oracle") {
  RngStream stream(31, 1, 0);
  for (std::size_t n : {std::size_t{8}, std::size_t{12}, std::size_t{125}}) {
    std::vector<std::complex<double>> x(n);
    for (auto& v : x) v = {stream.normal(), stream.normal()};
    const auto fast = dft(x);
    const auto slow = naive_dft(x);
    for (std::size_t m = 0; m < n; ++m)
      REQUIRE(std::abs(fast[m] - slow[m]) < 1e-9);
  }
}

TEST_CASE("idft inverts dft") {
  RngStream stream(32, 1, 0);
  for (std::size_t n : {std::size_t{16}, std::size_t{60}}) {
    std::vector<std::complex<double>> x(n);
    for (auto& v : x) v = {stream.normal(), stream.normal()};
    const auto round = idft(dft(x));
    for (std::size_t i = 0; i < n; ++i)
      REQUIRE(std::abs(round[i] - x[i]) < 1e-10);
  }
}

TEST_CASE("bin-centered sine reads its amplitude exactly") {
  const double fs = 1000.0;
  const std::size_t n = 500;
  const double amp = 0.025;
  const auto trace = sine_trace(amp, 20.0, fs, n);
  const auto spec = averaged_spectrum(trace, 1, 1.0, fs);
  REQUIRE(spec.bin_width == Catch::Approx(2.0));
  REQUIRE(spec.magnitude_at(20.0) == Catch::Approx(amp).epsilon(1e-10));
  REQUIRE(spec.dbv_at(20.0) ==
          Catch::Approx(20.0 * std::log10(amp)).margin(0.1));
}

TEST_CASE("20 dBV corresponds to a factor of 10 in volts") {
  const double fs = 1024.0;
  const std::size_t n = 1024;
  const auto weak = averaged_spectrum(sine_trace(1e-3, 16.0, fs, n), 1, 1.0, fs);
  const auto strong = averaged_spectrum(sine_trace(1e-2, 16.0, fs, n), 1, 1.0, fs);
  REQUIRE(strong.dbv_at(16.0) - weak.dbv_at(16.0) == Catch::Approx(20.0).margin(1e-9));
}

TEST_CASE("Parseval self-check is tiny for noise-free traces") {
  const double fs = 2000.0;
  const auto trace = sine_trace(0.5, 40.0, fs, 1000);
  const auto spec = averaged_spectrum(trace, 2, 1.0, fs);
  REQUIRE(spec.parseval_rel_error < 1e-10);
}

TEST_CASE("averaging keeps peaks and steadies the floor") {
  const double fs = 4096.0;
  const std::size_t n = 16384;
  std::vector<double> trace = sine_trace(0.1, 256.0, fs, n);
  RngStream stream(33, 1, 0);
  for (auto& v : trace) v += stream.normal(0.0, 0.02);

  const auto few = averaged_spectrum(trace, 2, 1.0, fs);
  const auto many = averaged_spectrum(trace, 16, 1.0, fs);
  REQUIRE(few.magnitude_at(256.0) == Catch::Approx(0.1).epsilon(0.02));
  REQUIRE(many.magnitude_at(256.0) == Catch::Approx(0.1).epsilon(0.02));

  auto floor_spread = [](const SpectrumResult& s) {
    double sum = 0.0, sum2 = 0.0;
    std::size_t count = 0;
    for (std::size_t m = 1; m < s.freqs.size(); ++m) {
      if (std::abs(s.freqs[m] - 256.0) < 4.0 * s.bin_width) continue;
      sum += s.magnitude[m];
      sum2 += s.magnitude[m] * s.magnitude[m];
      ++count;
    }
    const double mean = sum / double(count);
    return std::sqrt(sum2 / double(count) - mean * mean) / mean;
  };
  // Relative bin-to-bin scatter of the floor drops with averaging.
  REQUIRE(floor_spread(many) < 0.75 * floor_spread(few));
}

TEST_CASE("coherent averaging preserves locked tones and buries noise") {
  const double fs = 2048.0;
  const std::size_t seg = 512;
  const int n_avg = 16;
  std::vector<double> trace = sine_trace(0.05, 64.0, fs, seg * n_avg, 0.7);
  RngStream stream(34, 1, 0);
  for (auto& v : trace) v += stream.normal(0.0, 0.05);

  const auto incoherent = averaged_spectrum(trace, n_avg, 1.0, fs);
  const auto coherent = coherent_spectrum(trace, n_avg, 1.0, fs);
  REQUIRE(coherent.magnitude_at(64.0) == Catch::Approx(0.05).epsilon(0.05));
  const double floor_inc =
      noise_floor_magnitude(incoherent, 100.0, 900.0, {});
  const double floor_coh = noise_floor_magnitude(coherent, 100.0, 900.0, {});
  REQUIRE(floor_coh < 0.5 * floor_inc);
}

TEST_CASE("snr extraction") {
  const double fs = 2048.0;
  const std::size_t seg = 1024;
  std::vector<double> trace = sine_trace(0.02, 100.0, fs, seg * 8, 0.1);
  RngStream stream(35, 1, 0);
  for (auto& v : trace) v += stream.normal(0.0, 0.04);
  const auto spec = averaged_spectrum(trace, 8, 1.0, fs);
  const double snr = snr_at(spec, 100.0, 80.0);
  // Expected floor: sqrt(pi) sigma / sqrt(N_seg) = 0.0022; SNR ~ 9.
  REQUIRE(snr > 5.0);
  REQUIRE(snr < 13.0);
}

TEST_CASE("spectrum input validation") {
  const auto trace = sine_trace(1.0, 10.0, 100.0, 100);
  REQUIRE_THROWS_AS(averaged_spectrum(trace, 3, 1.0, 100.0),
                    std::invalid_argument);  // 100 % 3 != 0
  REQUIRE_THROWS_AS(averaged_spectrum(trace, 0, 1.0, 100.0),
                    std::invalid_argument);
  REQUIRE_THROWS_AS(averaged_spectrum({}, 1, 1.0, 100.0),
                    std::invalid_argument);
  const auto spec = averaged_spectrum(trace, 1, 1.0, 100.0);
  REQUIRE_THROWS_AS(spec.bin_of(10.4), std::invalid_argument);  // off-bin
  REQUIRE_NOTHROW(spec.bin_of(10.0));
}
