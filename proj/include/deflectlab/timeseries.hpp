#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "deflectlab/constants.hpp"
#include "deflectlab/detector.hpp"
#include "deflectlab/disturbance.hpp"
#include "deflectlab/inference.hpp"
#include "deflectlab/math_util.hpp"
#include "deflectlab/optics.hpp"
#include "deflectlab/parallel.hpp"
#include "deflectlab/rng.hpp"
#include "deflectlab/sampling.hpp"
#include "deflectlab/spectrum.hpp"

namespace deflectlab {

/// Momentum-kick drive k(t) in 1/m.
///
/// The trapezoid is the plateau protocol: rise over `rise_time`, hold at
/// `amplitude` for half a period minus the ramps, fall, hold at zero.
struct DriveWaveform {
  enum class Kind { kSine, kTrapezoid };
  Kind kind = Kind::kSine;
  double amplitude = 0.0;  // 1/m
  double frequency = 0.0;  // Hz
  double rise_time = 0.0;  // s, trapezoid only
  double phase = 0.0;      // rad, sine only

  double period() const { return 1.0 / frequency; }
  double plateau_duration() const { return 0.5 * period() - rise_time; }

  void validate() const {
    if (amplitude < 0.0) throw std::invalid_argument("drive: amplitude < 0");
    if (amplitude == 0.0) return;
    if (!(frequency > 0.0)) throw std::invalid_argument("drive: frequency <= 0");
    if (kind == Kind::kTrapezoid) {
      if (!(rise_time > 0.0))
        throw std::invalid_argument("drive: trapezoid needs rise_time > 0");
      if (!(plateau_duration() > 0.0))
        throw std::invalid_argument("drive: trapezoid plateau is empty");
    }
  }

  double k_at(double t) const {
    if (amplitude == 0.0) return 0.0;
    if (kind == Kind::kSine)
      return amplitude * std::sin(2.0 * kPi * frequency * t + phase);
    const double p = period();
    const double u = t - std::floor(t / p) * p;
    const double plateau = plateau_duration();
    if (u < rise_time) return amplitude * (u / rise_time);
    if (u < rise_time + plateau) return amplitude;
    if (u < 2.0 * rise_time + plateau)
      return amplitude * (1.0 - (u - rise_time - plateau) / rise_time);
    return 0.0;
  }

  /// Start time of the acquisition window centered on the i-th plateau.
  double plateau_window_start(int i, double window) const {
    if (kind != Kind::kTrapezoid)
      throw std::logic_error("plateau_window_start: not a trapezoid drive");
    const double plateau = plateau_duration();
    if (window > plateau)
      throw std::invalid_argument("plateau window longer than the plateau");
    return static_cast<double>(i) * period() + rise_time +
           0.5 * (plateau - window);
  }
};

/// Everything needed to synthesize detector traces for both arms.
struct ExperimentSetup {
  BeamParams beam;
  WvConfig wv;
  StConfig st;
  DriveWaveform drive;
  DisturbanceSet disturbances;
  SplitDetector detector_wv;
  SplitDetector detector_st;
  double power_wv = 0.0;                 // W into the interferometer
  double power_st = 0.0;                 // W into the lens arm
  std::int64_t photons_per_sample = 0;   // fixed budget; 0 = derive from power
  std::uint64_t master_seed = 1;

  const SplitDetector& detector_for(Port port) const {
    return port == Port::kSt ? detector_st : detector_wv;
  }
  double power_for(Port port) const {
    return port == Port::kSt ? power_st : power_wv;
  }
  Technique technique(Port port) const {
    switch (port) {
      case Port::kDark: return Technique::wv_dark(wv, st);
      case Port::kBright: return Technique::wv_bright(wv, st);
      case Port::kSt: return Technique::standard(wv, st);
    }
    throw std::logic_error("unreachable");
  }
};

struct ChannelMask {
  bool wv_dark = true;
  bool wv_bright = false;
  bool st = true;
};

struct TimeseriesResult {
  double sample_time = 0.0;
  std::vector<double> wv_dark;
  std::vector<double> wv_bright;
  std::vector<double> st;
  std::vector<double> laser_jitter_rad;  // shared angular jitter realization

  const std::vector<double>& channel(Port port) const {
    switch (port) {
      case Port::kDark: return wv_dark;
      case Port::kBright: return wv_bright;
      case Port::kSt: return st;
    }
    throw std::logic_error("unreachable");
  }
};

namespace detail {

inline std::uint64_t channel_id(Port port) {
  switch (port) {
    case Port::kDark: return stream_channel::kWvDark;
    case Port::kBright: return stream_channel::kWvBright;
    case Port::kSt: return stream_channel::kSt;
  }
  throw std::logic_error("unreachable");
}

/// Photons injected during one sample: fixed budget, or the power-derived
/// mean with stochastic rounding so fractional budgets stay unbiased.
inline std::int64_t sample_photon_budget(const ExperimentSetup& setup,
                                         Port port, double sample_time,
                                         RngStream& stream) {
  if (setup.photons_per_sample > 0) return setup.photons_per_sample;
  const double power = setup.power_for(port);
  if (!(power > 0.0))
    throw std::invalid_argument(
        "run_timeseries: no photon budget (set photons_per_sample or power)");
  const double mean = power * sample_time / photon_energy(setup.beam.lambda);
  const double lo = std::floor(mean);
  const double frac = mean - lo;
  auto n = static_cast<std::int64_t>(lo);
  if (frac > 0.0 && stream.uniform() < frac) ++n;
  return n;
}

inline void synthesize_channel(const ExperimentSetup& setup, Port port,
                               double duration, double sample_time,
                               const std::vector<double>& jitter_rad,
                               unsigned threads, std::vector<double>& out) {
  const Technique tech = setup.technique(port);
  SplitDetector det = setup.detector_for(port);
  det.sample_time = sample_time;
  det.validate();
  const double port_fraction = tech.port_fraction();
  const double width = tech.effective_width(setup.beam, setup.disturbances);
  const double lever = tech.angular_lever(setup.beam);
  const auto n_samples =
      static_cast<std::size_t>(std::llround(duration / sample_time));
  if (n_samples == 0)
    throw std::invalid_argument("run_timeseries: zero samples requested");
  const std::uint64_t channel = channel_id(port);

  out.assign(n_samples, 0.0);
  parallel_for(n_samples, threads, [&](std::size_t i) {
    RngStream stream(setup.master_seed, channel, i);
    const double t = static_cast<double>(i) * sample_time;
    const SignalKick kick{setup.drive.k_at(t)};
    double mean = tech.signal_shift(setup.beam, kick) +
                  tech.modulation_shift(setup.beam, setup.disturbances, t);
    if (!jitter_rad.empty()) mean += lever * jitter_rad[i];

    std::int64_t injected = sample_photon_budget(setup, port, sample_time, stream);
    std::int64_t detected = injected;
    if (tech.is_wv() && injected > 0)
      detected = stream.binomial(injected, port_fraction);
    if (detected == 0 && det.sigma_J <= 0.0)
      throw std::domain_error(
          "run_timeseries: zero photons with a noise-free detector");
    out[i] = sample_split_voltage(detected, mean, width, det, stream);
  });
}

}  // namespace detail

/// Synthesizes voltage traces for the requested channels. Each sample owns
/// a derived RNG stream, so traces are byte-identical for any thread
/// count. The laser-jitter realization is drawn once and shared by every
/// channel (paired comparison).
inline TimeseriesResult run_timeseries(const ExperimentSetup& setup,
                                       const ChannelMask& channels,
                                       double duration, double sample_time,
                                       unsigned threads = 1) {
  if (!(sample_time > 0.0))
    throw std::invalid_argument("run_timeseries: sample_time <= 0");
  if (!(duration > 0.0))
    throw std::invalid_argument("run_timeseries: duration <= 0");
  setup.beam.validate();
  setup.drive.validate();
  setup.disturbances.validate();

  TimeseriesResult result;
  result.sample_time = sample_time;
  if (!setup.disturbances.laser_jitter.empty()) {
    RngStream jitter_stream(setup.master_seed, stream_channel::kLaserJitter, 0);
    result.laser_jitter_rad =
        laser_jitter_waveform(setup.disturbances.laser_jitter, duration,
                              1.0 / sample_time, jitter_stream);
  }
  if (channels.wv_dark)
    detail::synthesize_channel(setup, Port::kDark, duration, sample_time,
                               result.laser_jitter_rad, threads, result.wv_dark);
  if (channels.wv_bright)
    detail::synthesize_channel(setup, Port::kBright, duration, sample_time,
                               result.laser_jitter_rad, threads,
                               result.wv_bright);
  if (channels.st)
    detail::synthesize_channel(setup, Port::kSt, duration, sample_time,
                               result.laser_jitter_rad, threads, result.st);
  return result;
}

/// Per-frequency WVT vs ST comparison extracted from two spectra.
struct PeakRatioEntry {
  std::string label;
  double frequency = 0.0;   // Hz
  double dbv_wv = 0.0;
  double dbv_st = 0.0;
  double diff_dbv = 0.0;    // wv - st
  double linear_ratio = 0.0;
  bool resolvable_wv = true;
  bool resolvable_st = true;
};

struct NamedFrequency {
  std::string label;
  double frequency = 0.0;
};

/// Reads the named tone bins from both spectra and reports the WVT-ST
/// differences. A peak is flagged unresolvable when it clears its local
/// noise floor by less than `resolve_margin_db`.
inline std::vector<PeakRatioEntry> peak_ratio_table(
    const SpectrumResult& spec_wv, const SpectrumResult& spec_st,
    const std::vector<NamedFrequency>& freqs, double resolve_margin_db = 3.0) {
  std::vector<double> tones;
  tones.reserve(freqs.size());
  for (const auto& nf : freqs) tones.push_back(nf.frequency);

  std::vector<PeakRatioEntry> table;
  for (const auto& nf : freqs) {
    PeakRatioEntry e;
    e.label = nf.label;
    e.frequency = nf.frequency;
    e.dbv_wv = spec_wv.dbv_at(nf.frequency);
    e.dbv_st = spec_st.dbv_at(nf.frequency);
    e.diff_dbv = e.dbv_wv - e.dbv_st;
    e.linear_ratio = std::pow(10.0, e.diff_dbv / 20.0);
    const double margin = std::pow(10.0, resolve_margin_db / 20.0);
    const double floor_wv = noise_floor_magnitude(
        spec_wv, spec_wv.freqs.front(), spec_wv.freqs.back(), tones);
    const double floor_st = noise_floor_magnitude(
        spec_st, spec_st.freqs.front(), spec_st.freqs.back(), tones);
    e.resolvable_wv = spec_wv.magnitude_at(nf.frequency) > margin * floor_wv;
    e.resolvable_st = spec_st.magnitude_at(nf.frequency) > margin * floor_st;
    table.push_back(e);
  }
  return table;
}

struct SlopeFitResult {
  OriginFit fit;                  // R_wv vs R_st through the origin
  double predicted_slope = 0.0;   // closed form
  std::vector<double> r_st;
  std::vector<double> r_wv;
};

/// Closed-form R_wv vs R_st points over a modulation-amplitude sweep plus
/// the origin fit. The ratio of ratios is amplitude- and k-independent, so
/// the fitted slope must reproduce the predicted geometric factor.
inline SlopeFitResult slope_fit_ideal(const BeamParams& beam,
                                      const WvConfig& wv, const StConfig& st,
                                      const SignalKick& kick, Modulation mod,
                                      const std::vector<double>& amplitudes) {
  if (amplitudes.size() < 3)
    throw std::invalid_argument("slope_fit: need at least 3 amplitudes");
  SlopeFitResult result;
  for (double amp : amplitudes) {
    result.r_st.push_back(ratio_R_st(beam, st, kick, mod, amp));
    result.r_wv.push_back(ratio_R_wv(beam, wv, kick, mod, amp));
  }
  result.fit = fit_through_origin(result.r_st, result.r_wv);
  result.predicted_slope = ratio_R_advantage(beam, wv, st, mod);
  return result;
}

struct McSlopeParams {
  double duration = 0.5;   // s per amplitude point
  int n_averages = 2;
  double sample_time = 8e-6;
  double mod_frequency = 28.0;  // Hz
  unsigned threads = 1;
};

/// Full-pipeline version: for each modulation amplitude, synthesize both
/// arms, read the signal and modulation peaks from averaged spectra, and
/// fit the measured R_wv vs R_st line.
inline SlopeFitResult slope_fit_mc(ExperimentSetup setup, Modulation mod,
                                   const std::vector<double>& amplitudes,
                                   const McSlopeParams& params = {}) {
  if (amplitudes.size() < 3)
    throw std::invalid_argument("slope_fit: need at least 3 amplitudes");
  setup.drive.validate();
  if (setup.drive.amplitude <= 0.0)
    throw std::invalid_argument("slope_fit_mc: drive amplitude must be > 0");

  SlopeFitResult result;
  const double f_sig = setup.drive.frequency;
  for (std::size_t i = 0; i < amplitudes.size(); ++i) {
    ExperimentSetup point = setup;
    point.master_seed = setup.master_seed + i;
    if (mod == Modulation::kDetector) {
      point.disturbances.d_mod.amplitude = amplitudes[i];
      point.disturbances.d_mod.frequency = params.mod_frequency;
      point.disturbances.q_mod.amplitude = 0.0;
    } else {
      point.disturbances.q_mod.amplitude = amplitudes[i];
      point.disturbances.q_mod.frequency = params.mod_frequency;
      point.disturbances.d_mod.amplitude = 0.0;
    }
    const auto traces =
        run_timeseries(point, ChannelMask{true, false, true}, params.duration,
                       params.sample_time, params.threads);
    const double fs = 1.0 / params.sample_time;
    const auto spec_wv = averaged_spectrum(traces.wv_dark, params.n_averages,
                                           point.detector_wv.v_total, fs);
    const auto spec_st = averaged_spectrum(traces.st, params.n_averages,
                                           point.detector_st.v_total, fs);
    result.r_wv.push_back(spec_wv.magnitude_at(f_sig) /
                          spec_wv.magnitude_at(params.mod_frequency));
    result.r_st.push_back(spec_st.magnitude_at(f_sig) /
                          spec_st.magnitude_at(params.mod_frequency));
  }
  result.fit = fit_through_origin(result.r_st, result.r_wv);
  result.predicted_slope =
      ratio_R_advantage(setup.beam, setup.wv, setup.st, mod);
  return result;
}

struct DeviationPoint {
  double xi_rms = 0.0;        // modulation rms in the arm's k units, 1/m
  double amplitude = 0.0;     // physical modulation amplitude (m or 1/m)
  double ratio_closed = 0.0;  // Delta k_B / Delta k, closed form
  double ratio_mc = 0.0;      // Monte Carlo mean over windows
  double ratio_mc_se = 0.0;   // empirical standard error of the mean
  double ratio_se_theory = 0.0;  // sampling error from chi^2 theory
  double delta_k_bound = 0.0; // 1/m
};

struct DeviationProtocol {
  double window = 4e-3;        // s, acquisition window on the plateau
  int n_windows = 6;           // plateaus to average
  double mod_frequency = 250.0;  // Hz
  unsigned threads = 1;
};

/// Plateau-protocol deviation sweep for one arm: trapezoid drive, sliding
/// single-tone modulation amplitude, Delta k measured over bin-exact
/// windows and compared with Delta k_B / sqrt(1 + xi_rms^2 / Delta k_B^2).
inline std::vector<DeviationPoint> deviation_curve(
    ExperimentSetup setup, Port port, Modulation mod,
    const std::vector<double>& amplitudes, const DeviationProtocol& proto = {}) {
  if (setup.drive.kind != DriveWaveform::Kind::kTrapezoid)
    throw std::invalid_argument("deviation_curve: needs a trapezoid drive");
  setup.drive.validate();
  const Technique tech = setup.technique(port);
  const double sample_time = setup.detector_for(port).sample_time;
  const auto samples_per_window =
      static_cast<std::size_t>(std::llround(proto.window / sample_time));

  // Per-sample photon budget for the bound.
  double photons = static_cast<double>(setup.photons_per_sample);
  if (photons <= 0.0)
    photons = setup.power_for(port) * sample_time /
              photon_energy(setup.beam.lambda);

  std::vector<DeviationPoint> points;
  for (std::size_t a = 0; a < amplitudes.size(); ++a) {
    ExperimentSetup point = setup;
    point.master_seed = setup.master_seed + 1000 * (a + 1);
    Sinusoid& target = mod == Modulation::kDetector ? point.disturbances.d_mod
                                                    : point.disturbances.q_mod;
    Sinusoid& other = mod == Modulation::kDetector ? point.disturbances.q_mod
                                                   : point.disturbances.d_mod;
    target.amplitude = amplitudes[a];
    target.frequency = proto.mod_frequency;
    other.amplitude = 0.0;

    const double duration =
        setup.drive.period() * static_cast<double>(proto.n_windows);
    ChannelMask mask{port == Port::kDark, port == Port::kBright,
                     port == Port::kSt};
    const auto traces =
        run_timeseries(point, mask, duration, sample_time, proto.threads);
    const auto& trace = traces.channel(port);

    SplitDetector det = point.detector_for(port);
    det.sample_time = sample_time;

    std::vector<double> ratios;
    DeviationPoint dp;
    for (int w = 0; w < proto.n_windows; ++w) {
      const double t0 = setup.drive.plateau_window_start(w, proto.window);
      const auto i0 = static_cast<std::size_t>(std::llround(t0 / sample_time));
      if (i0 + samples_per_window > trace.size()) break;
      std::vector<double> window_samples(
          trace.begin() + i0, trace.begin() + i0 + samples_per_window);
      const auto report =
          estimate_k_split(window_samples, det, setup.beam, tech, photons);
      dp.delta_k_bound = report.delta_k_bound;
      ratios.push_back(report.delta_k_bound / report.delta_k);
    }
    const auto stats = sample_stats(ratios);
    dp.amplitude = amplitudes[a];
    // Modulation displacement amplitude at the detector, in k units.
    const double lever = tech.is_wv() ? setup.wv.L : setup.st.f;
    const double dx_amp = mod == Modulation::kDetector
                              ? amplitudes[a]
                              : lever * amplitudes[a] / setup.beam.k0();
    dp.xi_rms = dx_amp / (std::sqrt(2.0) *
                          std::abs(tech.inversion_factor(setup.beam)));
    dp.ratio_closed =
        1.0 / std::sqrt(1.0 + dp.xi_rms * dp.xi_rms /
                                  (dp.delta_k_bound * dp.delta_k_bound));
    dp.ratio_mc = stats.mean;
    dp.ratio_mc_se = stats.n > 1 ? stats.stddev() / std::sqrt(static_cast<double>(stats.n))
                                 : 0.0;
    // Sampling deviation of a window's measured rms for Gaussian noise of
    // deviation B plus a deterministic tone of rms xi:
    // var(s^2) = (2 B^4 + 4 B^2 xi^2) / M.
    const double r = dp.xi_rms * dp.xi_rms /
                     (dp.delta_k_bound * dp.delta_k_bound);
    const double m_samples = static_cast<double>(samples_per_window);
    const double rel_std_window =
        std::sqrt((2.0 + 4.0 * r) / m_samples) / (2.0 * (1.0 + r));
    dp.ratio_se_theory = dp.ratio_closed * rel_std_window /
                         std::sqrt(static_cast<double>(std::max<std::size_t>(
                             ratios.size(), 1)));
    points.push_back(dp);
  }
  return points;
}

struct JitterSpectrumParams {
  double sample_time = 1.0 / 2048.0;  // s
  std::size_t segment_samples = 1024;
  int n_averages = 128;
  unsigned threads = 1;
};

struct JitterTimeDomainParams {
  double sample_time = 4e-3;  // s
  std::size_t n_samples = 2000;
  unsigned threads = 1;
};

struct JitterComparison {
  SpectrumResult spec_wv;
  SpectrumResult spec_st;
  double floor_dbv_wv = 0.0;  // configured electronic floor, analytic
  double floor_dbv_st = 0.0;
  std::vector<PeakRatioEntry> tone_table;
  std::vector<double> tone_margin_wv_db;  // peak minus own electronic floor
  std::vector<double> tone_margin_st_db;
  double relative_error_wv = 0.0;  // Delta k / Delta k_B, time domain
  double relative_error_st = 0.0;
  double suppression = 0.0;        // relative_error_st / relative_error_wv
};

/// Expected averaged-magnitude floor of white per-sample noise of
/// deviation sigma_n: E|bin| = sqrt(pi N / 4) sigma_n scaled by 2/N.
inline double white_noise_floor_magnitude(double sigma_n, std::size_t segment) {
  return std::sqrt(kPi) * sigma_n / std::sqrt(static_cast<double>(segment));
}

/// Laser-jitter comparison: averaged spectra for both arms against their
/// configured electronic floors, plus time-domain relative errors
/// Delta k / Delta k_B and the WVT suppression factor.
inline JitterComparison jitter_comparison(const ExperimentSetup& setup,
                                          const JitterSpectrumParams& sp = {},
                                          const JitterTimeDomainParams& tp = {}) {
  if (setup.disturbances.laser_jitter.empty() &&
      setup.disturbances.q_mod.amplitude == 0.0)
    throw std::invalid_argument("jitter_comparison: no jitter configured");

  JitterComparison out;
  const double duration = sp.sample_time *
                          static_cast<double>(sp.segment_samples) *
                          static_cast<double>(sp.n_averages);
  const auto traces = run_timeseries(setup, ChannelMask{true, false, true},
                                     duration, sp.sample_time, sp.threads);
  const double fs = 1.0 / sp.sample_time;
  out.spec_wv = averaged_spectrum(traces.wv_dark, sp.n_averages,
                                  setup.detector_wv.v_total, fs);
  out.spec_st = averaged_spectrum(traces.st, sp.n_averages,
                                  setup.detector_st.v_total, fs);

  auto electronic_floor_db = [&](const SplitDetector& det) {
    const double sigma_n = det.sigma_J / std::sqrt(sp.sample_time);
    const double mag = white_noise_floor_magnitude(sigma_n, sp.segment_samples);
    return 20.0 * std::log10(mag / det.v_total);
  };
  out.floor_dbv_wv = electronic_floor_db(setup.detector_wv);
  out.floor_dbv_st = electronic_floor_db(setup.detector_st);

  std::vector<NamedFrequency> tones;
  for (const auto& tone : setup.disturbances.laser_jitter.tones)
    tones.push_back({"jitter@" + std::to_string(tone.frequency) + "Hz",
                     tone.frequency});
  out.tone_table = peak_ratio_table(out.spec_wv, out.spec_st, tones);
  for (const auto& entry : out.tone_table) {
    out.tone_margin_wv_db.push_back(entry.dbv_wv - out.floor_dbv_wv);
    out.tone_margin_st_db.push_back(entry.dbv_st - out.floor_dbv_st);
  }

  // Time domain: no drive, jitter + electronic noise only.
  ExperimentSetup td = setup;
  td.drive.amplitude = 0.0;
  td.master_seed = setup.master_seed + 7;
  const double td_duration =
      tp.sample_time * static_cast<double>(tp.n_samples);
  const auto td_traces = run_timeseries(td, ChannelMask{true, false, true},
                                        td_duration, tp.sample_time,
                                        tp.threads);

  auto relative_error = [&](Port port, const std::vector<double>& trace) {
    const Technique tech = td.technique(port);
    SplitDetector det = td.detector_for(port);
    det.sample_time = tp.sample_time;
    double photons = static_cast<double>(td.photons_per_sample);
    if (photons <= 0.0)
      photons = td.power_for(port) * tp.sample_time /
                photon_energy(td.beam.lambda);
    const auto report =
        estimate_k_split(trace, det, td.beam, tech, photons);
    return report.delta_k / report.delta_k_bound;
  };
  out.relative_error_wv = relative_error(Port::kDark, td_traces.wv_dark);
  out.relative_error_st = relative_error(Port::kSt, td_traces.st);
  out.suppression = out.relative_error_st / out.relative_error_wv;
  return out;
}

}  // namespace deflectlab
