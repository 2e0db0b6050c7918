#pragma once

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "deflectlab/scenario.hpp"

namespace deflectlab {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr int kSchemaVersion = 1;

namespace io {

inline std::string fmt_num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

inline std::string csv_escape(const std::string& cell) {
  if (cell.find_first_of(",\"\r\n") == std::string::npos) return cell;
  std::string quoted = "\"";
  for (char c : cell) {
    if (c == '"') quoted += '"';
    quoted += c;
  }
  quoted += '"';
  return quoted;
}

/// RFC-4180 CSV: header row, CRLF line endings, '.' decimal separator.
inline void write_csv(const std::string& path,
                      const std::vector<std::string>& header,
                      const std::vector<std::vector<std::string>>& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  auto write_row = [&](const std::vector<std::string>& row) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out << ',';
      out << csv_escape(row[i]);
    }
    out << "\r\n";
  };
  write_row(header);
  for (const auto& row : rows) write_row(row);
}

}  // namespace io

/// Everything one command execution produced: output files plus the
/// summary metrics that also land in summary.json.
struct ResultBundle {
  std::string scenario_name;
  std::uint64_t seed = 0;
  std::vector<std::string> outputs;
  json metrics;
  std::vector<std::string> warnings;

  json to_json() const {
    json j;
    j["schema_version"] = kSchemaVersion;
    j["software_version"] = kVersion;
    j["scenario"] = scenario_name;
    j["seed"] = seed;
    j["outputs"] = outputs;
    j["metrics"] = metrics;
    j["warnings"] = warnings;
    return j;
  }
};

struct CommandOptions {
  std::string out_dir = ".";
  unsigned threads = 1;
  bool strict = false;
};

namespace detail {

inline std::string out_path(const CommandOptions& opts,
                            const std::string& file) {
  std::filesystem::create_directories(opts.out_dir);
  return (std::filesystem::path(opts.out_dir) / file).string();
}

inline void finalize(ResultBundle& bundle, const CommandOptions& opts,
                     const std::string& summary_name) {
  const std::string path = out_path(opts, summary_name);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  bundle.outputs.push_back(path);
  out << bundle.to_json().dump(2) << "\n";
}

inline void check_weakness(const Scenario& s, ResultBundle& bundle) {
  const auto w =
      weak_validity(s.beam, s.wv, SignalKick{s.drive.amplitude});
  if (!w.valid)
    bundle.warnings.push_back(
        "weak-interaction parameter k^2 sigma^2 cot^2(phi/2) = " +
        io::fmt_num(w.value) + " exceeds 0.1");
}

inline std::vector<double> log_spaced(double lo, double hi, std::size_t n) {
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i)
    v[i] = lo * std::pow(hi / lo, static_cast<double>(i) /
                                      static_cast<double>(n - 1));
  return v;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// fisher: dark/bright information fractions vs post-selection angle
// ---------------------------------------------------------------------------

struct FisherPoint {
  double phi = 0.0;
  double frac_dark_analytic = 0.0;
  double frac_bright_analytic = 0.0;
  double frac_dark_snr = 0.0;
  double frac_bright_snr = 0.0;
  double snr_dark = 0.0;
  double snr_bright = 0.0;
};

/// Simulated SNR-based Fisher fractions at one post-selection angle:
/// synthesize both ports, read tone SNRs from averaged spectra, convert via
/// the SNR-squared share.
inline FisherPoint fisher_point(const Scenario& scenario, double phi,
                                unsigned threads) {
  Scenario s = scenario;
  s.wv.phi = phi;
  const auto analytic = fisher_analytic(
      BeamParams{s.beam.sigma, s.beam.lambda, 1.0, s.beam.power}, s.wv);

  FisherPoint p;
  p.phi = phi;
  p.frac_dark_analytic = analytic.info_dark / analytic.info_st;
  p.frac_bright_analytic = analytic.info_bright / analytic.info_st;

  const auto setup = s.setup();
  const auto traces =
      run_timeseries(setup, ChannelMask{true, true, false}, s.run.duration,
                     s.run.sample_time, threads);
  const double fs = 1.0 / s.run.sample_time;

  // Tone amplitude from the phase-coherent average (low variance), noise
  // scale from the mean magnitude-averaged floor over a wide tone-free
  // band (the port traces carry a single tone, so the mean is safe and
  // beats the median on variance).
  auto port_snr = [&](const std::vector<double>& trace) {
    const auto incoh = averaged_spectrum(trace, s.run.n_averages,
                                         setup.detector_wv.v_total, fs);
    const auto coh = coherent_spectrum(trace, s.run.n_averages,
                                       setup.detector_wv.v_total, fs);
    const double f = s.drive.frequency;
    auto band_mean = [&](const SpectrumResult& spec) {
      double sum = 0.0;
      std::size_t count = 0;
      for (std::size_t m = 1; m < spec.freqs.size(); ++m) {
        if (std::abs(spec.freqs[m] - f) <= 2.0 * spec.bin_width) continue;
        sum += spec.magnitude[m];
        ++count;
      }
      return sum / static_cast<double>(count);
    };
    const double peak = coh.magnitude_at(f);
    const double floor_coh = band_mean(coh);
    const double floor = band_mean(incoh);
    const double amp2 = std::max(peak * peak - floor_coh * floor_coh, 0.0);
    return std::sqrt(amp2) / floor;
  };
  p.snr_dark = port_snr(traces.wv_dark);
  p.snr_bright = port_snr(traces.wv_bright);
  const auto frac = fisher_fraction_from_snr(p.snr_dark, p.snr_bright);
  p.frac_dark_snr = frac.first;
  p.frac_bright_snr = frac.second;
  return p;
}

inline ResultBundle cmd_fisher(const Scenario& scenario,
                               const std::vector<double>& phi_sweep,
                               const CommandOptions& opts) {
  scenario.validate();
  if (phi_sweep.empty()) throw std::invalid_argument("cmd_fisher: empty sweep");
  ResultBundle bundle;
  bundle.scenario_name = scenario.name;
  bundle.seed = scenario.run.master_seed;
  detail::check_weakness(scenario, bundle);

  std::vector<FisherPoint> points(phi_sweep.size());
  // One scenario per angle; parallelism lives inside each synthesis call.
  for (std::size_t i = 0; i < phi_sweep.size(); ++i) {
    Scenario s = scenario;
    s.run.master_seed = scenario.run.master_seed + 17 * (i + 1);
    points[i] = fisher_point(s, phi_sweep[i], opts.threads);
  }

  std::vector<std::vector<std::string>> rows;
  std::vector<double> measured, model;
  for (const auto& p : points) {
    rows.push_back({io::fmt_num(p.phi), io::fmt_num(p.frac_dark_analytic),
                    io::fmt_num(p.frac_bright_analytic),
                    io::fmt_num(p.frac_dark_snr),
                    io::fmt_num(p.frac_bright_snr), io::fmt_num(p.snr_dark),
                    io::fmt_num(p.snr_bright)});
    measured.push_back(p.frac_dark_snr);
    model.push_back(p.frac_dark_analytic);
  }
  const std::string csv = detail::out_path(opts, "fisher_fractions.csv");
  io::write_csv(csv,
                {"phi_rad", "frac_dark_analytic", "frac_bright_analytic",
                 "frac_dark_snr", "frac_bright_snr", "snr_dark", "snr_bright"},
                rows);
  bundle.outputs.push_back(csv);

  bundle.metrics["r_squared_dark_vs_cos2"] =
      points.size() >= 3 ? r_squared_against(measured, model) : 1.0;
  bundle.metrics["n_points"] = points.size();
  bundle.metrics["frac_dark_snr_first"] = points.front().frac_dark_snr;
  bundle.metrics["frac_dark_analytic_first"] = points.front().frac_dark_analytic;
  detail::finalize(bundle, opts, "fisher_summary.json");
  return bundle;
}

// ---------------------------------------------------------------------------
// spectrum: averaged dBV spectra plus peak comparison table
// ---------------------------------------------------------------------------

inline ResultBundle cmd_spectrum(const Scenario& scenario,
                                 const CommandOptions& opts) {
  scenario.validate();
  ResultBundle bundle;
  bundle.scenario_name = scenario.name;
  bundle.seed = scenario.run.master_seed;
  detail::check_weakness(scenario, bundle);

  const auto setup = scenario.setup();
  const bool jitter_scenario = !scenario.disturbances.laser_jitter.empty();

  SpectrumResult spec_wv, spec_st;
  json jitter_metrics;
  if (jitter_scenario) {
    JitterSpectrumParams sp;
    sp.sample_time = std::min(scenario.run.sample_time, 1.0 / 2048.0);
    sp.n_averages = scenario.run.n_averages;
    sp.threads = opts.threads;
    JitterTimeDomainParams tp;
    tp.sample_time = scenario.run.sample_time;
    tp.n_samples = static_cast<std::size_t>(
        std::llround(scenario.run.duration / scenario.run.sample_time));
    tp.threads = opts.threads;
    const auto cmp = jitter_comparison(setup, sp, tp);
    spec_wv = cmp.spec_wv;
    spec_st = cmp.spec_st;
    jitter_metrics["floor_dbv_wv"] = cmp.floor_dbv_wv;
    jitter_metrics["floor_dbv_st"] = cmp.floor_dbv_st;
    jitter_metrics["relative_error_wv"] = cmp.relative_error_wv;
    jitter_metrics["relative_error_st"] = cmp.relative_error_st;
    jitter_metrics["suppression"] = cmp.suppression;
    json tones = json::array();
    for (std::size_t i = 0; i < cmp.tone_table.size(); ++i) {
      const auto& e = cmp.tone_table[i];
      tones.push_back({{"frequency", e.frequency},
                       {"dbv_wv", e.dbv_wv},
                       {"dbv_st", e.dbv_st},
                       {"margin_wv_db", cmp.tone_margin_wv_db[i]},
                       {"margin_st_db", cmp.tone_margin_st_db[i]}});
    }
    jitter_metrics["tones"] = tones;
  } else {
    const auto traces =
        run_timeseries(setup, ChannelMask{true, false, true},
                       scenario.run.duration, scenario.run.sample_time,
                       opts.threads);
    const double fs = 1.0 / scenario.run.sample_time;
    spec_wv = averaged_spectrum(traces.wv_dark, scenario.run.n_averages,
                                setup.detector_wv.v_total, fs);
    spec_st = averaged_spectrum(traces.st, scenario.run.n_averages,
                                setup.detector_st.v_total, fs);
  }

  std::vector<std::vector<std::string>> rows;
  const double db_floor_clamp = -400.0;  // keep CSV finite
  for (std::size_t m = 0; m < spec_wv.freqs.size(); ++m) {
    const double wv_db = std::isfinite(spec_wv.dbv[m]) ? spec_wv.dbv[m] : db_floor_clamp;
    const double st_db = std::isfinite(spec_st.dbv[m]) ? spec_st.dbv[m] : db_floor_clamp;
    rows.push_back({io::fmt_num(spec_wv.freqs[m]), io::fmt_num(wv_db),
                    io::fmt_num(st_db)});
  }
  const std::string csv = detail::out_path(opts, "spectra.csv");
  io::write_csv(csv, {"freq_hz", "dbv_wv", "dbv_st"}, rows);
  bundle.outputs.push_back(csv);

  std::vector<NamedFrequency> tones;
  if (scenario.drive.amplitude > 0.0 &&
      scenario.drive.kind == DriveWaveform::Kind::kSine)
    tones.push_back({"signal", scenario.drive.frequency});
  if (scenario.disturbances.d_mod.amplitude > 0.0)
    tones.push_back({"detector_modulation", scenario.disturbances.d_mod.frequency});
  if (scenario.disturbances.q_mod.amplitude > 0.0)
    tones.push_back({"momentum_modulation", scenario.disturbances.q_mod.frequency});

  json table = json::array();
  for (const auto& e : peak_ratio_table(spec_wv, spec_st, tones)) {
    table.push_back({{"label", e.label},
                     {"frequency", e.frequency},
                     {"dbv_wv", e.dbv_wv},
                     {"dbv_st", e.dbv_st},
                     {"diff_dbv", e.diff_dbv},
                     {"linear_ratio", e.linear_ratio},
                     {"resolvable_wv", e.resolvable_wv},
                     {"resolvable_st", e.resolvable_st}});
  }
  bundle.metrics["peaks"] = table;
  bundle.metrics["parseval_rel_error_wv"] = spec_wv.parseval_rel_error;
  bundle.metrics["parseval_rel_error_st"] = spec_st.parseval_rel_error;
  if (!jitter_metrics.is_null()) bundle.metrics["jitter"] = jitter_metrics;
  detail::finalize(bundle, opts, "spectrum_summary.json");
  return bundle;
}

// ---------------------------------------------------------------------------
// sweep: slope fits (geometry), deviation curves (modulation), or the
// geometric-factor surface
// ---------------------------------------------------------------------------

enum class SweepAxis { kModulation, kGeometry, kSurface };

inline SweepAxis sweep_axis_from_string(const std::string& axis) {
  if (axis == "modulation") return SweepAxis::kModulation;
  if (axis == "geometry") return SweepAxis::kGeometry;
  if (axis == "surface") return SweepAxis::kSurface;
  throw std::invalid_argument("unknown sweep axis: " + axis +
                              " (expected modulation|geometry|surface)");
}

inline ResultBundle cmd_sweep(const Scenario& scenario, SweepAxis axis,
                              const CommandOptions& opts) {
  scenario.validate();
  ResultBundle bundle;
  bundle.scenario_name = scenario.name;
  bundle.seed = scenario.run.master_seed;
  detail::check_weakness(scenario, bundle);
  const auto setup = scenario.setup();
  const double k0 = scenario.beam.k0();

  if (axis == SweepAxis::kSurface) {
    const auto surf = geometric_factor_surface(
        scenario.wv.phi, scenario.beam.lambda, AxisRange{250e-6, 2e-3, 36},
        AxisRange{0.025, 1.0, 40});
    std::vector<std::vector<std::string>> rows;
    for (std::size_t i = 0; i < surf.sigma.size(); ++i)
      for (std::size_t j = 0; j < surf.fprime.size(); ++j)
        rows.push_back({io::fmt_num(surf.sigma[i]), io::fmt_num(surf.fprime[j]),
                        io::fmt_num(surf.at(i, j))});
    const std::string csv = detail::out_path(opts, "geometric_factor.csv");
    io::write_csv(csv, {"sigma_m", "fprime_m", "factor"}, rows);
    bundle.outputs.push_back(csv);
    bundle.metrics["max_factor"] = surf.max_factor;
    detail::finalize(bundle, opts, "sweep_summary.json");
    return bundle;
  }

  if (axis == SweepAxis::kGeometry) {
    const SignalKick kick{scenario.drive.amplitude};
    McSlopeParams params;
    params.duration = scenario.run.duration;
    params.n_averages = scenario.run.n_averages;
    params.sample_time = scenario.run.sample_time;
    params.threads = opts.threads;

    std::vector<std::vector<std::string>> rows;
    for (const Modulation mod : {Modulation::kDetector, Modulation::kMomentum}) {
      const bool detector_axis = mod == Modulation::kDetector;
      const auto amplitudes =
          detector_axis ? detail::log_spaced(10e-9, 115e-9, 12)
                        : detail::log_spaced(k0 * 0.05e-6, k0 * 1.25e-6, 12);
      const auto ideal = slope_fit_ideal(scenario.beam, scenario.wv,
                                         scenario.st, kick, mod, amplitudes);
      const auto mc = slope_fit_mc(setup, mod, amplitudes, params);
      const std::string label = detector_axis ? "detector" : "momentum";
      for (std::size_t i = 0; i < amplitudes.size(); ++i) {
        rows.push_back({label, io::fmt_num(amplitudes[i]),
                        io::fmt_num(ideal.r_st[i]), io::fmt_num(ideal.r_wv[i]),
                        io::fmt_num(mc.r_st[i]), io::fmt_num(mc.r_wv[i])});
      }
      bundle.metrics["slope_" + label] = {
          {"predicted", ideal.predicted_slope},
          {"ideal_fit", ideal.fit.slope},
          {"ideal_r2", ideal.fit.r_squared},
          {"mc_fit", mc.fit.slope},
          {"mc_r2", mc.fit.r_squared}};
    }
    const std::string csv = detail::out_path(opts, "slope_fit.csv");
    io::write_csv(csv,
                  {"axis", "amplitude", "r_st_ideal", "r_wv_ideal", "r_st_mc",
                   "r_wv_mc"},
                  rows);
    bundle.outputs.push_back(csv);
    detail::finalize(bundle, opts, "sweep_summary.json");
    return bundle;
  }

  // Modulation axis: deviation curves for whichever modulation the
  // scenario configures (fig4d = detector, fig4q = momentum).
  const bool detector_axis = scenario.disturbances.q_mod.frequency == 0.0 ||
                             scenario.disturbances.d_mod.frequency > 0.0;
  const Modulation mod =
      detector_axis ? Modulation::kDetector : Modulation::kMomentum;
  const auto amplitudes = detector_axis
                              ? detail::log_spaced(115e-9 / 50.0, 115e-9, 12)
                              : detail::log_spaced(k0 * 1.25e-6 / 50.0,
                                                   k0 * 1.25e-6, 12);
  DeviationProtocol proto;
  proto.n_windows = 16;
  proto.threads = opts.threads;
  const auto curve_wv =
      deviation_curve(setup, Port::kDark, mod, amplitudes, proto);
  const auto curve_st = deviation_curve(setup, Port::kSt, mod, amplitudes, proto);

  std::vector<std::vector<std::string>> rows;
  double max_adv_mc = 0.0, max_adv_closed = 0.0;
  auto push_point = [&rows](const char* label, const DeviationPoint& p) {
    rows.push_back({label, io::fmt_num(p.amplitude), io::fmt_num(p.xi_rms),
                    io::fmt_num(p.ratio_closed), io::fmt_num(p.ratio_mc),
                    io::fmt_num(p.ratio_mc_se), io::fmt_num(p.ratio_se_theory),
                    io::fmt_num(p.delta_k_bound)});
  };
  for (std::size_t i = 0; i < amplitudes.size(); ++i) {
    push_point("wv", curve_wv[i]);
    push_point("st", curve_st[i]);
    max_adv_mc = std::max(max_adv_mc,
                          curve_wv[i].ratio_mc / curve_st[i].ratio_mc);
    max_adv_closed = std::max(
        max_adv_closed, curve_wv[i].ratio_closed / curve_st[i].ratio_closed);
  }
  const std::string csv = detail::out_path(opts, "deviation_curve.csv");
  io::write_csv(csv,
                {"technique", "amplitude", "xi_rms_k", "ratio_closed",
                 "ratio_mc", "ratio_mc_se", "ratio_se_theory", "delta_k_bound"},
                rows);
  bundle.outputs.push_back(csv);
  bundle.metrics["axis"] = detector_axis ? "detector" : "momentum";
  bundle.metrics["max_advantage_mc"] = max_adv_mc;
  bundle.metrics["max_advantage_closed"] = max_adv_closed;
  detail::finalize(bundle, opts, "sweep_summary.json");
  return bundle;
}

// ---------------------------------------------------------------------------
// estimate: plateau-protocol estimation reports
// ---------------------------------------------------------------------------

inline ResultBundle cmd_estimate(const Scenario& scenario, int repetitions,
                                 const CommandOptions& opts) {
  scenario.validate();
  if (repetitions < 1) throw std::invalid_argument("cmd_estimate: repetitions < 1");
  if (scenario.drive.kind != DriveWaveform::Kind::kTrapezoid)
    throw std::invalid_argument(
        "cmd_estimate: plateau protocol requires a trapezoid drive");
  ResultBundle bundle;
  bundle.scenario_name = scenario.name;
  bundle.seed = scenario.run.master_seed;
  detail::check_weakness(scenario, bundle);

  ExperimentSetup setup = scenario.setup();
  const double window = 4e-3;
  const double sample_time = scenario.run.sample_time;
  const double duration =
      scenario.drive.period() * static_cast<double>(repetitions);
  const auto traces = run_timeseries(setup, ChannelMask{true, false, true},
                                     duration, sample_time, opts.threads);

  json reports = json::array();
  const auto samples_per_window =
      static_cast<std::size_t>(std::llround(window / sample_time));
  for (const Port port : {Port::kDark, Port::kSt}) {
    const Technique tech = setup.technique(port);
    SplitDetector det = setup.detector_for(port);
    det.sample_time = sample_time;
    double photons = static_cast<double>(setup.photons_per_sample);
    if (photons <= 0.0)
      photons = setup.power_for(port) * sample_time /
                photon_energy(setup.beam.lambda);
    const auto& trace = traces.channel(port);

    std::vector<double> k_hats, efficiencies;
    for (int w = 0; w < repetitions; ++w) {
      const double t0 = scenario.drive.plateau_window_start(w, window);
      const auto i0 = static_cast<std::size_t>(std::llround(t0 / sample_time));
      if (i0 + samples_per_window > trace.size()) break;
      std::vector<double> window_samples(
          trace.begin() + i0, trace.begin() + i0 + samples_per_window);
      const auto r =
          estimate_k_split(window_samples, det, scenario.beam, tech, photons);
      k_hats.push_back(r.k_hat);
      efficiencies.push_back(r.efficiency);
      reports.push_back({{"port", port_name(port)},
                         {"window", w},
                         {"k_hat", r.k_hat},
                         {"delta_k", r.delta_k},
                         {"delta_k_bound", r.delta_k_bound},
                         {"efficiency", r.efficiency},
                         {"n_used", r.n_used},
                         {"n_saturated", r.n_saturated}});
    }
    const auto k_stats = sample_stats(k_hats);
    const auto e_stats = sample_stats(efficiencies);
    bundle.metrics[std::string("aggregate_") + port_name(port)] = {
        {"k_hat_mean", k_stats.mean},
        {"k_hat_std", k_stats.stddev()},
        {"efficiency_mean", e_stats.mean},
        {"k_true", scenario.drive.amplitude},
        {"windows", k_hats.size()}};
  }
  bundle.metrics["reports"] = reports;

  const std::string path = detail::out_path(opts, "estimates.json");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << reports.dump(2) << "\n";
  bundle.outputs.push_back(path);
  detail::finalize(bundle, opts, "estimate_summary.json");
  return bundle;
}

}  // namespace deflectlab
