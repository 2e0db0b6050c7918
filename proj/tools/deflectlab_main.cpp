// deflectlab: photon-level simulator for weak-value vs standard
// beam-deflection measurements.
//
// Exit codes: 0 success, 2 configuration error, 3 numerical-regime warning
// escalated by --strict, 1 other failures.

#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "deflectlab/deflectlab.hpp"

namespace {

struct CliArgs {
  std::string scenario = "fig2";
  std::uint64_t seed = 0;
  bool seed_given = false;
  std::string out = "out";
  unsigned threads = 1;
  bool strict = false;
};

void add_common(CLI::App* cmd, CliArgs& args) {
  cmd->add_option("--scenario", args.scenario,
                  "Preset name (fig2..fig7, silent, crb) or scenario JSON file");
  cmd->add_option("--seed", args.seed, "Master seed override")
      ->each([&args](const std::string&) { args.seed_given = true; });
  cmd->add_option("--out", args.out, "Output directory");
  cmd->add_option("--threads", args.threads, "Worker threads (0 = hardware)");
  cmd->add_flag("--strict", args.strict,
                "Escalate numerical-regime warnings to exit code 3");
}

deflectlab::Scenario resolve(const CliArgs& args) {
  deflectlab::Scenario s = deflectlab::resolve_scenario(args.scenario);
  if (args.seed_given) {
    s.run.master_seed = args.seed;
    s.run.seed_set = true;
  }
  return s;
}

int report(const deflectlab::ResultBundle& bundle, bool strict) {
  for (const auto& w : bundle.warnings)
    std::cerr << "warning: " << w << "\n";
  for (const auto& path : bundle.outputs)
    std::cout << "wrote " << path << "\n";
  if (strict && !bundle.warnings.empty()) return 3;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Beam-deflection metrology simulator (weak-value vs standard technique)"};
  app.require_subcommand(1);

  CliArgs args;
  deflectlab::CommandOptions opts;

  auto* fisher = app.add_subcommand(
      "fisher", "Dark/bright Fisher-information fractions vs phi");
  double phi_min = 0.22, phi_max = 0.9;
  std::size_t phi_points = 15;
  fisher->add_option("--phi-min", phi_min, "Sweep start (rad)");
  fisher->add_option("--phi-max", phi_max, "Sweep end (rad)");
  fisher->add_option("--phi-points", phi_points, "Sweep length (1 = single angle)");
  add_common(fisher, args);

  auto* spectrum = app.add_subcommand(
      "spectrum", "Averaged dBV spectra and peak comparison table");
  add_common(spectrum, args);

  auto* sweep = app.add_subcommand(
      "sweep", "Slope fits, deviation curves, or the geometric surface");
  std::string axis;
  sweep->add_option("--axis", axis,
                    "modulation | geometry | surface (default by preset)");
  add_common(sweep, args);

  auto* estimate =
      app.add_subcommand("estimate", "Plateau-protocol estimation reports");
  int repetitions = 5;
  estimate->add_option("--repetitions", repetitions, "Plateau windows");
  add_common(estimate, args);

  auto* preset_cmd =
      app.add_subcommand("preset", "Write a preset scenario file");
  std::string preset_out = "scenario.json";
  preset_cmd->add_option("--file", preset_out, "Destination path");
  add_common(preset_cmd, args);

  CLI11_PARSE(app, argc, argv);

  opts.out_dir = args.out;
  opts.threads = args.threads;
  opts.strict = args.strict;

  try {
    if (preset_cmd->parsed()) {
      deflectlab::save_scenario_file(resolve(args), preset_out);
      std::cout << "wrote " << preset_out << "\n";
      return 0;
    }
    if (fisher->parsed()) {
      std::vector<double> sweep_values;
      if (phi_points <= 1) {
        sweep_values.push_back(phi_min);
      } else {
        for (std::size_t i = 0; i < phi_points; ++i)
          sweep_values.push_back(phi_min + (phi_max - phi_min) *
                                               static_cast<double>(i) /
                                               static_cast<double>(phi_points - 1));
      }
      return report(deflectlab::cmd_fisher(resolve(args), sweep_values, opts),
                    args.strict);
    }
    if (spectrum->parsed())
      return report(deflectlab::cmd_spectrum(resolve(args), opts), args.strict);
    if (sweep->parsed()) {
      deflectlab::Scenario s = resolve(args);
      if (axis.empty()) {
        if (s.name == "fig3") axis = "geometry";
        else if (s.name == "fig5") axis = "surface";
        else axis = "modulation";
      }
      return report(deflectlab::cmd_sweep(
                        s, deflectlab::sweep_axis_from_string(axis), opts),
                    args.strict);
    }
    if (estimate->parsed())
      return report(deflectlab::cmd_estimate(resolve(args), repetitions, opts),
                    args.strict);
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::domain_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
