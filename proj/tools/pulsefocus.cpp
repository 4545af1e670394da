// pulsefocus command-line front end.
//
// Subcommands:
//   run <config-file> [--out DIR] [--workers N] [--resolution R]
//   classify --p P --alpha A
//   predict-blowup <config-file>
//
// Exit codes: 0 all verdicts pass, 1 scientific failure,
//             2 configuration error, 3 runtime error.
#include <cstdio>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "pulsefocus/closedform.hpp"
#include "pulsefocus/config.hpp"
#include "pulsefocus/experiments.hpp"
#include "pulsefocus/regimes.hpp"

namespace pf = pulsefocus;

namespace {

int cmd_run(const std::string& config_path, const std::string& out_override,
            int workers_override, int resolution_override) {
  pf::ExperimentConfig cfg;
  try {
    cfg = pf::load_config(config_path);
    if (!out_override.empty()) cfg.out = out_override;
    if (workers_override > 0) cfg.workers = workers_override;
    if (resolution_override > 0) {
      cfg.resolution = resolution_override;
      if (!pf::detail::is_power_of_two(cfg.resolution) || cfg.resolution < 16)
        throw pf::ConfigError("--resolution must be a power of two >= 16");
    }
  } catch (const pf::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 2;
  }

  try {
    const pf::RunOutput output = pf::run_experiment(cfg);
    const auto files = pf::emit_report(output, cfg.out);
    for (const auto& v : output.report.verdicts)
      std::cout << (v.pass ? "[pass] " : "[FAIL] ") << v.rule
                << (v.details.empty() ? "" : " -- " + v.details) << "\n";
    std::cout << "report: " << (cfg.out + "/report.json")
              << " (config " << output.report.config_hash << ")\n";
    return output.report.pass ? 0 : 1;
  } catch (const pf::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "runtime error: " << e.what() << "\n";
    return 3;
  }
}

int cmd_classify(double p, double alpha) {
  try {
    pf::ProblemParams params;
    params.p = p;
    params.alpha = alpha;
    const pf::RegimeClass cls = pf::classify(params);
    std::cout << "caustic: " << pf::to_string(cls.caustic) << "\n"
              << "propagation: " << pf::to_string(cls.propagation) << "\n"
              << "note: " << pf::to_string(cls.note) << "\n"
              << "gamma: " << pf::gamma_exponent(params) << "\n";
    try {
      const pf::RatePrediction rate = pf::subcritical_rate(params);
      std::cout << "subcritical order: " << rate.order
                << (rate.log_factor ? " (with |log eps| factor)" : "")
                << "\n";
    } catch (const pf::RegimeError& e) {
      std::cout << "subcritical order: n/a (" << e.what() << ")\n";
    }
    return 0;
  } catch (const pf::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}

int cmd_predict_blowup(const std::string& config_path) {
  try {
    const pf::ExperimentConfig cfg = pf::load_config(config_path);
    if (!(cfg.a < 0.0))
      throw pf::ConfigError(
          "blow-up prediction requires accretive coupling a < 0");
    const pf::ReducedData data = cfg.build_data();
    for (double eps : cfg.eps_list) {
      const pf::AppValidity v =
          pf::predicted_blowup_time(data, cfg.params_for(eps));
      std::cout << "eps = " << eps << ": t_max = " << v.t_max << " ("
                << (v.reason == pf::AppValidityReason::DenominatorVanishes
                        ? "denominator vanishes"
                        : "pre-focus window only")
                << ")\n";
    }
    return 0;
  } catch (const pf::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "runtime error: " << e.what() << "\n";
    return 3;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pulsefocus: numerical experiments on focusing spherical "
               "nonlinear pulses"};
  app.require_subcommand(1);

  std::string config_path, out_override;
  int workers_override = 0, resolution_override = 0;
  auto* run = app.add_subcommand("run", "run an experiment config");
  run->add_option("config", config_path, "experiment config file")->required();
  run->add_option("--out", out_override, "output directory");
  run->add_option("--workers", workers_override, "concurrent sweep members");
  run->add_option("--resolution", resolution_override,
                  "cells per pulse width (power of two >= 16)");

  double p = 0.0, alpha = 0.0;
  auto* classify = app.add_subcommand("classify", "classify (alpha, p)");
  classify->add_option("--p", p, "nonlinearity exponent")->required();
  classify->add_option("--alpha", alpha, "source power")->required();

  std::string blowup_config;
  auto* predict =
      app.add_subcommand("predict-blowup", "predicted blow-up time per eps");
  predict->add_option("config", blowup_config, "experiment config file")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (run->parsed())
    return cmd_run(config_path, out_override, workers_override,
                   resolution_override);
  if (classify->parsed()) return cmd_classify(p, alpha);
  return cmd_predict_blowup(blowup_config);
}
