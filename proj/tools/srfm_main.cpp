// srfm - selective-reflection FM spectra of a driven dense alkali vapor.
//
// Subcommands:
//   spectrum   one scenario -> spectrum CSV/JSON + report
//   sweep      splitting vs generalized Rabi frequency -> CSV + linear fit
//   fit        doublet fit of an externally supplied FM spectrum
//   reproduce  run a shipped preset (fig2a..fig2d, fig3, fig4)

#include <cctype>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "srfm/errors.hpp"
#include "srfm/runner.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitConvergence = 3;
constexpr int kExitIo = 4;

struct CommonOptions {
  std::string out_dir = ".";
  std::string format = "csv";
  int grid_points = 0;  // 0 = keep config value
  int threads = 1;
};

void add_common(CLI::App* cmd, CommonOptions& opt) {
  cmd->add_option("--out", opt.out_dir, "Output directory")->capture_default_str();
  cmd->add_option("--format", opt.format, "Spectrum data format")
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();
  cmd->add_option("--grid-points", opt.grid_points, "Override probe_points");
  cmd->add_option("--threads", opt.threads, "Worker threads for grid evaluation")
      ->check(CLI::PositiveNumber);
}

std::string sanitize(const std::string& id) {
  std::string out;
  for (char c : id) out += (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_')
                               ? c
                               : '_';
  return out.empty() ? "scenario" : out;
}

int run_spectrum_config(const srfm::ScenarioConfig& cfg_in, const CommonOptions& opt) {
  srfm::ScenarioConfig cfg = cfg_in;
  if (opt.grid_points > 0) cfg.probe_points = opt.grid_points;
  const srfm::SpectrumRun run = srfm::run_spectrum(cfg, opt.threads);

  fs::create_directories(opt.out_dir);
  const std::string stem = sanitize(run.scenario.config.scenario_id);
  const fs::path dir(opt.out_dir);
  std::vector<std::string> outputs;
  if (opt.format == "json") {
    const fs::path data = dir / (stem + "_spectrum.json");
    srfm::write_spectrum_json(data, run.spectrum);
    outputs.push_back(data.string());
  } else {
    const fs::path data = dir / (stem + "_spectrum.csv");
    srfm::write_spectrum_csv(data, run.spectrum);
    outputs.push_back(data.string());
  }
  const fs::path resolved = dir / (stem + "_resolved.cfg");
  srfm::write_config(resolved, run.scenario.config);
  outputs.push_back(resolved.string());
  const fs::path report = dir / (stem + "_report.json");
  srfm::write_spectrum_report(report, run, outputs);

  if (run.floor_hits > 0)
    std::fprintf(stderr, "warning: susceptibility denominator floor hit %ld times\n",
                 run.floor_hits);
  if (run.grid_warning)
    std::fprintf(stderr, "warning: probe grid too coarse to resolve the FM features\n");
  if (run.gain_points > 0)
    std::fprintf(stderr,
                 "warning: Im chi < 0 at %ld grid points (inverted medium; R may exceed 1)\n",
                 run.gain_points);
  std::printf("%s: spectrum with %zu points -> %s\n", run.scenario.config.scenario_id.c_str(),
              run.spectrum.grid_ghz.size(), report.string().c_str());
  if (run.analysis.width_estimate_ghz)
    std::printf("  width estimate 0.87*delta_mm = %.3f GHz\n", *run.analysis.width_estimate_ghz);
  if (run.analysis.doublet && run.analysis.doublet->converged) {
    std::printf("  doublet: splitting %.3f GHz, width %.3f GHz", run.analysis.doublet->splitting_ghz,
                run.analysis.doublet->width_ghz);
    if (run.analysis.doublet_asymmetry)
      std::printf(", asymmetry %+.4f", *run.analysis.doublet_asymmetry);
    std::printf("\n");
  }
  return 0;
}

int run_sweep_config(const srfm::ScenarioConfig& cfg_in, const CommonOptions& opt) {
  srfm::ScenarioConfig cfg = cfg_in;
  if (opt.grid_points > 0) cfg.probe_points = opt.grid_points;
  const srfm::SweepRun run = srfm::run_sweep(cfg, opt.threads);

  fs::create_directories(opt.out_dir);
  const std::string stem = sanitize(run.config.scenario_id);
  const fs::path dir(opt.out_dir);
  const fs::path data = dir / (stem + "_sweep.csv");
  srfm::write_sweep_csv(data, run);
  const fs::path resolved = dir / (stem + "_resolved.cfg");
  srfm::write_config(resolved, cfg);
  const fs::path report = dir / (stem + "_report.json");
  srfm::write_sweep_report(report, run, {data.string(), resolved.string()});

  std::printf("%s: %zu sweep points -> %s\n", run.config.scenario_id.c_str(),
              run.points.size(), report.string().c_str());
  std::printf("  splitting vs generalized Rabi: slope %.4f +- %.4f (through origin)\n",
              run.line.slope, run.line.slope_stderr);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Selective-reflection FM spectroscopy of a driven dense vapor"};
  app.require_subcommand(1);

  // spectrum
  auto* spectrum_cmd = app.add_subcommand("spectrum", "Simulate one FM reflection spectrum");
  std::string spectrum_config;
  CommonOptions spectrum_opt;
  spectrum_cmd->add_option("--config", spectrum_config, "Scenario config file")->required();
  add_common(spectrum_cmd, spectrum_opt);

  // sweep
  auto* sweep_cmd = app.add_subcommand("sweep", "Splitting vs generalized Rabi frequency");
  std::string sweep_config;
  CommonOptions sweep_opt;
  sweep_cmd->add_option("--config", sweep_config, "Scenario config file with sweep keys")
      ->required();
  add_common(sweep_cmd, sweep_opt);

  // fit
  auto* fit_cmd = app.add_subcommand("fit", "Fit a doublet to an FM spectrum CSV");
  std::string fit_input;
  std::string fit_out_dir = ".";
  std::vector<double> fit_init;
  fit_cmd->add_option("input", fit_input, "CSV file (detuning_GHz,signal or spectrum schema)")
      ->required();
  fit_cmd->add_option("--out", fit_out_dir, "Output directory")->capture_default_str();
  fit_cmd->add_option("--init", fit_init,
                      "Initial guess: center_GHz splitting_GHz halfwidth_GHz "
                      "(amplitudes, phase and baseline start from a linear solve)")
      ->expected(3);

  // reproduce
  auto* repro_cmd = app.add_subcommand("reproduce", "Run a shipped preset scenario");
  std::string figure;
  std::string presets_override;
  CommonOptions repro_opt;
  repro_cmd->add_option("figure", figure, "fig2a|fig2b|fig2c|fig2d|fig3|fig4")->required();
  repro_cmd->add_option("--presets", presets_override, "Preset directory");
  add_common(repro_cmd, repro_opt);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*spectrum_cmd) {
      return run_spectrum_config(srfm::load_config(spectrum_config), spectrum_opt);
    }
    if (*sweep_cmd) {
      return run_sweep_config(srfm::load_config(sweep_config), sweep_opt);
    }
    if (*fit_cmd) {
      std::optional<srfm::DoubletInit> init;
      if (!fit_init.empty()) {
        srfm::DoubletInit di;
        di.center_ghz = fit_init.at(0);
        di.splitting_ghz = fit_init.at(1);
        di.halfwidth_ghz = fit_init.at(2);
        init = di;
      }
      const srfm::FitRun run = srfm::run_fit_file(fit_input, init);
      fs::create_directories(fit_out_dir);
      const fs::path report = fs::path(fit_out_dir) /
                              (sanitize(fs::path(fit_input).stem().string()) + "_fit.json");
      srfm::write_fit_report(report, run, fit_input);
      if (run.degenerate) {
        std::printf("fit: degenerate input (%s) -> %s\n", run.note.c_str(),
                    report.string().c_str());
      } else {
        std::printf("fit: splitting %.6g GHz, width %.6g GHz, converged=%d -> %s\n",
                    run.fit.splitting_ghz, run.fit.width_ghz, run.fit.converged,
                    report.string().c_str());
      }
      return 0;
    }
    if (*repro_cmd) {
      const fs::path dir = srfm::preset_dir(presets_override);
      int rc = 0;
      for (const std::string& name : srfm::preset_names(figure)) {
        const fs::path cfg_path = dir / (name + ".cfg");
        const srfm::ScenarioConfig cfg = srfm::load_config(cfg_path);
        if (figure == "fig3")
          rc = run_sweep_config(cfg, repro_opt);
        else
          rc = run_spectrum_config(cfg, repro_opt);
        if (rc != 0) break;
      }
      return rc;
    }
  } catch (const srfm::ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitConfig;
  } catch (const srfm::ConvergenceError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitConvergence;
  } catch (const srfm::ParseError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitIo;
  } catch (const srfm::IoError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitIo;
  } catch (const std::filesystem::filesystem_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitIo;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
