#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "srfm/analysis.hpp"
#include "srfm/config.hpp"
#include "srfm/core_model.hpp"
#include "srfm/reflection.hpp"

namespace srfm {

/// A scenario with every derived quantity materialized: populations solved,
/// pump reference resolved, probe grid built (with the sampling rule
/// enforced, so probe_points in `config` may exceed the requested value).
struct ResolvedScenario {
  ScenarioConfig config;  // echo-ready (resolved probe_points)
  AtomSystem atom;
  DriveField drive;  // detuning holds the effective shifted-frame value
  VaporState vapor;
  WindowMedium window;
  ProbeField probe;                 // rabi recorded, grid in rad/ns
  std::vector<double> grid_ghz;
  double rabi = 0;                  // rad/ns
  double pump_detuning_bare = 0;    // rad/ns
  double delta_cb = 0;              // rad/ns, effective pump detuning
  std::optional<double> symmetric_offset_ghz;  // when reference = symmetric
  std::optional<double> intensity_w_cm2;       // when power/area given
};

struct SpectrumAnalysis {
  std::optional<double> delta_mm_ghz;  // reflection max/min interval
  std::optional<double> width_estimate_ghz;
  std::vector<double> fm_zero_crossings_ghz;
  std::optional<DoubletFit> doublet;
  std::optional<double> doublet_asymmetry;
};

struct SpectrumRun {
  ResolvedScenario scenario;
  ComplexSpectrum spectrum;
  SpectrumAnalysis analysis;
  long floor_hits = 0;
  long gain_points = 0;       // grid points with Im chi < 0 (inverted medium)
  bool grid_warning = false;  // derivative path found the grid undersampled
  double wall_ms = 0;
};

struct SweepPoint {
  double rabi_ghz = 0;
  double detuning_ghz = 0;       // user knob, relative to the symmetric point
  double delta_cb_ghz = 0;       // effective pump detuning from the shifted line
  double omega_tilde_ghz = 0;    // generalized Rabi from delta_cb (CSV x-axis)
  double omega_tilde_knob_ghz = 0;  // generalized Rabi from the user knob
  DoubletFit fit;
  double asymmetry = 0;
  bool converged = false;
};

struct SweepRun {
  ScenarioConfig config;   // the sweep configuration, echo-ready
  std::vector<SweepPoint> points;
  LinearFit line;          // splitting vs generalized Rabi, through origin
  LinearFit line_free;     // same with a free intercept
  double wall_ms = 0;
};

struct FitRun {
  DoubletFit fit;
  std::optional<double> fit_asymmetry;
  bool degenerate = false;  // no doublet signature in the input
  std::string note;
  std::size_t rows = 0;
};

ResolvedScenario resolve_scenario(const ScenarioConfig& cfg, int threads = 1);

/// Pump detuning (shifted frame, rad/ns) at which the fitted doublet is
/// symmetric; the operational zero of the pump detuning axis.
double symmetric_pump_detuning(const AtomSystem& atom, const VaporState& vapor, double rabi,
                               const WindowMedium& window, const FmParams& fm, int threads = 1);

SpectrumRun run_spectrum(const ScenarioConfig& cfg, int threads = 1);
SweepRun run_sweep(const ScenarioConfig& cfg, int threads = 1);
FitRun run_fit_file(const std::filesystem::path& csv_path, std::optional<DoubletInit> init = {});

/// Output writers. Spectrum data goes to CSV (or JSON with the same
/// columns); reports are always JSON.
void write_spectrum_csv(const std::filesystem::path& path, const ComplexSpectrum& spectrum);
void write_spectrum_json(const std::filesystem::path& path, const ComplexSpectrum& spectrum);
void write_spectrum_report(const std::filesystem::path& path, const SpectrumRun& run,
                           const std::vector<std::string>& output_files);
void write_sweep_csv(const std::filesystem::path& path, const SweepRun& run);
void write_sweep_report(const std::filesystem::path& path, const SweepRun& run,
                        const std::vector<std::string>& output_files);
void write_fit_report(const std::filesystem::path& path, const FitRun& run,
                      const std::string& input_file);

/// Preset lookup: explicit directory, then the SRFM_PRESETS environment
/// variable, then the built-in location.
std::filesystem::path preset_dir(const std::string& cli_override);
std::vector<std::string> preset_names(const std::string& figure);

}  // namespace srfm
