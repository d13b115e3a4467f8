#pragma once

#include <filesystem>
#include <istream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "srfm/core_model.hpp"
#include "srfm/reflection.hpp"

namespace srfm {

enum class FmMethod { kLockin, kDerivative };

/// How the pump detuning knob is referenced:
///  - symmetric: from the pump frequency at which the simulated doublet is
///    symmetric (the operational zero of the experiment);
///  - shifted: from the bare resonance moved by the local-field and
///    collisional shifts;
///  - bare: from the unshifted atomic resonance.
enum class PumpReference { kSymmetric, kShifted, kBare };

/// Flat key-value scenario description. All frequencies in ordinary GHz,
/// lengths and densities in the key-named units.
struct ScenarioConfig {
  std::string scenario_id = "custom";

  double lambda_probe_nm = 770.0;
  double lambda_drive_nm = 766.0;
  double gamma_rad_ghz = 0.006;
  double dipole_projection_factor = 1.0 / 3.0;
  double self_broadening_calibration_ghz = 28.4;
  double self_broadening_calibration_density = 4.9e17;  // cm^-3
  double rabi_intensity_coefficient_hz = 8.0e7;

  double density = 4.9e17;  // cm^-3
  double collisional_shift_ghz = 0.0;

  std::optional<double> pump_rabi_ghz;  // exactly one of rabi / power
  std::optional<double> pump_power_w;
  double pump_beam_area_cm2 = 5.0e-4;
  double pump_detuning_ghz = 0.0;
  PumpReference pump_reference = PumpReference::kSymmetric;
  double population_decay_ghz = 0.006;
  std::optional<double> excitation_override;

  double probe_rabi_ghz = 0.0;
  double probe_center_ghz = 0.0;
  double probe_span_ghz = 240.0;
  int probe_points = 2000;

  FmParams fm;
  FmMethod fm_method = FmMethod::kLockin;

  double window_index = 1.76;

  SolveOptions solver;

  // Sweep construction: zero-detuning Rabi list plus a detuning list at a
  // fixed Rabi frequency.
  std::vector<double> sweep_zero_detuning_rabis_ghz;
  std::optional<double> sweep_fixed_rabi_ghz;
  std::vector<double> sweep_detunings_ghz;

  AtomSystem atom() const;
  void validate() const;  // throws ConfigError with a field-path message
};

/// Parses a flat "key = value" file ('#' comments). Environment variables
/// named SRFM_<KEY uppercased> override file values. Unknown keys are
/// rejected with their line number.
ScenarioConfig load_config(const std::filesystem::path& path);
ScenarioConfig parse_config(std::istream& in, const std::string& source_name);

/// Fully-materialized key-value view in canonical order; values are
/// round-trip exact. Loading the echoed text reproduces the config.
std::vector<std::pair<std::string, std::string>> config_echo(const ScenarioConfig& cfg);
void write_config(const std::filesystem::path& path, const ScenarioConfig& cfg);

/// Shortest round-trip decimal representation.
std::string format_double(double value);

}  // namespace srfm
