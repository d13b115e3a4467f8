#include "srfm/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

#include "srfm/errors.hpp"

namespace srfm {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

double parse_number(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const double v = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config: key '" + key + "': cannot parse number from '" + value + "'");
  }
}

int parse_int(const std::string& key, const std::string& value) {
  const double v = parse_number(key, value);
  const int i = static_cast<int>(v);
  if (static_cast<double>(i) != v)
    throw ConfigError("config: key '" + key + "': expected an integer, got '" + value + "'");
  return i;
}

std::vector<double> parse_list(const std::string& key, const std::string& value) {
  std::vector<double> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    out.push_back(parse_number(key, item));
  }
  return out;
}

std::string format_list(const std::vector<double>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ",";
    out += format_double(values[i]);
  }
  return out;
}

const char* kEnvPrefix = "SRFM_";

// Every recognized key, in canonical echo order.
const std::vector<std::string>& key_registry() {
  static const std::vector<std::string> keys = {
      "scenario_id",
      "lambda_probe_nm",
      "lambda_drive_nm",
      "gamma_rad_GHz",
      "dipole_projection_factor",
      "self_broadening_calibration_GHz",
      "self_broadening_calibration_density_per_cm3",
      "rabi_intensity_coefficient_Hz",
      "density_per_cm3",
      "collisional_shift_GHz",
      "pump_rabi_GHz",
      "pump_power_W",
      "pump_beam_area_cm2",
      "pump_detuning_GHz",
      "pump_detuning_reference",
      "population_decay_GHz",
      "excitation_override",
      "probe_rabi_GHz",
      "probe_center_GHz",
      "probe_span_GHz",
      "probe_points",
      "fm_mod_range_GHz",
      "fm_mod_rate_Hz",
      "fm_harmonic",
      "fm_cycle_samples",
      "fm_method",
      "window_index",
      "solver_tol",
      "solver_max_iter",
      "solver_damping",
      "sweep_zero_detuning_rabis_GHz",
      "sweep_fixed_rabi_GHz",
      "sweep_detunings_GHz",
  };
  return keys;
}

std::string env_name(const std::string& key) {
  std::string name = kEnvPrefix;
  for (char c : key) name += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return name;
}

void apply_key(ScenarioConfig& cfg, const std::string& key, const std::string& value) {
  if (key == "scenario_id") {
    cfg.scenario_id = value;
  } else if (key == "lambda_probe_nm") {
    cfg.lambda_probe_nm = parse_number(key, value);
  } else if (key == "lambda_drive_nm") {
    cfg.lambda_drive_nm = parse_number(key, value);
  } else if (key == "gamma_rad_GHz") {
    cfg.gamma_rad_ghz = parse_number(key, value);
  } else if (key == "dipole_projection_factor") {
    cfg.dipole_projection_factor = parse_number(key, value);
  } else if (key == "self_broadening_calibration_GHz") {
    cfg.self_broadening_calibration_ghz = parse_number(key, value);
  } else if (key == "self_broadening_calibration_density_per_cm3") {
    cfg.self_broadening_calibration_density = parse_number(key, value);
  } else if (key == "rabi_intensity_coefficient_Hz") {
    cfg.rabi_intensity_coefficient_hz = parse_number(key, value);
  } else if (key == "density_per_cm3") {
    cfg.density = parse_number(key, value);
  } else if (key == "collisional_shift_GHz") {
    cfg.collisional_shift_ghz = parse_number(key, value);
  } else if (key == "pump_rabi_GHz") {
    cfg.pump_rabi_ghz = parse_number(key, value);
  } else if (key == "pump_power_W") {
    cfg.pump_power_w = parse_number(key, value);
  } else if (key == "pump_beam_area_cm2") {
    cfg.pump_beam_area_cm2 = parse_number(key, value);
  } else if (key == "pump_detuning_GHz") {
    cfg.pump_detuning_ghz = parse_number(key, value);
  } else if (key == "pump_detuning_reference") {
    if (value == "symmetric")
      cfg.pump_reference = PumpReference::kSymmetric;
    else if (value == "shifted")
      cfg.pump_reference = PumpReference::kShifted;
    else if (value == "bare")
      cfg.pump_reference = PumpReference::kBare;
    else
      throw ConfigError("config: pump_detuning_reference must be symmetric, shifted or bare, got '" +
                        value + "'");
  } else if (key == "population_decay_GHz") {
    cfg.population_decay_ghz = parse_number(key, value);
  } else if (key == "excitation_override") {
    if (value.empty())
      cfg.excitation_override.reset();
    else
      cfg.excitation_override = parse_number(key, value);
  } else if (key == "probe_rabi_GHz") {
    cfg.probe_rabi_ghz = parse_number(key, value);
  } else if (key == "probe_center_GHz") {
    cfg.probe_center_ghz = parse_number(key, value);
  } else if (key == "probe_span_GHz") {
    cfg.probe_span_ghz = parse_number(key, value);
  } else if (key == "probe_points") {
    cfg.probe_points = parse_int(key, value);
  } else if (key == "fm_mod_range_GHz") {
    cfg.fm.mod_range_ghz = parse_number(key, value);
  } else if (key == "fm_mod_rate_Hz") {
    cfg.fm.mod_rate_hz = parse_number(key, value);
  } else if (key == "fm_harmonic") {
    cfg.fm.harmonic = parse_int(key, value);
  } else if (key == "fm_cycle_samples") {
    cfg.fm.cycle_samples = parse_int(key, value);
  } else if (key == "fm_method") {
    if (value == "lockin")
      cfg.fm_method = FmMethod::kLockin;
    else if (value == "derivative")
      cfg.fm_method = FmMethod::kDerivative;
    else
      throw ConfigError("config: fm_method must be lockin or derivative, got '" + value + "'");
  } else if (key == "window_index") {
    cfg.window_index = parse_number(key, value);
  } else if (key == "solver_tol") {
    cfg.solver.tol = parse_number(key, value);
  } else if (key == "solver_max_iter") {
    cfg.solver.max_iter = parse_int(key, value);
  } else if (key == "solver_damping") {
    cfg.solver.damping = parse_number(key, value);
  } else if (key == "sweep_zero_detuning_rabis_GHz") {
    cfg.sweep_zero_detuning_rabis_ghz = parse_list(key, value);
  } else if (key == "sweep_fixed_rabi_GHz") {
    if (value.empty())
      cfg.sweep_fixed_rabi_ghz.reset();
    else
      cfg.sweep_fixed_rabi_ghz = parse_number(key, value);
  } else if (key == "sweep_detunings_GHz") {
    cfg.sweep_detunings_ghz = parse_list(key, value);
  } else {
    throw ConfigError("config: unknown key '" + key + "'");
  }
}

}  // namespace

std::string format_double(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

AtomSystem ScenarioConfig::atom() const {
  AtomSystem a;
  a.lambda_probe_cm = lambda_probe_nm * 1e-7;
  a.lambda_drive_cm = lambda_drive_nm * 1e-7;
  a.gamma_rad = angular_from_ghz(gamma_rad_ghz);
  a.dipole_projection = dipole_projection_factor;
  a.k_self =
      angular_from_ghz(self_broadening_calibration_ghz) / self_broadening_calibration_density;
  a.rabi_intensity_coefficient_hz = rabi_intensity_coefficient_hz;
  return a;
}

void ScenarioConfig::validate() const {
  auto fail = [](const std::string& field, const std::string& why) {
    throw ConfigError("config: " + field + ": " + why);
  };
  try {
    atom().validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  if (density <= 0) fail("density_per_cm3", "must be positive");
  if (pump_rabi_ghz.has_value() == pump_power_w.has_value())
    fail("pump_rabi_GHz/pump_power_W", "exactly one of the two must be specified");
  if (pump_rabi_ghz && *pump_rabi_ghz < 0) fail("pump_rabi_GHz", "must be non-negative");
  if (pump_power_w && *pump_power_w < 0) fail("pump_power_W", "must be non-negative");
  if (pump_beam_area_cm2 <= 0) fail("pump_beam_area_cm2", "must be positive");
  if (population_decay_ghz <= 0) fail("population_decay_GHz", "must be positive");
  if (excitation_override && (*excitation_override < 0 || *excitation_override > 1))
    fail("excitation_override", "must lie in [0, 1]");
  if (probe_span_ghz <= 0) fail("probe_span_GHz", "must be positive");
  if (probe_points < 200) fail("probe_points", "at least 200 points required");
  try {
    fm.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  if (window_index <= 1.0) fail("window_index", "must exceed 1");
  if (solver.tol <= 0) fail("solver_tol", "must be positive");
  if (solver.max_iter <= 0) fail("solver_max_iter", "must be positive");
  if (solver.damping <= 0 || solver.damping > 1) fail("solver_damping", "must lie in (0, 1]");
}

ScenarioConfig parse_config(std::istream& in, const std::string& source_name) {
  std::map<std::string, std::string> raw;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(source_name + ":" + std::to_string(line_no) +
                        ": expected 'key = value', got '" + line + "'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw ConfigError(source_name + ":" + std::to_string(line_no) + ": empty key");
    if (raw.count(key))
      throw ConfigError(source_name + ":" + std::to_string(line_no) + ": duplicate key '" + key +
                        "'");
    const auto& known = key_registry();
    if (std::find(known.begin(), known.end(), key) == known.end())
      throw ConfigError(source_name + ":" + std::to_string(line_no) + ": unknown key '" + key +
                        "'");
    raw[key] = value;
  }

  // Environment overrides, applied over the file values.
  for (const auto& key : key_registry()) {
    if (const char* env = std::getenv(env_name(key).c_str())) raw[key] = env;
  }

  ScenarioConfig cfg;
  for (const auto& [key, value] : raw) apply_key(cfg, key, value);
  cfg.validate();
  return cfg;
}

ScenarioConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file '" + path.string() + "'");
  return parse_config(in, path.string());
}

std::vector<std::pair<std::string, std::string>> config_echo(const ScenarioConfig& cfg) {
  std::vector<std::pair<std::string, std::string>> out;
  auto put = [&out](const std::string& key, const std::string& value) {
    out.emplace_back(key, value);
  };
  put("scenario_id", cfg.scenario_id);
  put("lambda_probe_nm", format_double(cfg.lambda_probe_nm));
  put("lambda_drive_nm", format_double(cfg.lambda_drive_nm));
  put("gamma_rad_GHz", format_double(cfg.gamma_rad_ghz));
  put("dipole_projection_factor", format_double(cfg.dipole_projection_factor));
  put("self_broadening_calibration_GHz", format_double(cfg.self_broadening_calibration_ghz));
  put("self_broadening_calibration_density_per_cm3",
      format_double(cfg.self_broadening_calibration_density));
  put("rabi_intensity_coefficient_Hz", format_double(cfg.rabi_intensity_coefficient_hz));
  put("density_per_cm3", format_double(cfg.density));
  put("collisional_shift_GHz", format_double(cfg.collisional_shift_ghz));
  if (cfg.pump_rabi_ghz) put("pump_rabi_GHz", format_double(*cfg.pump_rabi_ghz));
  if (cfg.pump_power_w) put("pump_power_W", format_double(*cfg.pump_power_w));
  put("pump_beam_area_cm2", format_double(cfg.pump_beam_area_cm2));
  put("pump_detuning_GHz", format_double(cfg.pump_detuning_ghz));
  put("pump_detuning_reference", cfg.pump_reference == PumpReference::kSymmetric ? "symmetric"
                                 : cfg.pump_reference == PumpReference::kShifted ? "shifted"
                                                                                 : "bare");
  put("population_decay_GHz", format_double(cfg.population_decay_ghz));
  if (cfg.excitation_override) put("excitation_override", format_double(*cfg.excitation_override));
  put("probe_rabi_GHz", format_double(cfg.probe_rabi_ghz));
  put("probe_center_GHz", format_double(cfg.probe_center_ghz));
  put("probe_span_GHz", format_double(cfg.probe_span_ghz));
  put("probe_points", std::to_string(cfg.probe_points));
  put("fm_mod_range_GHz", format_double(cfg.fm.mod_range_ghz));
  put("fm_mod_rate_Hz", format_double(cfg.fm.mod_rate_hz));
  put("fm_harmonic", std::to_string(cfg.fm.harmonic));
  put("fm_cycle_samples", std::to_string(cfg.fm.cycle_samples));
  put("fm_method", cfg.fm_method == FmMethod::kLockin ? "lockin" : "derivative");
  put("window_index", format_double(cfg.window_index));
  put("solver_tol", format_double(cfg.solver.tol));
  put("solver_max_iter", std::to_string(cfg.solver.max_iter));
  put("solver_damping", format_double(cfg.solver.damping));
  if (!cfg.sweep_zero_detuning_rabis_ghz.empty())
    put("sweep_zero_detuning_rabis_GHz", format_list(cfg.sweep_zero_detuning_rabis_ghz));
  if (cfg.sweep_fixed_rabi_ghz) put("sweep_fixed_rabi_GHz", format_double(*cfg.sweep_fixed_rabi_ghz));
  if (!cfg.sweep_detunings_ghz.empty())
    put("sweep_detunings_GHz", format_list(cfg.sweep_detunings_ghz));
  return out;
}

void write_config(const std::filesystem::path& path, const ScenarioConfig& cfg) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write config file '" + path.string() + "'");
  for (const auto& [key, value] : config_echo(cfg)) out << key << " = " << value << "\n";
  if (!out) throw IoError("failed writing config file '" + path.string() + "'");
}

}  // namespace srfm
