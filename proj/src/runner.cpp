#include "srfm/runner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "json.hpp"
#include "srfm/errors.hpp"

namespace srfm {

namespace {

using json = nlohmann::ordered_json;
using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

DriveField drive_from_config(const ScenarioConfig& cfg) {
  DriveField d;
  if (cfg.pump_rabi_ghz) d.rabi = angular_from_ghz(*cfg.pump_rabi_ghz);
  if (cfg.pump_power_w) d.power_w = *cfg.pump_power_w;
  d.beam_area_cm2 = cfg.pump_beam_area_cm2;
  d.detuning = angular_from_ghz(cfg.pump_detuning_ghz);
  d.reference = cfg.pump_reference == PumpReference::kBare ? PumpDetuningReference::kBare
                                                           : PumpDetuningReference::kShifted;
  d.population_decay = angular_from_ghz(cfg.population_decay_ghz);
  d.excitation_override = cfg.excitation_override;
  return d;
}

// Expected half-width of the narrowest spectral component, used for the
// grid sampling rule and for fit windows.
double component_halfwidth_ghz(const AtomSystem& atom, const VaporState& vapor) {
  return ghz_from_angular(atom.gamma_rad / 2.0 + vapor.gamma_self / 2.0);
}

// Model-informed starting point for the doublet fit of a driven spectrum.
DoubletInit doublet_seed(const ResolvedScenario& s) {
  DoubletInit init;
  init.center_ghz = -ghz_from_angular(s.vapor.shift_total()) + ghz_from_angular(s.delta_cb) / 2.0;
  init.splitting_ghz = ghz_from_angular(generalized_rabi(s.rabi, s.delta_cb));
  init.halfwidth_ghz = component_halfwidth_ghz(s.atom, s.vapor);
  return init;
}

// Doublet components show up as the two strongest same-sign lobes of the FM
// signal; zero crossings alone sit on the envelope for strongly dispersive
// lines. Throws std::invalid_argument when no doublet signature exists.
DoubletInit detect_doublet(const std::vector<double>& signal, const std::vector<double>& grid) {
  const ExtremaReport extrema = find_extrema(signal, grid);
  if (extrema.zero_crossings.size() < 2)
    throw std::invalid_argument("fit: no doublet signature (fewer than two zero crossings)");

  const auto strongest_pair = [](const std::vector<Extremum>& lobes,
                                 const Extremum** a, const Extremum** b) {
    *a = *b = nullptr;
    for (const auto& e : lobes) {
      if (!*a || std::abs(e.value) > std::abs((*a)->value)) {
        *b = *a;
        *a = &e;
      } else if (!*b || std::abs(e.value) > std::abs((*b)->value)) {
        *b = &e;
      }
    }
    return *a && *b ? std::abs((*a)->value) + std::abs((*b)->value) : 0.0;
  };
  const Extremum *min_a, *min_b, *max_a, *max_b;
  const double min_score = strongest_pair(extrema.minima, &min_a, &min_b);
  const double max_score = strongest_pair(extrema.maxima, &max_a, &max_b);

  DoubletInit seed;
  if (min_score == 0 && max_score == 0) {
    // Fall back on the outermost crossing pair.
    const double z0 = extrema.zero_crossings.front().position_ghz;
    const double z1 = extrema.zero_crossings.back().position_ghz;
    seed.center_ghz = 0.5 * (z0 + z1);
    seed.splitting_ghz = z1 - z0;
  } else {
    const Extremum* a = min_score >= max_score ? min_a : max_a;
    const Extremum* b = min_score >= max_score ? min_b : max_b;
    seed.center_ghz = 0.5 * (a->position_ghz + b->position_ghz);
    seed.splitting_ghz = std::abs(a->position_ghz - b->position_ghz);
  }
  const double floor_ghz = (grid.back() - grid.front()) / 100.0;
  seed.splitting_ghz = std::max(seed.splitting_ghz, floor_ghz);
  seed.halfwidth_ghz = std::max(0.5 * seed.splitting_ghz, floor_ghz);
  return seed;
}

// Fit window: the doublet region plus two component widths of margin.
std::pair<std::size_t, std::size_t> fit_window(const std::vector<double>& grid,
                                               const DoubletInit& seed) {
  const double halfwin = 0.75 * seed.splitting_ghz + 2.0 * seed.halfwidth_ghz;
  const double lo = seed.center_ghz - halfwin;
  const double hi = seed.center_ghz + halfwin;
  const auto begin = std::lower_bound(grid.begin(), grid.end(), lo);
  const auto end = std::upper_bound(grid.begin(), grid.end(), hi);
  return {static_cast<std::size_t>(begin - grid.begin()),
          static_cast<std::size_t>(end - grid.begin())};
}

DoubletFit fit_windowed(const std::vector<double>& signal, const std::vector<double>& grid,
                        const DoubletInit& seed) {
  const auto [b, e] = fit_window(grid, seed);
  if (e - b < 50) throw ConfigError("doublet fit: probe grid does not cover the doublet window");
  return fit_doublet(std::span(signal).subspan(b, e - b), std::span(grid).subspan(b, e - b), seed);
}

std::vector<double> fm_signal_for(const ResolvedScenario& s, const ReflectionModel& model,
                                  const std::vector<double>& grid, int threads,
                                  bool* grid_warning) {
  const auto refl = [&model](double nu) { return model.reflectivity_at_ghz(nu); };
  if (s.config.fm_method == FmMethod::kDerivative)
    return fm_spectrum_derivative(refl, grid, s.config.fm, threads, grid_warning);
  return fm_spectrum_lockin(refl, grid, s.config.fm, threads);
}

}  // namespace

double symmetric_pump_detuning(const AtomSystem& atom, const VaporState& vapor, double rabi,
                               const WindowMedium& window, const FmParams& fm, int threads) {
  if (rabi <= 0)
    throw std::invalid_argument("symmetric_pump_detuning: requires a driven vapor");
  const double gamma_t = atom.gamma_rad / 2.0 + vapor.gamma_self / 2.0;
  const double shift = vapor.shift_total();

  const auto asym_at = [&](double delta_cb) {
    DriveField probe_drive;
    probe_drive.rabi = rabi;
    probe_drive.detuning = delta_cb;
    probe_drive.reference = PumpDetuningReference::kShifted;
    const ReflectionModel model(atom, vapor, probe_drive, window);
    const double sep = ghz_from_angular(generalized_rabi(rabi, delta_cb));
    const double w = ghz_from_angular(gamma_t);
    const double center = ghz_from_angular(-shift + delta_cb / 2.0);
    const double halfwin = 0.75 * sep + 2.0 * w;
    const auto grid = build_probe_grid(center, 2.0 * halfwin, 900, 0.0);
    const auto refl = [&model](double nu) { return model.reflectivity_at_ghz(nu); };
    const auto signal = fm_spectrum_lockin(refl, grid, fm, threads);
    DoubletInit init;
    init.center_ghz = center;
    init.splitting_ghz = sep;
    init.halfwidth_ghz = w;
    const DoubletFit fit = fit_doublet(signal, grid, init);
    if (!fit.converged)
      throw ConvergenceError("symmetric_pump_detuning: doublet fit did not converge", delta_cb, 0,
                             fit.iterations);
    return asymmetry(fit);
  };

  // Bracket the zero of a(delta_cb); the asymmetry grows monotonically with
  // the pump detuning in this regime.
  double lo = -2.0 * gamma_t;
  double hi = 0.5 * gamma_t;
  double a_lo = asym_at(lo);
  double a_hi = asym_at(hi);
  int expand = 0;
  while (a_lo * a_hi > 0 && expand < 4) {
    ++expand;
    lo -= gamma_t;
    hi += gamma_t;
    a_lo = asym_at(lo);
    a_hi = asym_at(hi);
  }
  if (a_lo * a_hi > 0)
    throw ConvergenceError("symmetric_pump_detuning: no symmetry point in the bracket", lo, a_lo,
                           expand);
  for (int i = 0; i < 40; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double a_mid = asym_at(mid);
    if (a_mid == 0) return mid;
    if (a_mid * a_lo < 0) {
      hi = mid;
      a_hi = a_mid;
    } else {
      lo = mid;
      a_lo = a_mid;
    }
    if (hi - lo < angular_from_ghz(1e-4)) break;
  }
  return 0.5 * (lo + hi);
}

ResolvedScenario resolve_scenario(const ScenarioConfig& cfg, int threads) {
  cfg.validate();
  ResolvedScenario s;
  s.config = cfg;
  s.atom = cfg.atom();
  s.window.n0 = cfg.window_index;
  s.drive = drive_from_config(cfg);
  if (cfg.pump_power_w)
    s.intensity_w_cm2 = intensity_from_power(*cfg.pump_power_w, cfg.pump_beam_area_cm2);
  s.rabi = s.drive.resolved_rabi(s.atom);

  s.vapor = steady_populations(s.atom, s.drive, cfg.density,
                               angular_from_ghz(cfg.collisional_shift_ghz), cfg.solver);

  if (cfg.pump_reference == PumpReference::kSymmetric && s.rabi > 0) {
    const double offset =
        symmetric_pump_detuning(s.atom, s.vapor, s.rabi, s.window, cfg.fm, threads);
    s.symmetric_offset_ghz = ghz_from_angular(offset);
    s.delta_cb = offset + angular_from_ghz(cfg.pump_detuning_ghz);
    s.drive.detuning = s.delta_cb;  // shifted-frame equivalent
    s.drive.reference = PumpDetuningReference::kShifted;
  } else if (cfg.pump_reference == PumpReference::kBare) {
    s.delta_cb = s.drive.detuning + s.vapor.shift_total();
  } else {
    s.delta_cb = s.drive.detuning;
  }
  s.pump_detuning_bare = s.delta_cb - s.vapor.shift_total();

  // Span must cover the line generously; sampling must resolve the
  // narrowest component.
  const double linewidth = ghz_from_angular(s.vapor.gamma_self);
  if (cfg.probe_span_ghz < 6.0 * linewidth)
    throw ConfigError("config: probe_span_GHz: must cover at least 6 linewidths (" +
                      format_double(6.0 * linewidth) + " GHz)");
  s.grid_ghz = build_probe_grid(cfg.probe_center_ghz, cfg.probe_span_ghz, cfg.probe_points,
                                component_halfwidth_ghz(s.atom, s.vapor));
  s.config.probe_points = static_cast<int>(s.grid_ghz.size());
  s.probe.rabi_probe = angular_from_ghz(cfg.probe_rabi_ghz);
  s.probe.detuning_grid.resize(s.grid_ghz.size());
  for (std::size_t i = 0; i < s.grid_ghz.size(); ++i)
    s.probe.detuning_grid[i] = angular_from_ghz(s.grid_ghz[i]);
  return s;
}

SpectrumRun run_spectrum(const ScenarioConfig& cfg, int threads) {
  const auto start = Clock::now();
  SpectrumRun run;
  run.scenario = resolve_scenario(cfg, threads);
  const ResolvedScenario& s = run.scenario;

  const ReflectionModel model(s.atom, s.vapor, s.drive, s.window);
  run.spectrum = reflection_spectrum(model, s.probe, threads);
  run.spectrum.fm_signal = fm_signal_for(s, model, s.grid_ghz, threads, &run.grid_warning);
  run.floor_hits = model.denominator_floor_hits();
  for (const Complex& chi : run.spectrum.chi)
    if (chi.imag() < 0) ++run.gain_points;

  // Width estimation from the reflection max/min interval; their positions
  // coincide with the FM zero crossings.
  const ExtremaReport r_extrema = find_extrema(run.spectrum.reflectivity, run.spectrum.grid_ghz);
  run.analysis.delta_mm_ghz = r_extrema.delta_mm_ghz;
  if (r_extrema.delta_mm_ghz)
    run.analysis.width_estimate_ghz = width_from_mm(*r_extrema.delta_mm_ghz);
  const ExtremaReport fm_extrema = find_extrema(run.spectrum.fm_signal, run.spectrum.grid_ghz);
  for (const auto& z : fm_extrema.zero_crossings)
    run.analysis.fm_zero_crossings_ghz.push_back(z.position_ghz);

  if (s.rabi > 0) {
    const DoubletInit seed = doublet_seed(s);
    DoubletFit fit = fit_windowed(run.spectrum.fm_signal, run.spectrum.grid_ghz, seed);
    if (fit.converged && std::abs(fit.amp1) + std::abs(fit.amp2) > 0)
      run.analysis.doublet_asymmetry = asymmetry(fit);
    run.analysis.doublet = std::move(fit);
  }
  run.wall_ms = ms_since(start);
  return run;
}

SweepRun run_sweep(const ScenarioConfig& cfg, int threads) {
  const auto start = Clock::now();
  if (cfg.sweep_zero_detuning_rabis_ghz.empty() &&
      (!cfg.sweep_fixed_rabi_ghz || cfg.sweep_detunings_ghz.empty()))
    throw ConfigError(
        "config: sweep requires sweep_zero_detuning_rabis_GHz and/or sweep_fixed_rabi_GHz with "
        "sweep_detunings_GHz");

  std::vector<std::pair<double, double>> axis;  // (rabi, detuning) GHz
  for (double rabi : cfg.sweep_zero_detuning_rabis_ghz) axis.emplace_back(rabi, 0.0);
  if (cfg.sweep_fixed_rabi_ghz)
    for (double det : cfg.sweep_detunings_ghz) axis.emplace_back(*cfg.sweep_fixed_rabi_ghz, det);
  if (axis.size() < 2) throw ConfigError("config: sweep needs at least two points");

  SweepRun run;
  ScenarioConfig base = cfg;
  base.sweep_zero_detuning_rabis_ghz.clear();
  base.sweep_detunings_ghz.clear();
  base.sweep_fixed_rabi_ghz.reset();

  bool any_converged = false;
  for (const auto& [rabi_ghz, det_ghz] : axis) {
    ScenarioConfig point_cfg = base;
    point_cfg.pump_rabi_ghz = rabi_ghz;
    point_cfg.pump_power_w.reset();
    point_cfg.pump_detuning_ghz = det_ghz;

    SweepPoint point;
    point.rabi_ghz = rabi_ghz;
    point.detuning_ghz = det_ghz;
    point.omega_tilde_knob_ghz = std::hypot(rabi_ghz, det_ghz);
    point.omega_tilde_ghz = point.omega_tilde_knob_ghz;
    try {
      const SpectrumRun spectrum = run_spectrum(point_cfg, threads);
      // The splitting scales with the pump detuning from the actual
      // (shifted) resonance, not with the knob offset.
      point.delta_cb_ghz = ghz_from_angular(spectrum.scenario.delta_cb);
      point.omega_tilde_ghz = std::hypot(rabi_ghz, point.delta_cb_ghz);
      if (spectrum.analysis.doublet) {
        point.fit = *spectrum.analysis.doublet;
        point.converged = point.fit.converged;
        if (spectrum.analysis.doublet_asymmetry) point.asymmetry = *spectrum.analysis.doublet_asymmetry;
      }
    } catch (const ConvergenceError&) {
      point.converged = false;
    }
    any_converged = any_converged || point.converged;
    run.points.push_back(std::move(point));
  }
  if (!any_converged)
    throw ConvergenceError("sweep: every per-point doublet fit failed", 0, 0,
                           static_cast<int>(axis.size()));

  std::vector<std::pair<double, double>> samples;
  for (const auto& p : run.points)
    if (p.converged) samples.emplace_back(p.omega_tilde_ghz, p.fit.splitting_ghz);
  run.line = fit_linear(samples, true);
  run.line_free = fit_linear(samples, false);
  run.config = cfg;
  run.wall_ms = ms_since(start);
  return run;
}

FitRun run_fit_file(const std::filesystem::path& csv_path, std::optional<DoubletInit> init) {
  std::ifstream in(csv_path);
  if (!in) throw IoError("cannot open '" + csv_path.string() + "'");

  std::vector<double> grid, signal;
  std::string line;
  long line_no = 0;
  int detuning_col = 0, signal_col = 1, columns = -1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (line_no == 1) {
      // Optional header: accept the spectrum schema or any two columns.
      bool numeric = true;
      try {
        std::size_t used = 0;
        std::stod(cells.at(0), &used);
      } catch (...) {
        numeric = false;
      }
      if (!numeric) {
        const auto find_col = [&cells](const std::string& name) {
          for (std::size_t i = 0; i < cells.size(); ++i)
            if (cells[i] == name) return static_cast<int>(i);
          return -1;
        };
        detuning_col = find_col("detuning_GHz");
        signal_col = find_col("FM_signal");
        if (signal_col < 0 && cells.size() == 2) signal_col = 1;
        if (detuning_col < 0) detuning_col = 0;
        if (signal_col < 0)
          throw ParseError(csv_path.string() + ":1: header lacks an FM_signal or 2-column layout",
                           1);
        columns = static_cast<int>(cells.size());
        continue;
      }
    }
    if (columns < 0) columns = static_cast<int>(cells.size());
    if (static_cast<int>(cells.size()) != columns)
      throw ParseError(csv_path.string() + ":" + std::to_string(line_no) + ": expected " +
                           std::to_string(columns) + " columns, got " + std::to_string(cells.size()),
                       line_no);
    if (signal_col >= columns || detuning_col >= columns)
      throw ParseError(csv_path.string() + ":" + std::to_string(line_no) + ": too few columns",
                       line_no);
    try {
      std::size_t used = 0;
      const double x = std::stod(cells[detuning_col], &used);
      const double y = std::stod(cells[signal_col], &used);
      grid.push_back(x);
      signal.push_back(y);
    } catch (const std::exception&) {
      throw ParseError(csv_path.string() + ":" + std::to_string(line_no) + ": malformed number",
                       line_no);
    }
  }
  if (grid.size() < 50)
    throw ParseError(csv_path.string() + ": need at least 50 data rows, got " +
                         std::to_string(grid.size()),
                     line_no);

  FitRun run;
  run.rows = grid.size();
  try {
    DoubletInit seed;
    if (init) {
      seed = *init;
    } else {
      seed = detect_doublet(signal, grid);
    }
    // Fit the doublet region; far tails carry structure outside the model
    // family (the dispersive envelope of the carrier line).
    auto [b, e] = fit_window(grid, seed);
    if (e - b < 50) {
      b = 0;
      e = grid.size();
    }
    run.fit = fit_doublet(std::span(signal).subspan(b, e - b),
                          std::span(grid).subspan(b, e - b), seed);
    if (run.fit.converged && std::abs(run.fit.amp1) + std::abs(run.fit.amp2) > 0)
      run.fit_asymmetry = asymmetry(run.fit);
  } catch (const std::invalid_argument& e) {
    run.degenerate = true;
    run.note = e.what();
  }
  return run;
}

// -------------------------------------------------------------------------
// Output writers.

void write_spectrum_csv(const std::filesystem::path& path, const ComplexSpectrum& spectrum) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << "detuning_GHz,Re_chi,Im_chi,Re_n,Im_n,R,FM_signal\n";
  for (std::size_t i = 0; i < spectrum.grid_ghz.size(); ++i) {
    out << format_double(spectrum.grid_ghz[i]) << ',' << format_double(spectrum.chi[i].real())
        << ',' << format_double(spectrum.chi[i].imag()) << ',' << format_double(spectrum.n[i].real())
        << ',' << format_double(spectrum.n[i].imag()) << ','
        << format_double(spectrum.reflectivity[i]) << ','
        << format_double(i < spectrum.fm_signal.size() ? spectrum.fm_signal[i] : 0.0) << "\n";
  }
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

namespace {

json spectrum_to_json(const ComplexSpectrum& spectrum) {
  json j;
  j["detuning_GHz"] = spectrum.grid_ghz;
  auto part = [&spectrum](bool real) {
    std::vector<double> v(spectrum.chi.size());
    for (std::size_t i = 0; i < v.size(); ++i)
      v[i] = real ? spectrum.chi[i].real() : spectrum.chi[i].imag();
    return v;
  };
  j["Re_chi"] = part(true);
  j["Im_chi"] = part(false);
  std::vector<double> re_n(spectrum.n.size()), im_n(spectrum.n.size());
  for (std::size_t i = 0; i < spectrum.n.size(); ++i) {
    re_n[i] = spectrum.n[i].real();
    im_n[i] = spectrum.n[i].imag();
  }
  j["Re_n"] = re_n;
  j["Im_n"] = im_n;
  j["R"] = spectrum.reflectivity;
  j["FM_signal"] = spectrum.fm_signal;
  return j;
}

json fit_to_json(const DoubletFit& fit) {
  json j;
  j["splitting_GHz"] = fit.splitting_ghz;
  j["width_GHz"] = fit.width_ghz;
  j["center_GHz"] = fit.center_ghz;
  j["amplitude_1"] = fit.amp1;
  j["amplitude_2"] = fit.amp2;
  j["phase_rad"] = fit.phase;
  j["baseline"] = fit.baseline;
  j["baseline_slope"] = fit.baseline_slope;
  j["residual_rms"] = fit.residual_rms;
  j["converged"] = fit.converged;
  j["iterations"] = fit.iterations;
  j["gradient_norm"] = fit.gradient_norm;
  return j;
}

json echo_to_json(const ScenarioConfig& cfg) {
  json j;
  for (const auto& [key, value] : config_echo(cfg)) j[key] = value;
  return j;
}

json scenario_report(const SpectrumRun& run) {
  const ResolvedScenario& s = run.scenario;
  json derived;
  if (s.intensity_w_cm2) derived["intensity_W_cm2"] = *s.intensity_w_cm2;
  derived["rabi_GHz"] = ghz_from_angular(s.rabi);
  derived["pump_detuning_GHz"] = s.config.pump_detuning_ghz;
  if (s.symmetric_offset_ghz) derived["symmetric_offset_GHz"] = *s.symmetric_offset_ghz;
  derived["effective_pump_detuning_GHz"] = ghz_from_angular(s.delta_cb);
  derived["pump_detuning_bare_GHz"] = ghz_from_angular(s.pump_detuning_bare);
  derived["generalized_rabi_GHz"] =
      std::hypot(ghz_from_angular(s.rabi), s.config.pump_detuning_ghz);
  derived["gamma_self_GHz"] = ghz_from_angular(s.vapor.gamma_self);
  derived["lorentz_shift_GHz"] = ghz_from_angular(s.vapor.lorentz_shift);
  derived["collisional_shift_GHz"] = ghz_from_angular(s.vapor.collisional_shift);
  derived["populations_per_cm3"] = {{"n_a", s.vapor.n_a},
                                    {"n_b", s.vapor.n_b},
                                    {"n_c", s.vapor.n_c},
                                    {"total", s.vapor.density}};
  derived["solver"] = {{"iterations", s.vapor.solver_iterations},
                       {"residual", s.vapor.solver_residual}};

  json analysis;
  if (run.analysis.delta_mm_ghz) analysis["delta_mm_GHz"] = *run.analysis.delta_mm_ghz;
  if (run.analysis.width_estimate_ghz)
    analysis["width_estimate_GHz"] = *run.analysis.width_estimate_ghz;
  analysis["fm_zero_crossings_GHz"] = run.analysis.fm_zero_crossings_ghz;
  if (run.analysis.doublet) analysis["doublet_fit"] = fit_to_json(*run.analysis.doublet);
  if (run.analysis.doublet_asymmetry) analysis["asymmetry"] = *run.analysis.doublet_asymmetry;

  json j;
  j["scenario"] = s.config.scenario_id;
  j["kind"] = "spectrum";
  j["config"] = echo_to_json(s.config);
  j["derived"] = derived;
  j["analysis"] = analysis;
  j["denominator_floor_hits"] = run.floor_hits;
  j["gain_points"] = run.gain_points;
  j["wall_ms"] = run.wall_ms;
  return j;
}

void write_json(const std::filesystem::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << j.dump(2) << "\n";
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

}  // namespace

void write_spectrum_json(const std::filesystem::path& path, const ComplexSpectrum& spectrum) {
  write_json(path, spectrum_to_json(spectrum));
}

void write_spectrum_report(const std::filesystem::path& path, const SpectrumRun& run,
                           const std::vector<std::string>& output_files) {
  json j = scenario_report(run);
  j["outputs"] = output_files;
  write_json(path, j);
}

void write_sweep_csv(const std::filesystem::path& path, const SweepRun& run) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << "omega_tilde_GHz,splitting_GHz,width_GHz,asymmetry\n";
  for (const auto& p : run.points) {
    // Failed fits keep their row, flagged with NaNs.
    const double nan = std::numeric_limits<double>::quiet_NaN();
    out << format_double(p.omega_tilde_ghz) << ','
        << format_double(p.converged ? p.fit.splitting_ghz : nan) << ','
        << format_double(p.converged ? p.fit.width_ghz : nan) << ','
        << format_double(p.converged ? p.asymmetry : nan) << "\n";
  }
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

void write_sweep_report(const std::filesystem::path& path, const SweepRun& run,
                        const std::vector<std::string>& output_files) {
  json points = json::array();
  for (const auto& p : run.points) {
    json pj;
    pj["rabi_GHz"] = p.rabi_ghz;
    pj["detuning_GHz"] = p.detuning_ghz;
    pj["effective_pump_detuning_GHz"] = p.delta_cb_ghz;
    pj["omega_tilde_GHz"] = p.omega_tilde_ghz;
    pj["omega_tilde_knob_GHz"] = p.omega_tilde_knob_ghz;
    pj["converged"] = p.converged;
    if (p.converged) {
      pj["fit"] = fit_to_json(p.fit);
      pj["asymmetry"] = p.asymmetry;
    }
    points.push_back(std::move(pj));
  }
  auto line_json = [](const LinearFit& line) {
    json lj;
    lj["slope"] = line.slope;
    lj["intercept"] = line.intercept;
    lj["slope_stderr"] = line.slope_stderr;
    lj["through_origin"] = line.through_origin;
    lj["n_points"] = line.n_points;
    return lj;
  };
  json j;
  j["scenario"] = run.config.scenario_id;
  j["kind"] = "sweep";
  j["config"] = echo_to_json(run.config);
  j["points"] = points;
  j["linear_fit"] = line_json(run.line);
  j["linear_fit_free_intercept"] = line_json(run.line_free);
  j["outputs"] = output_files;
  j["wall_ms"] = run.wall_ms;
  write_json(path, j);
}

void write_fit_report(const std::filesystem::path& path, const FitRun& run,
                      const std::string& input_file) {
  json j;
  j["kind"] = "fit";
  j["input"] = input_file;
  j["rows"] = run.rows;
  j["degenerate"] = run.degenerate;
  if (!run.note.empty()) j["note"] = run.note;
  if (!run.degenerate) {
    j["fit"] = fit_to_json(run.fit);
    if (run.fit_asymmetry) j["asymmetry"] = *run.fit_asymmetry;
    j["residual_trace"] = run.fit.residual_trace;
  }
  write_json(path, j);
}

std::filesystem::path preset_dir(const std::string& cli_override) {
  if (!cli_override.empty()) return cli_override;
  if (const char* env = std::getenv("SRFM_PRESETS")) return env;
#ifdef SRFM_PRESET_DIR
  if (std::filesystem::exists(SRFM_PRESET_DIR)) return SRFM_PRESET_DIR;
#endif
  return "presets/v1";
}

std::vector<std::string> preset_names(const std::string& figure) {
  if (figure == "fig2a" || figure == "fig2b" || figure == "fig2c" || figure == "fig2d" ||
      figure == "fig3")
    return {figure};
  if (figure == "fig4") return {"fig4_delta0", "fig4_delta3"};
  throw ConfigError("unknown figure '" + figure +
                    "' (expected fig2a, fig2b, fig2c, fig2d, fig3 or fig4)");
}

}  // namespace srfm
