#include "srfm/reflection.hpp"

#include <cmath>
#include <stdexcept>
#include <thread>

namespace srfm {

namespace {

void require(bool ok, const char* message) {
  if (!ok) throw std::invalid_argument(message);
}

// Runs fn(i) for i in [0, n) over the requested number of threads. Each index
// writes only its own output slot, so results are thread-count independent.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn) {
  if (threads <= 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  const std::size_t nthreads = std::min<std::size_t>(threads, n);
  std::vector<std::thread> pool;
  pool.reserve(nthreads);
  for (std::size_t t = 0; t < nthreads; ++t) {
    pool.emplace_back([&, t] {
      for (std::size_t i = t; i < n; i += nthreads) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace

void WindowMedium::validate() const {
  if (!(n0 > 1.0)) throw std::invalid_argument("window: index must exceed 1");
}

void FmParams::validate() const {
  require(mod_range_ghz > 0, "fm: modulation range must be positive");
  require(harmonic >= 1, "fm: harmonic must be a positive integer");
  require(cycle_samples >= 8, "fm: at least 8 samples per cycle required");
}

double reflectivity(Complex n_vapor, const WindowMedium& window) {
  const Complex r = (n_vapor - window.n0) / (n_vapor + window.n0);
  return std::norm(r);
}

ReflectionModel::ReflectionModel(const AtomSystem& atom, const VaporState& vapor,
                                 const DriveField& drive, const WindowMedium& window)
    : atom_(atom), vapor_(vapor), window_(window) {
  window_.validate();
  rabi_ = drive.resolved_rabi(atom_);
  pump_bare_ = srfm::pump_detuning_bare(drive, vapor_);
}

Complex ReflectionModel::chi_at_ghz(double probe_detuning_ghz) const {
  const CoherenceRates rates =
      coherence_rates(atom_, vapor_, angular_from_ghz(probe_detuning_ghz), pump_bare_);
  SusceptibilityDiagnostics diag;
  const Complex chi = susceptibility(atom_, vapor_, rates, rabi_, &diag);
  if (diag.denominator_floor_hits) floor_hits_ += diag.denominator_floor_hits;
  return chi;
}

Complex ReflectionModel::index_at_ghz(double probe_detuning_ghz) const {
  return refractive_index(chi_at_ghz(probe_detuning_ghz));
}

double ReflectionModel::reflectivity_at_ghz(double probe_detuning_ghz) const {
  return reflectivity(index_at_ghz(probe_detuning_ghz), window_);
}

std::vector<double> build_probe_grid(double center_ghz, double span_ghz, int points,
                                     double narrowest_feature_ghz) {
  require(span_ghz > 0, "grid: span must be positive");
  require(points >= 2, "grid: at least two points required");
  if (narrowest_feature_ghz > 0) {
    const double needed = std::ceil(span_ghz * 10.0 / narrowest_feature_ghz) + 1.0;
    require(needed <= 5e6, "grid: span/feature ratio needs more than 5e6 points");
    if (needed > points) points = static_cast<int>(needed);
  }
  std::vector<double> grid(points);
  const double step = span_ghz / (points - 1);
  const double start = center_ghz - span_ghz / 2.0;
  for (int i = 0; i < points; ++i) grid[i] = start + i * step;
  return grid;
}

ComplexSpectrum reflection_spectrum(const ReflectionModel& model, std::span<const double> grid_ghz,
                                    int threads) {
  for (std::size_t i = 1; i < grid_ghz.size(); ++i)
    require(grid_ghz[i] > grid_ghz[i - 1], "grid: must be strictly increasing");
  ComplexSpectrum s;
  s.grid_ghz.assign(grid_ghz.begin(), grid_ghz.end());
  const std::size_t n = s.grid_ghz.size();
  s.chi.resize(n);
  s.n.resize(n);
  s.reflectivity.resize(n);
  parallel_for(n, threads, [&](std::size_t i) {
    const Complex chi = model.chi_at_ghz(s.grid_ghz[i]);
    const Complex idx = refractive_index(chi);
    s.chi[i] = chi;
    s.n[i] = idx;
    s.reflectivity[i] = reflectivity(idx, model.window());
  });
  return s;
}

ComplexSpectrum reflection_spectrum(const ReflectionModel& model, const ProbeField& probe,
                                    int threads) {
  std::vector<double> grid_ghz(probe.detuning_grid.size());
  for (std::size_t i = 0; i < grid_ghz.size(); ++i)
    grid_ghz[i] = ghz_from_angular(probe.detuning_grid[i]);
  return reflection_spectrum(model, grid_ghz, threads);
}

std::vector<double> fm_spectrum_derivative(const ReflectivityFn& refl,
                                           std::span<const double> grid_ghz, const FmParams& fm,
                                           int threads, bool* grid_too_coarse) {
  fm.validate();
  const std::size_t n = grid_ghz.size();
  std::vector<double> out(n, 0.0);
  if (grid_too_coarse) *grid_too_coarse = false;
  if (n == 0) return out;
  const double grid_step = n > 1 ? (grid_ghz[n - 1] - grid_ghz[0]) / (n - 1) : fm.mod_range_ghz;
  const double h = std::min(grid_step, fm.mod_range_ghz / 4.0);
  const double amplitude = fm.mod_range_ghz / 2.0;
  parallel_for(n, threads, [&](std::size_t i) {
    const double nu = grid_ghz[i];
    out[i] = (refl(nu + h) - refl(nu - h)) / (2.0 * h) * amplitude;
  });
  if (grid_too_coarse && n > 2) {
    double peak = 0;
    for (double v : out) peak = std::max(peak, std::abs(v));
    for (std::size_t i = 1; i < n; ++i) {
      if (std::abs(out[i] - out[i - 1]) > 0.5 * peak) {
        *grid_too_coarse = true;
        break;
      }
    }
  }
  return out;
}

std::vector<double> fm_spectrum_lockin(const ReflectivityFn& refl, std::span<const double> grid_ghz,
                                       const FmParams& fm, int threads) {
  fm.validate();
  const std::size_t n = grid_ghz.size();
  std::vector<double> out(n, 0.0);
  const int m = fm.cycle_samples;
  const double amplitude = fm.mod_range_ghz / 2.0;
  std::vector<double> sin_theta(m), sin_harmonic(m);
  for (int j = 0; j < m; ++j) {
    const double theta = kTwoPi * j / m;
    sin_theta[j] = std::sin(theta);
    sin_harmonic[j] = std::sin(fm.harmonic * theta);
  }
  parallel_for(n, threads, [&](std::size_t i) {
    const double nu = grid_ghz[i];
    double acc = 0.0;
    for (int j = 0; j < m; ++j) acc += refl(nu + amplitude * sin_theta[j]) * sin_harmonic[j];
    out[i] = 2.0 * acc / m;
  });
  return out;
}

}  // namespace srfm
