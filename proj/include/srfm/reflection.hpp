#pragma once

#include <atomic>
#include <functional>
#include <span>
#include <vector>

#include "srfm/core_model.hpp"

namespace srfm {

struct WindowMedium {
  double n0 = 1.76;  // cell window index (sapphire near 770 nm)
  void validate() const;
};

/// Frequency-modulation / lock-in parameters. mod_range is the peak-to-peak
/// excursion of the probe frequency; the modulation rate is quasi-static and
/// recorded only.
struct FmParams {
  double mod_range_ghz = 0.1;
  double mod_rate_hz = 400.0;
  int harmonic = 1;
  int cycle_samples = 64;
  void validate() const;
};

/// Spectrum channels over a common probe-detuning grid. The grid is the bare
/// probe detuning (w_ab - w_p)/2pi in GHz, strictly increasing.
struct ComplexSpectrum {
  std::vector<double> grid_ghz;
  std::vector<Complex> chi;
  std::vector<Complex> n;
  std::vector<double> reflectivity;
  std::vector<double> fm_signal;
};

/// Normal-incidence intensity reflectivity of the window/vapor interface.
double reflectivity(Complex n_vapor, const WindowMedium& window);

/// Evaluates chi, n and R of one scenario at any probe detuning. All methods
/// are const and safe to call concurrently.
class ReflectionModel {
 public:
  ReflectionModel(const AtomSystem& atom, const VaporState& vapor, const DriveField& drive,
                  const WindowMedium& window);

  Complex chi_at_ghz(double probe_detuning_ghz) const;
  Complex index_at_ghz(double probe_detuning_ghz) const;
  double reflectivity_at_ghz(double probe_detuning_ghz) const;

  const VaporState& vapor() const { return vapor_; }
  const WindowMedium& window() const { return window_; }
  double drive_rabi() const { return rabi_; }
  double pump_detuning_bare() const { return pump_bare_; }
  long denominator_floor_hits() const { return floor_hits_.load(); }

 private:
  AtomSystem atom_;
  VaporState vapor_;
  WindowMedium window_;
  double rabi_;
  double pump_bare_;
  mutable std::atomic<long> floor_hits_{0};
};

/// Uniform probe grid in GHz. Spacing is tightened if needed so the
/// narrowest expected feature is sampled by at least ten points.
std::vector<double> build_probe_grid(double center_ghz, double span_ghz, int points,
                                     double narrowest_feature_ghz);

/// chi/n/R channels, no FM. threads <= 1 runs serially.
ComplexSpectrum reflection_spectrum(const ReflectionModel& model, std::span<const double> grid_ghz,
                                    int threads = 1);

/// Same, driven by a ProbeField whose detuning grid is in angular units.
ComplexSpectrum reflection_spectrum(const ReflectionModel& model, const ProbeField& probe,
                                    int threads = 1);

using ReflectivityFn = std::function<double(double)>;

/// Small-modulation (first-harmonic) limit: (dR/dnu) * mod_range/2, with the
/// derivative taken by central differences at a step refined well below the
/// grid spacing. When the stored grid undersamples the spectral features
/// (adjacent output samples jump by more than half the signal peak),
/// grid_too_coarse is set as a diagnostic; values stay exact per point.
std::vector<double> fm_spectrum_derivative(const ReflectivityFn& refl,
                                           std::span<const double> grid_ghz, const FmParams& fm,
                                           int threads = 1, bool* grid_too_coarse = nullptr);

/// Quasi-static lock-in demodulation at the requested harmonic, evaluated by
/// uniform quadrature over one modulation cycle.
std::vector<double> fm_spectrum_lockin(const ReflectivityFn& refl, std::span<const double> grid_ghz,
                                       const FmParams& fm, int threads = 1);

}  // namespace srfm
