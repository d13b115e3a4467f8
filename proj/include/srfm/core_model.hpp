#pragma once

#include <complex>
#include <optional>
#include <vector>

#include "srfm/units.hpp"

namespace srfm {

using Complex = std::complex<double>;

/// Species constants. Defaults describe the potassium D lines probed/driven
/// by the simulator; every value is configurable.
struct AtomSystem {
  double lambda_probe_cm = 770.0e-7;  // probe (D1) wavelength
  double lambda_drive_cm = 766.0e-7;  // drive (D2) wavelength
  double gamma_rad = angular_from_ghz(0.006);  // radiative rate on a->b, rad/ns
  double dipole_projection = 1.0 / 3.0;        // p_x / p along the field
  // Self-broadening coefficient, rad/ns per cm^-3. Default is calibrated so a
  // ground-state density of 4.9e17 cm^-3 gives a width of 28.4 GHz.
  double k_self = angular_from_ghz(28.4) / 4.9e17;
  double rabi_intensity_coefficient_hz = 8.0e7;  // Hz per sqrt(W/cm^2)

  void validate() const;  // throws std::invalid_argument on bad fields
};

/// Density and level populations with the derived collision quantities.
struct VaporState {
  double density = 0;  // total N, cm^-3
  double n_a = 0;      // probe excited level
  double n_b = 0;      // ground level
  double n_c = 0;      // drive excited level
  double gamma_self = 0;        // k_self * n_b, rad/ns
  double lorentz_shift = 0;     // (k_self/3) * (n_b - n_a), rad/ns
  double collisional_shift = 0; // excitation-independent, rad/ns
  int solver_iterations = 0;
  double solver_residual = 0;   // |n_c - map(n_b)| / N of the returned state

  double shift_total() const { return lorentz_shift + collisional_shift; }
};

/// How DriveField::detuning is referenced. kShifted measures the pump offset
/// from the line the dense vapor actually presents (bare resonance plus the
/// local-field and collisional shifts); kBare measures it from the bare
/// atomic resonance, in which case the shift tracks n_b inside the
/// population solve.
enum class PumpDetuningReference { kShifted, kBare };

struct DriveField {
  double power_w = 0;
  double beam_area_cm2 = 5.0e-4;
  std::optional<double> rabi;  // rad/ns; when set, overrides power/area
  double detuning = 0;         // rad/ns, see PumpDetuningReference
  PumpDetuningReference reference = PumpDetuningReference::kShifted;
  double population_decay = angular_from_ghz(0.006);  // Gamma_1, rad/ns
  // Forces n_c = f * N without running the saturation solve. Accepts the
  // full range [0, 1]; the saturation model itself never exceeds 1/2.
  std::optional<double> excitation_override;

  double resolved_rabi(const AtomSystem& atom) const;
  void validate() const;
};

/// Probe definition. The probe Rabi frequency is recorded but plays no role:
/// the response is evaluated in linear order in the probe.
struct ProbeField {
  double rabi_probe = 0;              // rad/ns, recorded only
  std::vector<double> detuning_grid;  // rad/ns, delta_bare = w_ab - w_p, increasing
};

/// Complex coherence decay rates entering the probe susceptibility.
/// Gamma_self is a full linewidth, so each rate carries half of it.
struct CoherenceRates {
  double gamma_ab_t = 0;  // gamma/2 + Gamma_self/2
  double gamma_cb_t = 0;  // gamma/2 + Gamma_self/2
  double gamma_ca_t = 0;  // gamma   + Gamma_self/2
  Complex Gamma_ab;       // gamma_ab_t + i*delta
  Complex Gamma_cb;       // gamma_cb_t + i*delta_cb
  Complex Gamma_ca;       // gamma_ca_t + i*delta_ca, delta_ca = delta_cb - delta
};

struct SolveOptions {
  double tol = 1e-10;   // relative to total density
  int max_iter = 500;
  double damping = 0.5;
};

struct SusceptibilityDiagnostics {
  long denominator_floor_hits = 0;
};

double intensity_from_power(double power_w, double area_cm2);       // W/cm^2
double rabi_from_intensity(const AtomSystem& atom, double intensity_w_cm2);  // rad/ns
double rabi_from_field(const AtomSystem& atom, double field_statv_cm, double dipole_e_cm);
double field_from_intensity(double intensity_w_cm2);                // statV/cm
// Full dipole moment (e*cm) that makes the field route reproduce the
// intensity-coefficient route exactly.
double dipole_matching_coefficient(const AtomSystem& atom);
double generalized_rabi(double rabi, double detuning);
double self_width(const AtomSystem& atom, double n_b);
double lorentz_shift(const AtomSystem& atom, double n_b, double n_a);

/// Self-consistent steady-state populations of the driven vapor. The probe
/// is perturbative, so n_a = 0 throughout. Throws ConvergenceError when the
/// damped fixed point does not settle within opts.max_iter.
VaporState steady_populations(const AtomSystem& atom, const DriveField& drive, double density,
                              double collisional_shift = 0, const SolveOptions& opts = {});

/// Pump detuning measured from the bare resonance for a given vapor state,
/// resolving DriveField::reference.
double pump_detuning_bare(const DriveField& drive, const VaporState& vapor);

/// Assembles the complex coherence rates for one probe grid point. Both
/// detunings are measured from the bare resonances; the local-field and
/// collisional shifts are applied here.
CoherenceRates coherence_rates(const AtomSystem& atom, const VaporState& vapor,
                               double probe_detuning_bare, double pump_detuning_bare);

/// Probe susceptibility of the driven vapor (dimensionless, Gaussian
/// convention). Positive imaginary part means absorption.
Complex susceptibility(const AtomSystem& atom, const VaporState& vapor, const CoherenceRates& rates,
                       double drive_rabi, SusceptibilityDiagnostics* diag = nullptr);

/// n = sqrt(1 + 4 pi chi) on the passive branch (Im n >= 0, Re n > 0 for
/// physical inputs).
Complex refractive_index(Complex chi);

}  // namespace srfm
