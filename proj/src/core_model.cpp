#include "srfm/core_model.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "srfm/errors.hpp"

namespace srfm {

namespace {

constexpr double kDenominatorFloor = 1e-30;  // rad/ns, unreachable for positive widths

void require(bool ok, const char* message) {
  if (!ok) throw std::invalid_argument(message);
}

}  // namespace

void AtomSystem::validate() const {
  require(lambda_probe_cm > 0, "atom: lambda_probe must be positive");
  require(lambda_drive_cm > 0, "atom: lambda_drive must be positive");
  require(gamma_rad > 0, "atom: gamma_rad must be positive");
  require(dipole_projection > 0 && dipole_projection <= 1.0,
          "atom: dipole_projection must lie in (0, 1]");
  require(k_self > 0, "atom: k_self must be positive");
  require(rabi_intensity_coefficient_hz > 0, "atom: rabi intensity coefficient must be positive");
}

void DriveField::validate() const {
  require(power_w >= 0, "drive: power must be non-negative");
  require(beam_area_cm2 > 0, "drive: beam area must be positive");
  require(!rabi || *rabi >= 0, "drive: rabi must be non-negative");
  require(population_decay > 0, "drive: population decay must be positive");
  if (excitation_override)
    require(*excitation_override >= 0 && *excitation_override <= 1.0,
            "drive: excitation override must lie in [0, 1]");
}

double DriveField::resolved_rabi(const AtomSystem& atom) const {
  if (rabi) return *rabi;
  return rabi_from_intensity(atom, intensity_from_power(power_w, beam_area_cm2));
}

double intensity_from_power(double power_w, double area_cm2) {
  require(area_cm2 > 0, "intensity_from_power: area must be positive");
  require(power_w >= 0, "intensity_from_power: power must be non-negative");
  return power_w / area_cm2;
}

double rabi_from_intensity(const AtomSystem& atom, double intensity_w_cm2) {
  require(intensity_w_cm2 >= 0, "rabi_from_intensity: intensity must be non-negative");
  const double nu_ghz = atom.rabi_intensity_coefficient_hz * std::sqrt(intensity_w_cm2) * 1e-9;
  return angular_from_ghz(nu_ghz);
}

double rabi_from_field(const AtomSystem& atom, double field_statv_cm, double dipole_e_cm) {
  require(field_statv_cm >= 0, "rabi_from_field: field must be non-negative");
  require(dipole_e_cm > 0, "rabi_from_field: dipole must be positive");
  const double dipole_esu = dipole_e_cm * kStatCPerElementaryCharge;
  const double omega_rad_s = field_statv_cm * dipole_esu * atom.dipole_projection / kHbarErgS;
  return omega_rad_s * 1e-9;  // rad/s -> rad/ns
}

double field_from_intensity(double intensity_w_cm2) {
  require(intensity_w_cm2 >= 0, "field_from_intensity: intensity must be non-negative");
  const double intensity_cgs = intensity_w_cm2 * 1e7;  // erg s^-1 cm^-2
  return std::sqrt(8.0 * kPi * intensity_cgs / kSpeedOfLightCmS);
}

double dipole_matching_coefficient(const AtomSystem& atom) {
  // Invert Omega = E * p * projection / hbar at I = 1 W/cm^2 against the
  // intensity-coefficient form of the same Rabi frequency.
  const double omega_rad_s = kTwoPi * atom.rabi_intensity_coefficient_hz;
  const double field = field_from_intensity(1.0);
  const double dipole_esu = omega_rad_s * kHbarErgS / (field * atom.dipole_projection);
  return dipole_esu / kStatCPerElementaryCharge;
}

double generalized_rabi(double rabi, double detuning) { return std::hypot(rabi, detuning); }

double self_width(const AtomSystem& atom, double n_b) {
  require(n_b >= 0, "self_width: population must be non-negative");
  return atom.k_self * n_b;
}

double lorentz_shift(const AtomSystem& atom, double n_b, double n_a) {
  require(n_b >= 0 && n_a >= 0, "lorentz_shift: populations must be non-negative");
  return atom.k_self / 3.0 * (n_b - n_a);
}

namespace {

// Steady-state excited population of the saturated b<->c transition for a
// given ground population guess. Gamma_self is a full linewidth; it enters
// the coherence decay as Gamma_self / 2.
double saturated_n_c(const AtomSystem& atom, const DriveField& drive, double density,
                     double collisional_shift, double rabi, double n_b) {
  const double gamma_cb = atom.gamma_rad / 2.0 + atom.k_self * n_b / 2.0;
  double delta_cb = drive.detuning;
  if (drive.reference == PumpDetuningReference::kBare)
    delta_cb += atom.k_self * n_b / 3.0 + collisional_shift;
  const double sat = rabi * rabi * gamma_cb / drive.population_decay;
  return density * 0.5 * sat / (delta_cb * delta_cb + gamma_cb * gamma_cb + sat);
}

}  // namespace

VaporState steady_populations(const AtomSystem& atom, const DriveField& drive, double density,
                              double collisional_shift, const SolveOptions& opts) {
  atom.validate();
  drive.validate();
  require(density > 0, "steady_populations: density must be positive");
  require(opts.tol > 0, "steady_populations: tolerance must be positive");
  require(opts.max_iter > 0, "steady_populations: max_iter must be positive");

  VaporState vapor;
  vapor.density = density;
  vapor.n_a = 0;
  vapor.collisional_shift = collisional_shift;

  const double rabi = drive.resolved_rabi(atom);
  if (drive.excitation_override) {
    vapor.n_c = *drive.excitation_override * density;
    vapor.n_b = density - vapor.n_c;
  } else if (rabi == 0) {
    vapor.n_c = 0;
    vapor.n_b = density;
  } else {
    double n_b = density;
    bool converged = false;
    int iter = 0;
    double residual = 0;
    while (iter < opts.max_iter) {
      ++iter;
      const double n_c = saturated_n_c(atom, drive, density, collisional_shift, rabi, n_b);
      const double n_b_next = density - n_c;
      residual = std::abs(n_b_next - n_b) / density;
      if (residual <= opts.tol) {
        n_b = n_b_next;
        converged = true;
        break;
      }
      n_b += opts.damping * (n_b_next - n_b);
    }
    if (!converged)
      throw ConvergenceError("steady_populations: fixed point did not converge to tol=" +
                                 std::to_string(opts.tol) + " in " + std::to_string(opts.max_iter) +
                                 " iterations",
                             n_b, residual, iter);
    vapor.n_b = n_b;
    // Close the state on its own defining equation.
    vapor.n_c = saturated_n_c(atom, drive, density, collisional_shift, rabi, vapor.n_b);
    vapor.solver_iterations = iter;
  }
  vapor.solver_residual =
      std::abs(vapor.n_c - saturated_n_c(atom, drive, density, collisional_shift, rabi, vapor.n_b)) /
      density;
  if (drive.excitation_override || rabi == 0) {
    // No fixed point involved; the state satisfies its definition exactly.
    vapor.solver_residual = 0;
    vapor.solver_iterations = 0;
  }
  vapor.gamma_self = self_width(atom, vapor.n_b);
  vapor.lorentz_shift = lorentz_shift(atom, vapor.n_b, vapor.n_a);
  return vapor;
}

double pump_detuning_bare(const DriveField& drive, const VaporState& vapor) {
  if (drive.reference == PumpDetuningReference::kBare) return drive.detuning;
  return drive.detuning - vapor.shift_total();
}

CoherenceRates coherence_rates(const AtomSystem& atom, const VaporState& vapor,
                               double probe_detuning_bare, double pump_detuning_bare) {
  // gamma_self is the self-broadened linewidth (full width); the coherence
  // decay rates carry half of it on top of the radiative part.
  const double gs_half = vapor.gamma_self / 2.0;
  const double g = atom.gamma_rad;
  CoherenceRates rates;
  rates.gamma_ab_t = g / 2.0 + gs_half;
  rates.gamma_cb_t = g / 2.0 + gs_half;
  rates.gamma_ca_t = g + gs_half;
  const double shift = vapor.shift_total();
  const double delta = probe_detuning_bare + shift;
  const double delta_cb = pump_detuning_bare + shift;
  const double delta_ca = delta_cb - delta;  // shift cancels in the two-photon detuning
  rates.Gamma_ab = Complex(rates.gamma_ab_t, delta);
  rates.Gamma_cb = Complex(rates.gamma_cb_t, delta_cb);
  rates.Gamma_ca = Complex(rates.gamma_ca_t, delta_ca);
  return rates;
}

Complex susceptibility(const AtomSystem& atom, const VaporState& vapor, const CoherenceRates& rates,
                       double drive_rabi, SusceptibilityDiagnostics* diag) {
  require(rates.gamma_ab_t > 0 && rates.gamma_cb_t > 0 && rates.gamma_ca_t > 0,
          "susceptibility: coherence decay rates must be positive");
  // Two-level prefactor reduced by the probe coupling strength: the probe
  // drives the transition with the projected dipole, so the line strength
  // carries 3 * (p_x / p)^2 relative to the full two-level value.
  const double lambda = atom.lambda_probe_cm;
  const double coupling = 3.0 * atom.dipole_projection * atom.dipole_projection;
  const double prefactor =
      3.0 * lambda * lambda * lambda * atom.gamma_rad * coupling / (32.0 * kPi * kPi * kPi);

  // The drive couples through the half-Rabi matrix element; the probed
  // coherence chain runs through sigma_ac and sigma_bc, hence the conjugated
  // two-photon and pump rates.
  const double q = 0.5 * drive_rabi;
  const Complex gamma_ca_conj = std::conj(rates.Gamma_ca);
  const Complex gamma_cb_conj = std::conj(rates.Gamma_cb);

  Complex numerator = Complex(vapor.n_b - vapor.n_a, 0.0);
  Complex denominator = rates.Gamma_ab;
  if (q != 0.0) {
    numerator -= q * q * (vapor.n_b - vapor.n_c) / (gamma_cb_conj * gamma_ca_conj);
    denominator += q * q / gamma_ca_conj;
  }
  if (std::abs(denominator) < kDenominatorFloor) {
    if (diag) ++diag->denominator_floor_hits;
    denominator = Complex(kDenominatorFloor, 0.0);
  }
  return Complex(0.0, 1.0) * prefactor * numerator / denominator;
}

Complex refractive_index(Complex chi) {
  const Complex u = 1.0 + 4.0 * kPi * chi;
  Complex n = std::sqrt(u);  // principal branch, Re >= 0
  if (n.imag() < 0) n = -n;  // passive branch
  return n;
}

}  // namespace srfm
