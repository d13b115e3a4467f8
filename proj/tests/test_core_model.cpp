#include "srfm/core_model.hpp"

#include <cmath>
#include <complex>
#include <vector>

#include "doctest.h"
#include "srfm/errors.hpp"

using namespace srfm;

namespace {

const double kCalibrationDensity = 4.9e17;

DriveField drive_with_rabi(double rabi_ghz, double detuning_ghz = 0) {
  DriveField d;
  d.rabi = angular_from_ghz(rabi_ghz);
  d.detuning = angular_from_ghz(detuning_ghz);
  return d;
}

}  // namespace

TEST_CASE("intensity from power and beam area") {
  CHECK(intensity_from_power(0.5, 5e-4) == doctest::Approx(1000.0).epsilon(1e-12));
  CHECK(intensity_from_power(0.0, 3e-3) == 0.0);
  CHECK(intensity_from_power(1.0, 1.0) == doctest::Approx(1.0));
  CHECK_THROWS_AS(intensity_from_power(1.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(intensity_from_power(-1.0, 1.0), std::invalid_argument);
}

TEST_CASE("rabi frequency from intensity") {
  AtomSystem atom;
  CHECK(ghz_from_angular(rabi_from_intensity(atom, 1.0)) == doctest::Approx(0.080).epsilon(1e-12));
  CHECK(rabi_from_intensity(atom, 0.0) == 0.0);
  const double expected_ghz = 8e7 * std::sqrt(1000.0) / 1e9;  // ~2.53 GHz
  CHECK(ghz_from_angular(rabi_from_intensity(atom, 1000.0)) ==
        doctest::Approx(expected_ghz).epsilon(1e-12));
  CHECK(ghz_from_angular(rabi_from_intensity(atom, 1000.0)) == doctest::Approx(2.53).epsilon(1e-3));
  CHECK_THROWS_AS(rabi_from_intensity(atom, -1.0), std::invalid_argument);
}

TEST_CASE("rabi frequency from field amplitude") {
  AtomSystem atom;
  const double dipole = dipole_matching_coefficient(atom);
  CHECK(rabi_from_field(atom, 0.0, dipole) == 0.0);

  // Doubling the field doubles the Rabi frequency.
  const double e1 = field_from_intensity(50.0);
  CHECK(rabi_from_field(atom, 2.0 * e1, dipole) ==
        doctest::Approx(2.0 * rabi_from_field(atom, e1, dipole)).epsilon(1e-12));

  // Round trip against the intensity-coefficient route.
  for (double intensity : {1.0, 42.0, 1000.0}) {
    const double via_field = rabi_from_field(atom, field_from_intensity(intensity), dipole);
    const double via_intensity = rabi_from_intensity(atom, intensity);
    CHECK(via_field == doctest::Approx(via_intensity).epsilon(1e-6));
  }
}

TEST_CASE("generalized rabi frequency") {
  const double rabi = angular_from_ghz(8.0);
  const double det = angular_from_ghz(6.0);
  CHECK(ghz_from_angular(generalized_rabi(rabi, det)) == doctest::Approx(10.0).epsilon(1e-12));
  CHECK(generalized_rabi(rabi, 0.0) == doctest::Approx(rabi));
  CHECK(generalized_rabi(rabi, -det) == doctest::Approx(generalized_rabi(rabi, det)));
  CHECK(generalized_rabi(rabi, det) >= rabi);
  CHECK(generalized_rabi(rabi, det) >= det);
}

TEST_CASE("self-broadened width calibration") {
  AtomSystem atom;
  CHECK(ghz_from_angular(self_width(atom, kCalibrationDensity)) ==
        doctest::Approx(28.4).epsilon(1e-9));
  CHECK(self_width(atom, 0.0) == 0.0);
  CHECK(self_width(atom, kCalibrationDensity / 2) ==
        doctest::Approx(self_width(atom, kCalibrationDensity) / 2).epsilon(1e-12));
}

TEST_CASE("lorentz local-field shift") {
  AtomSystem atom;
  // Unexcited vapor: shift equals a third of the self-broadened width.
  CHECK(ghz_from_angular(lorentz_shift(atom, kCalibrationDensity, 0.0)) ==
        doctest::Approx(28.4 / 3.0).epsilon(1e-9));
  CHECK(lorentz_shift(atom, 7e16, 7e16) == 0.0);
  CHECK(lorentz_shift(atom, 2e17, 1e17) ==
        doctest::Approx(2.0 * lorentz_shift(atom, 1.5e17, 1e17)).epsilon(1e-12));
}

TEST_CASE("steady populations: undriven vapor") {
  AtomSystem atom;
  const VaporState v = steady_populations(atom, drive_with_rabi(0.0), kCalibrationDensity);
  CHECK(v.n_b == kCalibrationDensity);
  CHECK(v.n_c == 0.0);
  CHECK(v.n_a == 0.0);
  CHECK(v.gamma_self == doctest::Approx(atom.k_self * kCalibrationDensity));
  CHECK(ghz_from_angular(v.lorentz_shift) == doctest::Approx(28.4 / 3.0).epsilon(1e-9));
}

TEST_CASE("steady populations: saturation limit") {
  AtomSystem atom;
  const VaporState v = steady_populations(atom, drive_with_rabi(500.0), kCalibrationDensity);
  CHECK(v.n_c / v.density == doctest::Approx(0.5).epsilon(1e-3));
  CHECK(v.n_c <= v.density / 2);
}

TEST_CASE("steady populations: excitation override") {
  AtomSystem atom;
  DriveField d = drive_with_rabi(0.0);
  d.excitation_override = 0.645;
  const VaporState v = steady_populations(atom, d, kCalibrationDensity);
  CHECK(v.n_b == doctest::Approx(0.355 * kCalibrationDensity).epsilon(1e-12));
  CHECK(v.n_c == doctest::Approx(0.645 * kCalibrationDensity).epsilon(1e-12));
  // Width ratio against the unexcited vapor reproduces the 11/31 narrowing.
  const VaporState unexcited = steady_populations(atom, drive_with_rabi(0.0), kCalibrationDensity);
  CHECK(v.gamma_self / unexcited.gamma_self == doctest::Approx(11.0 / 31.0).epsilon(1e-2));
}

TEST_CASE("steady populations: closure and fixed-point residual") {
  AtomSystem atom;
  SolveOptions opts;
  for (double rabi_ghz : {0.5, 2.0, 8.0, 12.0, 40.0}) {
    for (double det_ghz : {0.0, 3.0, -3.0, 15.0}) {
      for (double decay_scale : {1.0, 0.1, 0.01}) {
        for (auto ref : {PumpDetuningReference::kShifted, PumpDetuningReference::kBare}) {
          DriveField d = drive_with_rabi(rabi_ghz, det_ghz);
          d.reference = ref;
          d.population_decay = atom.gamma_rad * decay_scale;
          const VaporState v = steady_populations(atom, d, kCalibrationDensity, 0.0, opts);
          const double closure = std::abs(v.n_a + v.n_b + v.n_c - v.density) / v.density;
          CHECK(closure <= 1e-9);
          CHECK(v.solver_residual <= opts.tol);
          CHECK(v.solver_iterations <= opts.max_iter);
          CHECK(v.n_c <= v.density / 2 + 1e-9 * v.density);
        }
      }
    }
  }
}

TEST_CASE("steady populations: non-convergence carries the last iterate") {
  AtomSystem atom;
  SolveOptions opts;
  opts.max_iter = 2;
  bool thrown = false;
  try {
    steady_populations(atom, drive_with_rabi(12.0), kCalibrationDensity, 0.0, opts);
  } catch (const ConvergenceError& e) {
    thrown = true;
    CHECK(e.iterations == 2);
    CHECK(e.last_iterate > 0);
    CHECK(e.residual > opts.tol);
  }
  CHECK(thrown);
}

TEST_CASE("coherence rates: widths and detunings") {
  AtomSystem atom;
  const VaporState v = steady_populations(atom, drive_with_rabi(0.0), kCalibrationDensity);

  const CoherenceRates r = coherence_rates(atom, v, angular_from_ghz(3.0), angular_from_ghz(7.0));
  CHECK(r.gamma_ab_t == doctest::Approx(atom.gamma_rad / 2 + v.gamma_self / 2));
  CHECK(r.gamma_cb_t == doctest::Approx(atom.gamma_rad / 2 + v.gamma_self / 2));
  CHECK(r.gamma_ca_t == doctest::Approx(atom.gamma_rad + v.gamma_self / 2));

  // Self-broadening dominates: all rates approach the collisional half-width.
  CHECK(std::abs(r.gamma_ab_t - v.gamma_self / 2) / (v.gamma_self / 2) <=
        atom.gamma_rad / v.gamma_self);
  CHECK(std::abs(r.gamma_ca_t - v.gamma_self / 2) / (v.gamma_self / 2) <=
        2 * atom.gamma_rad / v.gamma_self + 1e-15);

  // Two-photon detuning is the difference of the shifted one-photon ones.
  CHECK(r.Gamma_ca.imag() == doctest::Approx(r.Gamma_cb.imag() - r.Gamma_ab.imag()).epsilon(1e-12));

  // No detunings and no shifts: all rates purely real.
  VaporState bare = v;
  bare.lorentz_shift = 0;
  bare.collisional_shift = 0;
  const CoherenceRates r0 = coherence_rates(atom, bare, 0.0, 0.0);
  CHECK(r0.Gamma_ab.imag() == 0.0);
  CHECK(r0.Gamma_cb.imag() == 0.0);
  CHECK(r0.Gamma_ca.imag() == 0.0);
}

TEST_CASE("susceptibility: two-level reduction at zero drive") {
  AtomSystem atom;
  const VaporState v = steady_populations(atom, drive_with_rabi(0.0), kCalibrationDensity);
  const double coupling = 3.0 * atom.dipole_projection * atom.dipole_projection;
  const double prefactor = 3.0 * std::pow(atom.lambda_probe_cm, 3) * atom.gamma_rad * coupling /
                           (32.0 * std::pow(kPi, 3));
  for (int i = 0; i <= 1000; ++i) {
    const double probe_ghz = -120.0 + 0.24 * i;
    const double probe = angular_from_ghz(probe_ghz);
    const CoherenceRates rates = coherence_rates(atom, v, probe, 0.0);
    const Complex chi = susceptibility(atom, v, rates, 0.0);
    const Complex two_level = Complex(0, 1) * prefactor * v.n_b / rates.Gamma_ab;
    CHECK(std::abs(chi - two_level) <= 1e-12 * std::abs(two_level));
  }
}

TEST_CASE("susceptibility: peak against the absorption cross-section oracle") {
  AtomSystem atom;
  const VaporState v = steady_populations(atom, drive_with_rabi(0.0), kCalibrationDensity);
  // Probe sitting exactly on the shifted resonance.
  const double probe_bare = -v.shift_total();
  const CoherenceRates rates = coherence_rates(atom, v, probe_bare, 0.0);
  const Complex chi = susceptibility(atom, v, rates, 0.0);

  // Independent oracle: peak absorption cross-section of the broadened
  // line, converted to Im chi. The transition couples to the probe with the
  // projected dipole, which scales the two-level cross-section by
  // 3 (p_x/p)^2. Everything in CGS rad/s.
  const double lambda = atom.lambda_probe_cm;
  const double gamma_rad_s = atom.gamma_rad * 1e9;
  const double gamma_ab_s = rates.gamma_ab_t * 1e9;
  const double strength = 3.0 * atom.dipole_projection * atom.dipole_projection;
  const double sigma_peak =
      3.0 * lambda * lambda / (2.0 * kPi) * strength * (gamma_rad_s / 2.0) / gamma_ab_s;
  const double omega = kTwoPi * kSpeedOfLightCmS / lambda;
  const double oracle = v.n_b * sigma_peak * kSpeedOfLightCmS / (4.0 * kPi * omega);
  CHECK(chi.imag() == doctest::Approx(oracle).epsilon(1e-3));
  CHECK(chi.imag() > 0);
}

TEST_CASE("susceptibility: symmetric about the shifted center at zero pump detuning") {
  AtomSystem atom;
  const DriveField d = drive_with_rabi(12.0, 0.0);
  const VaporState v = steady_populations(atom, d, kCalibrationDensity);
  const double rabi = d.resolved_rabi(atom);
  const double pump_bare = pump_detuning_bare(d, v);
  for (int i = 0; i <= 400; ++i) {
    const double delta_ghz = 0.2 * i;  // offset from the shifted center
    const double lo = -v.shift_total() - angular_from_ghz(delta_ghz);
    const double hi = -v.shift_total() + angular_from_ghz(delta_ghz);
    const Complex chi_lo = susceptibility(atom, v, coherence_rates(atom, v, lo, pump_bare), rabi);
    const Complex chi_hi = susceptibility(atom, v, coherence_rates(atom, v, hi, pump_bare), rabi);
    CHECK(std::abs(chi_lo.imag() - chi_hi.imag()) <= 1e-9 * std::abs(chi_hi.imag()) + 1e-15);
    CHECK(std::abs(chi_lo.real() + chi_hi.real()) <= 1e-9 * std::abs(chi_hi.real()) + 1e-15);
  }
}

TEST_CASE("susceptibility: driven vapor shows a doublet split by the Rabi frequency") {
  AtomSystem atom;
  const DriveField d = drive_with_rabi(12.0, 0.0);
  const VaporState v = steady_populations(atom, d, kCalibrationDensity);
  const double rabi = d.resolved_rabi(atom);
  const double pump_bare = pump_detuning_bare(d, v);

  std::vector<double> mag;
  std::vector<double> grid;
  for (int i = 0; i <= 4000; ++i) {
    const double ghz = -40.0 + 0.02 * i;
    const double probe = angular_from_ghz(ghz) - v.shift_total();
    mag.push_back(std::abs(susceptibility(atom, v, coherence_rates(atom, v, probe, pump_bare), rabi)));
    grid.push_back(ghz);
  }
  std::vector<double> peaks;
  for (std::size_t i = 1; i + 1 < mag.size(); ++i)
    if (mag[i] > mag[i - 1] && mag[i] > mag[i + 1]) peaks.push_back(grid[i]);
  REQUIRE(peaks.size() == 2);
  CHECK(std::abs(peaks.back() - peaks.front()) == doctest::Approx(12.0).epsilon(0.25));
}

TEST_CASE("refractive index branch rules") {
  CHECK(refractive_index(Complex(0, 0)) == Complex(1, 0));

  const Complex small(0, 1e-6);
  const Complex n_small = refractive_index(small);
  CHECK(n_small.imag() == doctest::Approx(2 * kPi * 1e-6).epsilon(1e-6));
  CHECK(n_small.real() == doctest::Approx(1.0).epsilon(1e-9));

  // 1 + 4 pi chi = -1 resolves to +i.
  const Complex chi_neg(-1.0 / (2.0 * kPi), 0.0);
  const Complex n_neg = refractive_index(chi_neg);
  CHECK(n_neg.real() == doctest::Approx(0.0));
  CHECK(n_neg.imag() == doctest::Approx(1.0).epsilon(1e-12));

  // Physical inputs stay on the passive branch.
  for (double re : {-0.2, -0.05, 0.0, 0.05, 0.2}) {
    for (double im : {0.0, 0.01, 0.1, 0.3}) {
      const Complex n = refractive_index(Complex(re, im));
      CHECK(n.imag() >= 0.0);
      if (im > 0) CHECK(n.real() > 0.0);
    }
  }
}
