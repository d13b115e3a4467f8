#pragma once

// Unit conventions used throughout:
//  - frequencies and rates are angular, in rad/ns, inside the model;
//  - all I/O (config, CSV, reports) uses ordinary frequency in GHz;
//  - lengths are cm, number densities cm^-3, intensities W/cm^2.
// 1 GHz of ordinary frequency equals 2*pi rad/ns of angular frequency.

namespace srfm {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

// CGS constants, used only by the field/dipole form of the Rabi frequency.
inline constexpr double kSpeedOfLightCmS = 2.99792458e10;   // cm/s
inline constexpr double kHbarErgS = 1.054571817e-27;        // erg s
inline constexpr double kStatCPerElementaryCharge = 4.80320425e-10;

constexpr double angular_from_ghz(double nu_ghz) { return kTwoPi * nu_ghz; }
constexpr double ghz_from_angular(double omega) { return omega / kTwoPi; }

}  // namespace srfm
