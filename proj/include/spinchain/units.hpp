#pragma once

// Unit conventions used throughout the library:
//   - angular frequencies in rad/us (internal) <-> ordinary frequencies in MHz (I/O)
//   - times in us, distances in nm, magnetic moments in erg/G (CGS)

namespace spinchain {

inline constexpr double kPi = 3.14159265358979323846264338327950288;
inline constexpr double kTwoPi = 2.0 * kPi;

// Riemann zeta(3), the convergence constant of the cubic dipole sums
inline constexpr double kZeta3 = 1.2020569031595942854;

// CGS constants for the dipole coupling at 1 nm
inline constexpr double kHbarErgSec = 1.054571817e-27;
inline constexpr double kBohrMagnetonErgPerGauss = 9.274e-21;
inline constexpr double kElectronGFactor = 2.0;

inline double mhz_to_rad_us(double f_mhz) { return kTwoPi * f_mhz; }
inline double rad_us_to_mhz(double w_rad_us) { return w_rad_us / kTwoPi; }

}  // namespace spinchain
