#pragma once

// Unit system used throughout: lengths in nm, times in fs, energies in eV.
// Masses then carry eV fs^2 / nm^2.

namespace schrodbox {

struct PhysicalConstants {
    double hbar;           // eV fs
    double electron_mass;  // eV fs^2 / nm^2
};

inline constexpr PhysicalConstants kPhysical{0.6582119569, 5.68563};

inline constexpr double kHbar = kPhysical.hbar;
inline constexpr double kElectronMass = kPhysical.electron_mass;

// Explicit leapfrog stays bounded for dt <= s * hbar / (2|u_kin| + U_max).
// The factor was fixed once by bracketing the observed blow-up threshold of
// the free kinetic stencil; the theoretical limit for that case is exactly 0.5.
inline constexpr double kLeapfrogSafetyFactor = 0.5;

}  // namespace schrodbox
