#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "schrodbox/constants.hpp"
#include "schrodbox/errors.hpp"

namespace schrodbox {

// Coordinate compression for an outer layer: z = K atan(x/K) squeezes the
// half line into a strip of width K pi/2. La is the strip width actually kept
// on the grid, K = 2 La / pi.
struct RemapSpec {
    double La = 20.0;  // nm
    double K() const { return 2.0 * La / M_PI; }
};

// Polynomial absorbing mask g(s) = 1 - (s/L)^m on a layer of nominal length L.
struct AbsorberSpec {
    int m_exp = 5;
    double length = 0.0;     // nm; ignored when auto_length
    bool auto_length = true; // size from the carrier wavelength
};

inline double map_to_compact(double x, double K) { return K * std::atan(x / K); }

inline double map_from_compact(double z, double K) {
    if (std::abs(z) >= K * M_PI / 2.0) {
        throw DomainError("compact coordinate outside (-K pi/2, K pi/2)");
    }
    return K * std::tan(z / K);
}

struct RemapCoefficients {
    double c1;  // (c')^2 evaluated at the node
    double c2;  // c'' evaluated at the node
};

inline RemapCoefficients remap_coefficients(double z, double K) {
    const double c = std::cos(z / K);
    const double s = std::sin(z / K);
    return {c * c * c * c, -2.0 / K * s * c * c * c};
}

// Layer long enough to absorb ten carrier wavelengths.
inline double choose_absorber_length(double kx) {
    if (std::abs(kx) < 1e-12) {
        throw DegenerateWavevector("absorber length undefined for kx = 0");
    }
    return 10.0 * 2.0 * M_PI / std::abs(kx);
}

// Width of the compressed layer that covers the first half of the mask,
// L_eff = K atan(L / 2K).
inline double effective_layer_width(double L, double K) {
    return K * std::atan(L / (2.0 * K));
}

// Mask sampled at layer-local offsets s >= 0 (distance from the window edge
// in grid coordinates). With a remap the polynomial argument is the
// uncompressed distance K tan(s/K). Values are clamped to [0, 1].
inline std::vector<double> absorber_mask(std::span<const double> s_values,
                                         const AbsorberSpec& abs,
                                         std::optional<double> remap_K = std::nullopt) {
    std::vector<double> g(s_values.size());
    for (std::size_t j = 0; j < s_values.size(); ++j) {
        double s = s_values[j];
        if (s < 0.0) throw DomainError("mask offset must be >= 0");
        if (remap_K) {
            const double lim = *remap_K * M_PI / 2.0;
            s = (s >= lim) ? std::numeric_limits<double>::infinity()
                           : *remap_K * std::tan(s / *remap_K);
        }
        const double v = 1.0 - std::pow(s / abs.length, abs.m_exp);
        g[j] = std::min(1.0, std::max(0.0, v));
    }
    return g;
}

struct ImaginaryPotential {
    std::vector<double> J;  // eV
    int floored_nodes = 0;  // mask values at/below the floor before the log
};

// Equivalent negative imaginary potential: multiplying by f once per step is
// the same as evolving with exp(-J dt / hbar), J = -(hbar/dt) log f.
inline ImaginaryPotential imaginary_potential(std::span<const double> mask, double dt) {
    if (!(dt > 0.0)) throw DomainError("dt must be positive");
    ImaginaryPotential out;
    out.J.resize(mask.size());
    for (std::size_t j = 0; j < mask.size(); ++j) {
        double f = mask[j];
        if (f < 0.0) throw NonPositiveMask("mask value below zero");
        if (f > 1.0) throw NonPositiveMask("mask value above one");
        if (f < 1e-300) {
            f = 1e-300;
            ++out.floored_nodes;
        }
        out.J[j] = -(kHbar / dt) * std::log(f);
    }
    return out;
}

}  // namespace schrodbox
