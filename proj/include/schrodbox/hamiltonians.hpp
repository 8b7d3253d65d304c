#pragma once

#include <cmath>
#include <optional>
#include <span>
#include <vector>

#include "schrodbox/constants.hpp"
#include "schrodbox/errors.hpp"
#include "schrodbox/field.hpp"

namespace schrodbox {

enum class ModelKind { effective_mass, tight_binding };

// Edge handling for the standalone stencil appliers. Production runs clamp
// (wave function pinned to zero beyond the ends); the periodic variant exists
// for eigenvalue and hermiticity checks on a test ring.
enum class Topology { clamped, periodic };

// Discretized model parameters. Both kinds reduce to the same three point
// stencil; the tight-binding pair (rho, u) of the effective-mass model is
// rho = hbar^2/(m* dx^2), u = -hbar^2/(2 m* dx^2).
struct ModelSpec {
    ModelKind kind = ModelKind::effective_mass;
    double m_star = 0.2 * kElectronMass;  // eV fs^2/nm^2
    double rho = 0.0;                     // eV, on-site energy
    double u = 0.0;                       // eV, hopping
};

inline double hopping_for_mass(double m_star, double dx) {
    return -kHbar * kHbar / (2.0 * m_star * dx * dx);
}

inline double mass_for_hopping(double u, double dx) {
    return -kHbar * kHbar / (2.0 * u * dx * dx);
}

// Fill in whichever half of the parameter set was left implicit.
inline ModelSpec resolve_model(ModelSpec m, double dx) {
    if (m.u == 0.0) {
        m.u = hopping_for_mass(m.m_star, dx);
        m.rho = -2.0 * m.u;
    } else if (m.m_star <= 0.0) {
        m.m_star = mass_for_hopping(m.u, dx);
    }
    return m;
}

inline double dispersion(const ModelSpec& model, double k, double dx) {
    if (model.kind == ModelKind::effective_mass) {
        return kHbar * kHbar * k * k / (2.0 * model.m_star);
    }
    return model.rho + 2.0 * model.u * std::cos(k * dx);
}

// Positive-branch inversion of the dispersion relation.
inline double wavevector_from_energy(const ModelSpec& model, double energy, double dx) {
    if (model.kind == ModelKind::effective_mass) {
        if (energy < 0.0) throw DomainError("negative energy has no real wavevector");
        return std::sqrt(2.0 * model.m_star * energy) / kHbar;
    }
    if (model.u == 0.0) throw DomainError("tight-binding hopping is zero");
    const double c = (energy - model.rho) / (2.0 * model.u);
    if (c < -1.0 || c > 1.0) {
        throw OutOfBand("energy outside the band [rho-2|u|, rho+2|u|]");
    }
    return std::acos(c) / dx;
}

namespace detail {

inline int wrap_prev(int j, int n, Topology topo) {
    if (j > 0) return j - 1;
    return topo == Topology::periodic ? n - 1 : -1;  // -1 marks a zero neighbor
}

inline int wrap_next(int j, int n, Topology topo) {
    if (j < n - 1) return j + 1;
    return topo == Topology::periodic ? 0 : -1;
}

// H psi for a tridiagonal row with real coefficients lo/diag/hi per node.
inline CField apply_tridiag(const CField& f, std::span<const double> lo,
                            std::span<const double> diag, std::span<const double> hi,
                            Topology topo) {
    const int n = static_cast<int>(f.size());
    CField out(f.size());
    for (int j = 0; j < n; ++j) {
        const int jm = wrap_prev(j, n, topo);
        const int jp = wrap_next(j, n, topo);
        double re = diag[j] * f.re[j];
        double im = diag[j] * f.im[j];
        if (jm >= 0) {
            re += lo[j] * f.re[jm];
            im += lo[j] * f.im[jm];
        }
        if (jp >= 0) {
            re += hi[j] * f.re[jp];
            im += hi[j] * f.im[jp];
        }
        out.re[j] = re;
        out.im[j] = im;
    }
    return out;
}

}  // namespace detail

// H = -hbar^2/(2 m*) d2/dx2 + U on a uniform grid.
inline CField apply_effective_mass(const CField& f, double m_star, double dx,
                                   std::span<const double> potential = {},
                                   Topology topo = Topology::clamped) {
    const int n = static_cast<int>(f.size());
    const double u = hopping_for_mass(m_star, dx);
    std::vector<double> lo(n, u), hi(n, u), diag(n, -2.0 * u);
    for (int j = 0; j < n && j < static_cast<int>(potential.size()); ++j)
        diag[j] += potential[j];
    return detail::apply_tridiag(f, lo, diag, hi, topo);
}

// Nearest-neighbour chain: (H psi)_j = (rho + U_j) psi_j + u (psi_{j-1} + psi_{j+1}).
inline CField apply_tight_binding(const CField& f, double rho, double u,
                                  std::span<const double> potential = {},
                                  Topology topo = Topology::clamped) {
    const int n = static_cast<int>(f.size());
    std::vector<double> lo(n, u), hi(n, u), diag(n, rho);
    for (int j = 0; j < n && j < static_cast<int>(potential.size()); ++j)
        diag[j] += potential[j];
    return detail::apply_tridiag(f, lo, diag, hi, topo);
}

// Kinetic operator after the coordinate change x -> z: the second derivative
// picks up c1 = (c')^2 and a first-derivative term with coefficient c2 = c''.
// c1/c2 are sampled per node; dz is the uniform computational spacing.
inline CField apply_remapped(const CField& f, double m_star, double dz,
                             std::span<const double> c1, std::span<const double> c2,
                             std::span<const double> potential = {}) {
    const int n = static_cast<int>(f.size());
    const double pre = -kHbar * kHbar / (2.0 * m_star);
    std::vector<double> lo(n), hi(n), diag(n);
    for (int j = 0; j < n; ++j) {
        const double second = c1[j] / (dz * dz);
        const double first = c2[j] / (2.0 * dz);
        lo[j] = pre * (second - first);
        hi[j] = pre * (second + first);
        diag[j] = pre * (-2.0 * second);
        if (j < static_cast<int>(potential.size())) diag[j] += potential[j];
    }
    return detail::apply_tridiag(f, lo, diag, hi, Topology::clamped);
}

}  // namespace schrodbox
