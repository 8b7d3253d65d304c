#pragma once

#include <cmath>
#include <complex>
#include <vector>

#include "schrodbox/constants.hpp"
#include "schrodbox/errors.hpp"
#include "schrodbox/field.hpp"
#include "schrodbox/grid.hpp"
#include "schrodbox/hamiltonians.hpp"

namespace schrodbox {

enum class Side { left, right };

// Free Gaussian packet: centre x0, width sigma0, carrier wavevector kx.
// kx > 0 travels rightward. injection_side records which reservoir feeds it.
struct GaussianParams {
    double x0 = 0.0;      // nm
    double sigma0 = 1.0;  // nm
    double kx = 0.0;      // 1/nm
    Side injection_side = Side::left;
};

inline double sigma_x_sq(double t, double m_star) {
    return kHbar * t / (2.0 * m_star);
}

// Gouy-type phase angle: sigma0^2 tan(2 theta) = hbar t / (2 m*), principal branch.
inline double gaussian_theta(double t, double sigma0, double m_star) {
    if (t < 0.0) throw DomainError("free packet is evaluated for t >= 0 only");
    return 0.5 * std::atan(sigma_x_sq(t, m_star) / (sigma0 * sigma0));
}

// Closed-form free evolution of the Gaussian packet.
inline cplx gaussian_value(double x, double t, const GaussianParams& p, double m_star) {
    if (t < 0.0) throw DomainError("free packet is evaluated for t >= 0 only");
    const double s0sq = p.sigma0 * p.sigma0;
    const double sxsq = sigma_x_sq(t, m_star);
    const double theta = 0.5 * std::atan(sxsq / s0sq);
    const double phase_t = -theta - p.kx * p.kx * sxsq;

    const double amp =
        std::pow(s0sq / (2.0 * M_PI * (s0sq * s0sq + sxsq * sxsq)), 0.25);
    const double xr = x - p.x0 - 2.0 * p.kx * sxsq;
    // exp[-xr^2 / (4 (s0^2 + i sx^2))]
    const cplx denom(4.0 * s0sq, 4.0 * sxsq);
    const cplx arg = -xr * xr / denom + cplx(0.0, phase_t + p.kx * (x - p.x0));
    return amp * std::exp(arg);
}

// Lattice correction: the three point stencil transports the carrier with a
// slower clock. Scale factor t' = tc * t, tc -> 1 as kx dx -> 0.
inline double time_correction_factor(double kx, double dx, double u, double m_star) {
    const double th = kx * dx;
    if (std::abs(th) < 1e-8) return 1.0;
    return -4.0 * u * m_star * (1.0 - std::cos(th)) / (kHbar * kHbar * kx * kx);
}

// Free packet as seen by the discretized model: for the chain the Gaussian is
// evaluated at the corrected time and rotated by the band offset rho + 2u.
inline cplx analytic_free_evolution(double x, double t, const GaussianParams& p,
                                    const ModelSpec& model, double dx) {
    if (model.kind == ModelKind::effective_mass) {
        return gaussian_value(x, t, p, model.m_star);
    }
    const double tc = time_correction_factor(p.kx, dx, model.u, model.m_star);
    const cplx rot = std::exp(cplx(0.0, -t * (model.rho + 2.0 * model.u) / kHbar));
    return rot * gaussian_value(x, tc * t, p, model.m_star);
}

// Initial packet sampled on grid nodes, renormalized so sum |psi|^2 dx = 1.
inline CField tb_initial_state(const Grid& g, const GaussianParams& p, double m_star) {
    // |psi|^2 has position spread sigma0; tails cut off by the grid edges must
    // stay below 1e-10 in probability.
    const double rt2s = std::sqrt(2.0) * p.sigma0;
    const double tail = 0.5 * std::erfc((p.x0 - g.x_min) / rt2s) +
                        0.5 * std::erfc((g.x_max - p.x0) / rt2s);
    if (tail > 1e-10) {
        throw TruncatedSupport("packet tail beyond the grid edges has probability " +
                               std::to_string(tail));
    }
    CField f(static_cast<std::size_t>(g.n_points));
    double nrm = 0.0;
    for (int j = 0; j < g.n_points; ++j) {
        const cplx v = gaussian_value(g.x(j), 0.0, p, m_star);
        f.set(j, v);
        nrm += std::norm(v);
    }
    nrm *= g.dx;
    const double scale = 1.0 / std::sqrt(nrm);
    for (int j = 0; j < g.n_points; ++j) {
        f.re[j] *= scale;
        f.im[j] *= scale;
    }
    return f;
}

}  // namespace schrodbox
