#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "schrodbox/boundaries.hpp"
#include "schrodbox/constants.hpp"
#include "schrodbox/grid.hpp"
#include "schrodbox/hamiltonians.hpp"
#include "schrodbox/packets.hpp"
#include "schrodbox/potential.hpp"

namespace schrodbox {

// Everything attached to one end of the transport window.
struct BoundaryConfig {
    bool analytic_injection = false;
    std::optional<AbsorberSpec> absorber;
    std::optional<RemapSpec> remap;
};

enum class StopKind {
    window_norm_below,  // total probability inside [a,b] fell below threshold
    tail_norm_below,    // probability left of b fell below threshold
    none,               // run the full step budget
};

struct StopRule {
    StopKind kind = StopKind::window_norm_below;
    double threshold = 1e-3;
};

struct OutputSpec {
    int cadence = 100;  // record every this many steps
    bool csv = true;
    bool ndjson = false;
    bool snapshots = false;
    bool full_grid_snapshots = false;  // default records the window [a,b] only
    std::string out_dir;
};

struct SimulationConfig {
    // transport window and discretization
    double a = 0.0;   // nm
    double b = 50.0;  // nm
    double dx = 0.2;  // nm
    double dt = 0.01; // fs
    long max_steps = 2000000;

    ModelSpec model;
    GaussianParams packet;
    double energy_ev = 0.0;  // > 0 derives |kx| from the dispersion

    PotentialSpec potential;
    BoundaryConfig left;
    BoundaryConfig right;
    StopRule stop;

    // extent used by wide reference runs
    double oracle_x_min = -800.0;
    double oracle_x_max = 800.0;

    OutputSpec output;

    // literal scheme masks the left layer from step one; switching this off
    // holds the left mask at 1 until the packet has entered the window
    bool left_mask_during_injection = true;

    unsigned long seed = 0;  // echoed into reports; the pipeline is deterministic
};

// Fill the derived quantities: tight-binding pair from the mass (or the mass
// from an explicit pair), carrier wavevector from the energy, absorber
// lengths from the wavevector, potential window.
inline SimulationConfig resolve_config(SimulationConfig c) {
    c.model = resolve_model(c.model, c.dx);
    if (c.energy_ev > 0.0) {
        // Carrier from the parabolic inversion E = hbar^2 k^2 / 2m*; on the
        // lattice the band correction enters through the group-velocity factor.
        const double k = std::sqrt(2.0 * c.model.m_star * c.energy_ev) / kHbar;
        c.packet.kx = (c.packet.injection_side == Side::left) ? k : -k;
    }
    for (BoundaryConfig* side : {&c.left, &c.right}) {
        if (side->absorber && side->absorber->auto_length) {
            side->absorber->length = choose_absorber_length(c.packet.kx);
        }
    }
    c.potential.a = c.a;
    c.potential.b = c.b;
    return c;
}

// Width of the simulated layer on one side of the window.
inline double layer_width(const BoundaryConfig& side) {
    if (side.remap && side.absorber) {
        return effective_layer_width(side.absorber->length, side.remap->K());
    }
    if (side.remap) return side.remap->La;
    if (side.absorber) return side.absorber->length;
    return 0.0;
}

inline double stability_limit(const SimulationConfig& c) {
    const double u_kin = std::abs(c.model.u) > 0.0
                             ? std::abs(c.model.u)
                             : kHbar * kHbar / (2.0 * c.model.m_star * c.dx * c.dx);
    const double u_max = c.potential.max_abs_value();
    return kLeapfrogSafetyFactor * kHbar / (2.0 * u_kin + u_max);
}

// Static checks; an empty list means the config is runnable.
inline std::vector<std::string> validate_config(const SimulationConfig& raw) {
    std::vector<std::string> v;
    SimulationConfig c = raw;
    try {
        c = resolve_config(raw);
    } catch (const Error& e) {
        v.push_back(std::string("config does not resolve: ") + e.what());
        return v;
    }

    if (!(c.dx > 0.0)) v.push_back("dx must be positive");
    if (!(c.dt > 0.0)) v.push_back("dt must be positive");
    if (c.max_steps < 1) v.push_back("max_steps must be >= 1");
    if (c.output.cadence < 1) v.push_back("output cadence must be >= 1");
    if (!(c.a < c.b)) v.push_back("window needs a < b");
    if (c.dx > 0.0 && c.a < c.b) {
        const double steps = (c.b - c.a) / c.dx;
        if (std::abs(steps - std::llround(steps)) > 1e-9 / c.dx)
            v.push_back("window width (b-a) is not a multiple of dx");
    }

    if (c.dt > 0.0 && c.dx > 0.0) {
        const double limit = stability_limit(c);
        if (c.dt > limit) {
            v.push_back("dt=" + std::to_string(c.dt) +
                        " exceeds the explicit stability limit " + std::to_string(limit));
        }
    }

    if (!(c.packet.sigma0 > 0.0)) v.push_back("packet sigma0 must be positive");
    if (c.packet.kx == 0.0 && c.energy_ev <= 0.0)
        v.push_back("packet needs kx or a positive energy");

    const bool inj_left = c.left.analytic_injection;
    const bool inj_right = c.right.analytic_injection;
    if (inj_left && inj_right) v.push_back("injection configured on both sides");
    if (inj_left) {
        if (c.packet.injection_side != Side::left)
            v.push_back("packet side disagrees with the injecting boundary");
        if (c.packet.kx <= 0.0) v.push_back("left injection needs kx > 0");
        if (c.packet.x0 > c.a - 5.0 * c.packet.sigma0)
            v.push_back("packet must start at least 5 sigma0 left of a");
    }
    if (inj_right) {
        if (c.packet.injection_side != Side::right)
            v.push_back("packet side disagrees with the injecting boundary");
        if (c.packet.kx >= 0.0) v.push_back("right injection needs kx < 0");
        if (c.packet.x0 < c.b + 5.0 * c.packet.sigma0)
            v.push_back("packet must start at least 5 sigma0 right of b");
    }

    for (const BoundaryConfig* side : {&c.left, &c.right}) {
        if (side->absorber) {
            if (side->absorber->m_exp < 3)
                v.push_back("absorber exponent must be >= 3");
            if (!(side->absorber->length > 0.0))
                v.push_back("absorber length must be positive");
        }
        if (side->remap && !(side->remap->La > 0.0))
            v.push_back("remap layer width La must be positive");
    }

    if (c.model.kind == ModelKind::tight_binding && c.model.u == 0.0)
        v.push_back("tight-binding hopping must be nonzero");
    if (c.energy_ev > 0.0 && c.model.kind == ModelKind::tight_binding) {
        const double lo = c.model.rho - 2.0 * std::abs(c.model.u);
        const double hi = c.model.rho + 2.0 * std::abs(c.model.u);
        if (c.energy_ev < lo || c.energy_ev > hi)
            v.push_back("energy outside the tight-binding band");
    }

    validate_potential(c.potential, v);

    if (!(c.oracle_x_min < c.a) || !(c.oracle_x_max > c.b))
        v.push_back("oracle extent must contain the window");

    return v;
}

}  // namespace schrodbox
