#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "schrodbox/integrator.hpp"

namespace schrodbox {

enum class ErrorKind { inj, ar, abs, rem, cut, tot };

inline const char* to_string(ErrorKind k) {
    switch (k) {
        case ErrorKind::inj: return "inj";
        case ErrorKind::ar: return "ar";
        case ErrorKind::abs: return "abs";
        case ErrorKind::rem: return "rem";
        case ErrorKind::cut: return "cut";
        default: return "tot";
    }
}

// L2 difference of two trajectories over their common region, one value per
// recorded time.
struct ErrorSeries {
    ErrorKind kind = ErrorKind::tot;
    std::vector<double> times;
    std::vector<double> values;

    double max_value() const {
        double m = 0.0;
        for (double v : values) m = std::max(m, v);
        return m;
    }

    // First record time with value > tau, +inf when the series never crosses.
    double first_crossing(double tau) const {
        for (std::size_t n = 0; n < values.size(); ++n) {
            if (values[n] > tau) return times[n];
        }
        return std::numeric_limits<double>::infinity();
    }
};

// Brute-force single-field run on the wide domain, no layers of any kind.
// The edges must stay quiet for the whole run; this is what makes the result
// usable as ground truth.
inline RunResult run_full_domain(const SimulationConfig& raw, EngineOptions opt = {}) {
    SimulationConfig c = raw;
    c.left = BoundaryConfig{};
    c.right = BoundaryConfig{};
    opt.split = false;
    opt.domain_x_min = c.oracle_x_min;
    opt.domain_x_max = c.oracle_x_max;
    opt.monitor_left_edge = true;
    opt.monitor_right_edge = true;
    return run_engine(c, opt);
}

// Analytic injection on the wide reference domain with every absorbing
// device switched off; isolates the error of the injection scheme itself.
inline RunResult run_injection_only(const SimulationConfig& raw, EngineOptions opt = {}) {
    SimulationConfig c = raw;
    c.left.absorber.reset();
    c.left.remap.reset();
    c.right = BoundaryConfig{};
    opt.split = true;
    opt.domain_x_min = c.oracle_x_min;
    opt.domain_x_max = c.oracle_x_max;
    return run_engine(c, opt);
}

// Single field, polynomial mask of full length on the right layer, no remap,
// left end kept far away.
inline RunResult run_absorb_only(const SimulationConfig& raw, EngineOptions opt = {}) {
    SimulationConfig c = raw;
    c.left = BoundaryConfig{};
    c.right.analytic_injection = false;
    c.right.remap.reset();
    if (!c.right.absorber) c.right.absorber = AbsorberSpec{};
    opt.split = false;
    opt.domain_x_min = c.oracle_x_min;
    opt.domain_x_max.reset();
    return run_engine(c, opt);
}

// Single field, contracted right layer with no damping at all; reflection is
// delayed by the contraction, not removed.
inline RunResult run_remap_only(const SimulationConfig& raw, EngineOptions opt = {}) {
    SimulationConfig c = raw;
    c.left = BoundaryConfig{};
    c.right.analytic_injection = false;
    c.right.absorber.reset();
    if (!c.right.remap) c.right.remap = RemapSpec{};
    opt.split = false;
    opt.domain_x_min = c.oracle_x_min;
    opt.domain_x_max.reset();
    return run_engine(c, opt);
}

// Single field with a hard wall: the grid simply ends at b plus the layer
// allowance and the endpoint stays pinned to zero.
inline RunResult run_truncated(const SimulationConfig& raw, EngineOptions opt = {}) {
    SimulationConfig c = resolve_config(raw);
    double ext = 0.0;
    if (c.right.remap) {
        ext = c.right.remap->La;
    } else if (c.right.absorber) {
        ext = c.right.absorber->length;
    }
    c.left = BoundaryConfig{};
    c.right = BoundaryConfig{};
    opt.split = false;
    opt.domain_x_min = c.oracle_x_min;
    opt.domain_x_max = c.b + std::round(ext / c.dx) * c.dx;
    return run_engine(c, opt);
}

// Pin a config to the step count of a finished oracle run so that records of
// a second run land on the same steps.
inline SimulationConfig aligned_to(SimulationConfig c, const RunReport& oracle) {
    c.max_steps = oracle.steps;
    c.stop.kind = StopKind::none;
    return c;
}

inline ErrorSeries overlap_error(const Trajectory& a, const Trajectory& b,
                                 ErrorKind kind = ErrorKind::tot) {
    if (a.frames.size() != b.frames.size()) {
        throw MisalignedTrajectories("trajectories hold " +
                                     std::to_string(a.frames.size()) + " and " +
                                     std::to_string(b.frames.size()) + " records");
    }
    if (std::abs(a.grid.dx - b.grid.dx) > 1e-12) {
        throw MisalignedTrajectories("grid spacing differs");
    }
    if (a.width() != b.width()) {
        throw MisalignedTrajectories("regions differ in width");
    }
    if (a.width() > 0 && std::abs(a.x_of(0) - b.x_of(0)) > 1e-9) {
        throw MisalignedTrajectories("regions start at different coordinates");
    }
    ErrorSeries es;
    es.kind = kind;
    es.times = a.times;
    es.values.reserve(a.frames.size());
    for (std::size_t n = 0; n < a.frames.size(); ++n) {
        if (std::abs(a.times[n] - b.times[n]) > 1e-9) {
            throw MisalignedTrajectories("record times diverge at index " +
                                         std::to_string(n));
        }
        const CField& fa = a.frames[n];
        const CField& fb = b.frames[n];
        double s = 0.0;
        for (std::size_t j = 0; j < fa.size(); ++j) {
            const double dre = fa.re[j] - fb.re[j];
            const double dim = fa.im[j] - fb.im[j];
            s += dre * dre + dim * dim;
        }
        es.values.push_back(s * a.grid.dx);
    }
    return es;
}

// Probability in a node range, weighted by the table quadrature (plain dx in
// the window, the map Jacobian on contracted layers).
inline double region_norm(const CField& f, const StencilTable& t, int j_begin,
                          int j_end) {
    double s = 0.0;
    const int lo = std::max(0, j_begin);
    const int hi = std::min(t.part.n - 1, j_end);
    for (int j = lo; j <= hi; ++j) s += t.weight[j] * abs_sq(f, j);
    return s;
}

inline double region_norm(const CField& f, double dx, std::size_t j_begin,
                          std::size_t j_end) {
    double s = 0.0;
    for (std::size_t j = j_begin; j <= j_end && j < f.size(); ++j)
        s += dx * abs_sq(f, j);
    return s;
}

// Trajectory with the same times and region as `like`, frames filled from a
// closed-form field(x, t). Used to compare runs against analytic evolution.
template <typename F>
inline Trajectory sampled_trajectory(const Trajectory& like, F&& field_at) {
    Trajectory out;
    out.grid = like.grid;
    out.dt = like.dt;
    out.cadence = like.cadence;
    out.j_begin = like.j_begin;
    out.j_end = like.j_end;
    out.times = like.times;
    out.frames.reserve(like.times.size());
    const int w = like.width();
    for (double t : like.times) {
        CField fr(w);
        for (int j = 0; j < w; ++j) fr.set(j, field_at(like.x_of(j), t));
        out.frames.push_back(std::move(fr));
    }
    return out;
}

}  // namespace schrodbox
