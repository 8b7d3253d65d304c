#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "schrodbox/config.hpp"
#include "schrodbox/field.hpp"
#include "schrodbox/grid.hpp"
#include "schrodbox/trajectory.hpp"

namespace schrodbox {

// Node regions of one run: il left of the window, ir right of it.
struct RegionPartition {
    int ia = 0;
    int ib = 0;
    int n = 0;
    bool in_window(int j) const { return j >= ia && j <= ib; }
};

// Per-node data frozen before stepping: tridiagonal rows of the kinetic
// Hamiltonian, physical coordinates, quadrature weights, absorbing masks.
// Interior nodes have lo = hi = u, diag = rho, weight = dx, mask = 1; layer
// nodes carry the remapped coefficients and the Jacobian dx/dz.
struct StencilTable {
    Grid grid;
    RegionPartition part;
    std::vector<double> lo, diag, hi;
    std::vector<double> x_phys;
    std::vector<double> weight;
    std::vector<double> mask_left, mask_right;  // 1 outside the owning layer
    std::vector<double> u_static;
    bool has_left_mask = false;
    bool has_right_mask = false;
};

namespace detail {

inline constexpr double kFarAway = 1e12;  // physical coordinate of the compressed edge

inline void fill_layer(StencilTable& t, const BoundaryConfig& side, bool is_left,
                       double m_star) {
    const Grid& g = t.grid;
    const int j0 = is_left ? 0 : t.part.ib + 1;
    const int j1 = is_left ? t.part.ia - 1 : g.n_points - 1;
    if (j0 > j1) return;
    const double edge = is_left ? g.a : g.b;

    std::vector<double> offsets;  // |z - edge| per node, for the mask
    offsets.reserve(j1 - j0 + 1);
    for (int j = j0; j <= j1; ++j) offsets.push_back(std::abs(g.x(j) - edge));

    if (side.remap) {
        const double K = side.remap->K();
        const double pre = -kHbar * kHbar / (2.0 * m_star);
        for (int j = j0; j <= j1; ++j) {
            const double z = g.x(j) - edge;  // signed layer coordinate
            if (std::abs(z) >= K * M_PI / 2.0 * (1.0 - 1e-12)) {
                // node at the compressed infinity: pinned to zero anyway
                t.lo[j] = t.hi[j] = t.diag[j] = 0.0;
                t.x_phys[j] = edge + (z < 0 ? -kFarAway : kFarAway);
                t.weight[j] = 0.0;
                continue;
            }
            const RemapCoefficients rc = remap_coefficients(z, K);
            const double second = rc.c1 / (g.dx * g.dx);
            const double first = rc.c2 / (2.0 * g.dx);
            t.lo[j] = pre * (second - first);
            t.hi[j] = pre * (second + first);
            t.diag[j] = pre * (-2.0 * second);
            t.x_phys[j] = edge + K * std::tan(z / K);
            const double c = std::cos(z / K);
            t.weight[j] = g.dx / (c * c);
        }
    }

    if (side.absorber) {
        std::optional<double> K;
        if (side.remap) K = side.remap->K();
        const std::vector<double> gmask = absorber_mask(offsets, *side.absorber, K);
        auto& dst = is_left ? t.mask_left : t.mask_right;
        for (int j = j0; j <= j1; ++j) dst[j] = gmask[j - j0];
        (is_left ? t.has_left_mask : t.has_right_mask) = true;
    }
}

}  // namespace detail

inline StencilTable make_stencil_table(const SimulationConfig& cfg, const Grid& grid) {
    StencilTable t;
    t.grid = grid;
    t.part = {grid.ia, grid.ib, grid.n_points};
    const int n = grid.n_points;
    t.lo.assign(n, cfg.model.u);
    t.hi.assign(n, cfg.model.u);
    t.diag.assign(n, cfg.model.rho);
    t.x_phys.resize(n);
    for (int j = 0; j < n; ++j) t.x_phys[j] = grid.x(j);
    t.weight.assign(n, grid.dx);
    t.mask_left.assign(n, 1.0);
    t.mask_right.assign(n, 1.0);
    t.u_static.assign(n, 0.0);
    if (cfg.potential.kind != PotentialKind::time_dependent_tabulated) {
        for (int j = 0; j < n; ++j) t.u_static[j] = cfg.potential.value(grid.x(j), 0.0);
    }
    detail::fill_layer(t, cfg.left, true, cfg.model.m_star);
    detail::fill_layer(t, cfg.right, false, cfg.model.m_star);
    return t;
}

// Two-level state of the split scheme. psi0 is the free injected packet, phi
// the correction; a single-field run keeps psi0 identically zero.
struct WaveState {
    CField phi_prev, phi_curr;
    CField psi0_prev, psi0_curr;
    long step = 0;
    double dt = 0.0;

    double t() const { return step * dt; }
};

inline CField reconstruct_total(const WaveState& s) {
    CField out(s.phi_curr.size());
    for (std::size_t j = 0; j < out.size(); ++j) {
        out.re[j] = s.phi_curr.re[j] + s.psi0_curr.re[j];
        out.im[j] = s.phi_curr.im[j] + s.psi0_curr.im[j];
    }
    return out;
}

namespace detail {

// next = prev + (2 dt / i hbar) (H curr + U (curr + src)), H from the table
// rows, endpoints pinned to zero. src may be empty (no source coupling).
inline void leapfrog_kernel(const StencilTable& t, double mu, const CField& prev,
                            const CField& curr, const double* u_t, const CField* src,
                            CField& next) {
    const int n = t.part.n;
    const double* lo = t.lo.data();
    const double* di = t.diag.data();
    const double* hi = t.hi.data();
    const double* cre = curr.re.data();
    const double* cim = curr.im.data();
    const double* pre = prev.re.data();
    const double* pim = prev.im.data();
    double* nre = next.re.data();
    double* nim = next.im.data();
    for (int j = 1; j < n - 1; ++j) {
        double hre = lo[j] * cre[j - 1] + di[j] * cre[j] + hi[j] * cre[j + 1];
        double him = lo[j] * cim[j - 1] + di[j] * cim[j] + hi[j] * cim[j + 1];
        if (u_t) {
            hre += u_t[j] * cre[j];
            him += u_t[j] * cim[j];
            if (src) {
                hre += u_t[j] * src->re[j];
                him += u_t[j] * src->im[j];
            }
        }
        nre[j] = pre[j] + mu * him;
        nim[j] = pim[j] - mu * hre;
    }
    nre[0] = nim[0] = 0.0;
    nre[n - 1] = nim[n - 1] = 0.0;
}

}  // namespace detail

// One leapfrog step of a free field (no potential, no source, no masks).
inline CField leapfrog_step(const StencilTable& t, double dt, const CField& prev,
                            const CField& curr) {
    CField next(curr.size());
    detail::leapfrog_kernel(t, 2.0 * dt / kHbar, prev, curr, nullptr, nullptr, next);
    return next;
}

// Correction-field update: masked leapfrog with the source term U (phi + psi0).
inline CField step_phi(const StencilTable& t, double dt, const CField& phi_prev,
                       const CField& phi_curr, const CField& psi0_curr,
                       const double* u_t) {
    CField next(phi_curr.size());
    detail::leapfrog_kernel(t, 2.0 * dt / kHbar, phi_prev, phi_curr, u_t, &psi0_curr,
                            next);
    for (int j = 0; j < t.part.n; ++j) {
        const double m = t.mask_left[j] * t.mask_right[j];
        next.re[j] *= m;
        next.im[j] *= m;
    }
    return next;
}

// Injected-field update: analytic values on the injection layer, free leapfrog
// in the window, masked free leapfrog on the far layer.
inline CField step_psi0(const StencilTable& t, const SimulationConfig& cfg, double dt,
                        const CField& psi0_prev, const CField& psi0_curr,
                        double t_next) {
    CField next(psi0_curr.size());
    detail::leapfrog_kernel(t, 2.0 * dt / kHbar, psi0_prev, psi0_curr, nullptr, nullptr,
                            next);
    const bool inj_left = cfg.left.analytic_injection;
    const bool inj_right = cfg.right.analytic_injection;
    if (inj_left) {
        for (int j = 0; j < t.part.ia; ++j) {
            next.set(j, analytic_free_evolution(t.x_phys[j], t_next, cfg.packet,
                                                cfg.model, cfg.dx));
        }
    }
    if (inj_right) {
        for (int j = t.part.ib + 1; j < t.part.n; ++j) {
            next.set(j, analytic_free_evolution(t.x_phys[j], t_next, cfg.packet,
                                                cfg.model, cfg.dx));
        }
    }
    for (int j = 0; j < t.part.n; ++j) {
        double m = 1.0;
        if (!inj_left) m *= t.mask_left[j];
        if (!inj_right) m *= t.mask_right[j];
        next.re[j] *= m;
        next.im[j] *= m;
    }
    return next;
}

// Fill psi0 levels 0 and 1 and take the forward-Euler first step of phi.
inline void bootstrap_first_step(const StencilTable& t, const SimulationConfig& cfg,
                                 WaveState& s) {
    const int n = t.part.n;
    s.dt = cfg.dt;
    s.step = 1;
    s.phi_prev = CField(n);
    s.phi_curr = CField(n);
    s.psi0_prev = CField(n);
    s.psi0_curr = CField(n);

    const bool injecting = cfg.left.analytic_injection || cfg.right.analytic_injection;
    if (injecting) {
        for (int j = 0; j < n; ++j) {
            s.psi0_prev.set(j, analytic_free_evolution(t.x_phys[j], 0.0, cfg.packet,
                                                       cfg.model, cfg.dx));
        }
    } else {
        s.psi0_prev = tb_initial_state(t.grid, cfg.packet, cfg.model.m_star);
    }
    for (int j = 0; j < n; ++j) {
        s.psi0_curr.set(j, analytic_free_evolution(t.x_phys[j], cfg.dt, cfg.packet,
                                                   cfg.model, cfg.dx));
    }
    // phi^1 = (dt / i hbar) U psi0^0; zero wherever the potential vanishes
    const double nu = cfg.dt / kHbar;
    for (int j = t.part.ia; j <= t.part.ib; ++j) {
        const double u0 = (cfg.potential.kind == PotentialKind::time_dependent_tabulated)
                              ? cfg.potential.value(t.grid.x(j), 0.0)
                              : t.u_static[j];
        if (u0 != 0.0) {
            s.phi_curr.re[j] = nu * u0 * s.psi0_prev.im[j];
            s.phi_curr.im[j] = -nu * u0 * s.psi0_prev.re[j];
        }
    }
}

struct RunReport {
    long steps = 0;
    double t_end = 0.0;
    bool stop_rule_fired = false;
    bool edge_stopped = false;
    double norm_window_final = 0.0;
    double norm_left_final = 0.0;
    double norm_right_final = 0.0;
    double absorbed_left = 0.0;   // probability removed by the left mask
    double absorbed_right = 0.0;  // probability removed by the right mask
    double accounting_total = 0.0;
    double wall_seconds = 0.0;
    unsigned long seed = 0;

    std::vector<long> rec_step;
    std::vector<double> rec_t;
    std::vector<double> rec_norm_window;
    std::vector<double> rec_norm_left;
    std::vector<double> rec_norm_right;
};

struct RunResult {
    RunReport report;
    Trajectory trajectory;
};

// View handed to the per-record callback while a run is in flight.
struct RecordView {
    long step;
    double t;
    const StencilTable& table;
    const CField& total;  // reconstructed field on the whole grid
    double norm_window;
    double norm_left;
    double norm_right;
};

struct EngineOptions {
    bool split = true;  // evolve psi0 + phi; otherwise a single field in phi
    bool strict_stop = false;
    bool monitor_left_edge = false;
    bool monitor_right_edge = false;
    bool edge_stop = false;  // end the run cleanly when a monitored edge trips
    std::optional<double> domain_x_min;
    std::optional<double> domain_x_max;
    std::function<void(const RecordView&)> on_record;
    bool keep_frames = true;
};

namespace detail {

struct NormTriple {
    double left = 0.0, window = 0.0, right = 0.0;
    double total() const { return left + window + right; }
};

inline NormTriple region_norms(const StencilTable& t, const CField& f) {
    NormTriple out;
    for (int j = 0; j < t.part.ia; ++j) out.left += t.weight[j] * abs_sq(f, j);
    for (int j = t.part.ia; j <= t.part.ib; ++j) out.window += t.weight[j] * abs_sq(f, j);
    for (int j = t.part.ib + 1; j < t.part.n; ++j) out.right += t.weight[j] * abs_sq(f, j);
    return out;
}

inline double edge_probability(const StencilTable& t, const CField& f, bool left) {
    // probability in the outermost ten nodes of an open edge
    double s = 0.0;
    const int n = t.part.n;
    const int w = std::min(10, n);
    if (left) {
        for (int j = 0; j < w; ++j) s += t.weight[j] * abs_sq(f, j);
    } else {
        for (int j = n - w; j < n; ++j) s += t.weight[j] * abs_sq(f, j);
    }
    return s;
}

}  // namespace detail

// Shared stepping loop behind run_combined and the reference runs.
inline RunResult run_engine(const SimulationConfig& raw, const EngineOptions& opt) {
    const auto wall0 = std::chrono::steady_clock::now();
    const SimulationConfig cfg = resolve_config(raw);

    double x_min = opt.domain_x_min.value_or(cfg.a);
    double x_max = opt.domain_x_max.value_or(cfg.b);
    if (!opt.domain_x_min) {
        const double w = layer_width(cfg.left);
        x_min = cfg.a - std::round(w / cfg.dx) * cfg.dx;
    }
    if (!opt.domain_x_max) {
        const double w = layer_width(cfg.right);
        x_max = cfg.b + std::round(w / cfg.dx) * cfg.dx;
    }
    const Grid grid = build_grid(x_min, x_max, cfg.dx, cfg.a, cfg.b);
    const StencilTable table = make_stencil_table(cfg, grid);
    const int n = grid.n_points;

    WaveState s;
    if (opt.split) {
        bootstrap_first_step(table, cfg, s);
    } else {
        s.dt = cfg.dt;
        s.step = 1;
        s.psi0_prev = CField(n);
        s.psi0_curr = CField(n);
        s.phi_prev = tb_initial_state(grid, cfg.packet, cfg.model.m_star);
        s.phi_curr = CField(n);
        const double nu = cfg.dt / kHbar;
        for (int j = 0; j < n; ++j) {
            cplx v = analytic_free_evolution(table.x_phys[j], cfg.dt, cfg.packet,
                                             cfg.model, cfg.dx);
            const double u0 = table.u_static[j];
            if (u0 != 0.0) {
                v += cplx(nu * u0 * s.phi_prev.im[j], -nu * u0 * s.phi_prev.re[j]);
            }
            s.phi_curr.set(j, v);
        }
    }

    const bool timedep_u = cfg.potential.kind == PotentialKind::time_dependent_tabulated;
    std::vector<double> u_step(timedep_u ? n : 0, 0.0);
    const double* u_t = timedep_u ? u_step.data() : table.u_static.data();
    bool any_u = timedep_u;
    if (!timedep_u) {
        for (double v : table.u_static)
            if (v != 0.0) {
                any_u = true;
                break;
            }
    }

    // Left mask can be deferred until the analytic packet centre reaches a.
    StencilTable work = table;
    bool left_mask_live = true;
    double t_entry = 0.0;
    if (cfg.left.analytic_injection && !cfg.left_mask_during_injection &&
        table.has_left_mask) {
        const double tc =
            time_correction_factor(cfg.packet.kx, cfg.dx, cfg.model.u, cfg.model.m_star);
        const double v = tc * kHbar * cfg.packet.kx / cfg.model.m_star;
        t_entry = (v > 0.0) ? (cfg.a - cfg.packet.x0) / v : 0.0;
        std::fill(work.mask_left.begin(), work.mask_left.end(), 1.0);
        left_mask_live = false;
    }

    RunReport rep;
    rep.seed = cfg.seed;
    Trajectory traj;
    traj.grid = grid;
    traj.dt = cfg.dt;
    traj.cadence = cfg.output.cadence;
    traj.j_begin = cfg.output.full_grid_snapshots ? 0 : grid.ia;
    traj.j_end = cfg.output.full_grid_snapshots ? n - 1 : grid.ib;

    const bool inj_left = cfg.left.analytic_injection;
    const bool inj_right = cfg.right.analytic_injection;
    CField phi_next(n), psi0_next(n), total(n);
    bool stop_armed = false;
    bool stopped = false;
    bool rule_fired = false;

    // The two-level scheme interleaves two weakly coupled chains of states and
    // the mask damps one chain per step. Absorption is tallied per parity and
    // the chain holding the final level is reported, so removed probability
    // matches the norm balance of that chain.
    double absorbed_left_chain[2] = {0.0, 0.0};
    double absorbed_right_chain[2] = {0.0, 0.0};

    auto record = [&](const WaveState& st) {
        for (int j = 0; j < n; ++j) {
            total.re[j] = st.phi_curr.re[j] + st.psi0_curr.re[j];
            total.im[j] = st.phi_curr.im[j] + st.psi0_curr.im[j];
        }
        const auto nt = detail::region_norms(work, total);
        rep.rec_step.push_back(st.step);
        rep.rec_t.push_back(st.t());
        rep.rec_norm_window.push_back(nt.window);
        rep.rec_norm_left.push_back(nt.left);
        rep.rec_norm_right.push_back(nt.right);

        if (!all_finite(total) || max_abs(total) > 1e6) {
            throw NumericalBlowup("field diverged at step " + std::to_string(st.step) +
                                  " (t=" + std::to_string(st.t()) + " fs)");
        }
        if (opt.monitor_left_edge &&
            detail::edge_probability(work, total, true) > 1e-10) {
            if (!opt.edge_stop) {
                throw BoundaryContamination(
                    "probability reached the left grid edge at t=" +
                    std::to_string(st.t()) + " fs");
            }
            rep.edge_stopped = true;
            stopped = true;
        }
        if (opt.monitor_right_edge &&
            detail::edge_probability(work, total, false) > 1e-10) {
            if (!opt.edge_stop) {
                throw BoundaryContamination(
                    "probability reached the right grid edge at t=" +
                    std::to_string(st.t()) + " fs");
            }
            rep.edge_stopped = true;
            stopped = true;
        }

        if (opt.keep_frames) {
            CField frame(traj.j_end - traj.j_begin + 1);
            for (int j = traj.j_begin; j <= traj.j_end; ++j) {
                frame.re[j - traj.j_begin] = total.re[j];
                frame.im[j - traj.j_begin] = total.im[j];
            }
            traj.times.push_back(st.t());
            traj.frames.push_back(std::move(frame));
        }
        if (opt.on_record) {
            opt.on_record(RecordView{st.step, st.t(), work, total, nt.window, nt.left,
                                     nt.right});
        }

        // stop rules arm once the monitored quantity has clearly exceeded the
        // threshold, so a packet that starts outside the window does not stop
        // the run at step one
        double gauge = 0.0;
        if (cfg.stop.kind == StopKind::window_norm_below) {
            gauge = nt.window;
        } else if (cfg.stop.kind == StopKind::tail_norm_below) {
            gauge = nt.left + nt.window;
        } else {
            return;
        }
        if (!stop_armed && gauge > 10.0 * cfg.stop.threshold) stop_armed = true;
        if (stop_armed && gauge < cfg.stop.threshold) {
            stopped = true;
            rule_fired = true;
        }
    };

    record(s);  // step 1 state

    while (s.step < cfg.max_steps && !stopped) {
        const double t_now = s.t();
        const double t_next = t_now + cfg.dt;
        if (timedep_u) {
            std::fill(u_step.begin(), u_step.end(), 0.0);
            for (int j = grid.ia; j <= grid.ib; ++j)
                u_step[j] = cfg.potential.value(grid.x(j), t_now);
        }
        if (!left_mask_live && t_next >= t_entry) {
            work.mask_left = table.mask_left;
            left_mask_live = true;
        }

        detail::leapfrog_kernel(work, 2.0 * cfg.dt / kHbar, s.phi_prev, s.phi_curr,
                                any_u ? u_t : nullptr, opt.split ? &s.psi0_curr : nullptr,
                                phi_next);
        if (opt.split) {
            detail::leapfrog_kernel(work, 2.0 * cfg.dt / kHbar, s.psi0_prev, s.psi0_curr,
                                    nullptr, nullptr, psi0_next);
            if (inj_left) {
                for (int j = 0; j < work.part.ia; ++j) {
                    psi0_next.set(j, analytic_free_evolution(work.x_phys[j], t_next,
                                                             cfg.packet, cfg.model,
                                                             cfg.dx));
                }
            }
            if (inj_right) {
                for (int j = work.part.ib + 1; j < n; ++j) {
                    psi0_next.set(j, analytic_free_evolution(work.x_phys[j], t_next,
                                                             cfg.packet, cfg.model,
                                                             cfg.dx));
                }
            }
        }

        // absorb and account: left layer
        if (work.has_left_mask) {
            double loss = 0.0;
            for (int j = 0; j < work.part.ia; ++j) {
                const double g = work.mask_left[j];
                const double gg = 1.0 - g * g;
                if (inj_left) {
                    // analytic psi0 is replaced, only phi is damped
                    loss += work.weight[j] * gg *
                            (phi_next.re[j] * phi_next.re[j] +
                             phi_next.im[j] * phi_next.im[j]);
                    phi_next.re[j] *= g;
                    phi_next.im[j] *= g;
                } else {
                    const double tre = phi_next.re[j] + psi0_next.re[j];
                    const double tim = phi_next.im[j] + psi0_next.im[j];
                    loss += work.weight[j] * gg * (tre * tre + tim * tim);
                    phi_next.re[j] *= g;
                    phi_next.im[j] *= g;
                    psi0_next.re[j] *= g;
                    psi0_next.im[j] *= g;
                }
            }
            absorbed_left_chain[(s.step + 1) & 1] += loss;
        }
        if (work.has_right_mask) {
            double loss = 0.0;
            for (int j = work.part.ib + 1; j < n; ++j) {
                const double g = work.mask_right[j];
                const double gg = 1.0 - g * g;
                if (inj_right) {
                    loss += work.weight[j] * gg *
                            (phi_next.re[j] * phi_next.re[j] +
                             phi_next.im[j] * phi_next.im[j]);
                    phi_next.re[j] *= g;
                    phi_next.im[j] *= g;
                } else {
                    const double tre = phi_next.re[j] + psi0_next.re[j];
                    const double tim = phi_next.im[j] + psi0_next.im[j];
                    loss += work.weight[j] * gg * (tre * tre + tim * tim);
                    phi_next.re[j] *= g;
                    phi_next.im[j] *= g;
                    psi0_next.re[j] *= g;
                    psi0_next.im[j] *= g;
                }
            }
            absorbed_right_chain[(s.step + 1) & 1] += loss;
        }

        std::swap(s.phi_prev, s.phi_curr);
        std::swap(s.phi_curr, phi_next);
        if (opt.split) {
            std::swap(s.psi0_prev, s.psi0_curr);
            std::swap(s.psi0_curr, psi0_next);
        }
        ++s.step;

        if (s.step % cfg.output.cadence == 0) record(s);
    }

    if (!stopped && cfg.stop.kind != StopKind::none && opt.strict_stop) {
        throw StopRuleNeverMet("step budget exhausted at t=" + std::to_string(s.t()) +
                               " fs before the stop rule fired");
    }

    rep.steps = s.step;
    rep.t_end = s.t();
    rep.stop_rule_fired = rule_fired;
    rep.absorbed_left = absorbed_left_chain[s.step & 1];
    rep.absorbed_right = absorbed_right_chain[s.step & 1];
    for (int j = 0; j < n; ++j) {
        total.re[j] = s.phi_curr.re[j] + s.psi0_curr.re[j];
        total.im[j] = s.phi_curr.im[j] + s.psi0_curr.im[j];
    }
    const auto nt = detail::region_norms(work, total);
    rep.norm_window_final = nt.window;
    rep.norm_left_final = nt.left;
    rep.norm_right_final = nt.right;
    rep.accounting_total = nt.total() + rep.absorbed_left + rep.absorbed_right;
    rep.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - wall0).count();

    return {std::move(rep), std::move(traj)};
}

// The reduced-domain production run: analytic injection feeding the window,
// compressed absorbing layers on the outside.
inline RunResult run_combined(const SimulationConfig& cfg, EngineOptions opt = {}) {
    opt.split = true;
    return run_engine(cfg, opt);
}

}  // namespace schrodbox
