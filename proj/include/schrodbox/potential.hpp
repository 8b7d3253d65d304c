#pragma once

#include <algorithm>
#include <vector>

#include "schrodbox/errors.hpp"

namespace schrodbox {

enum class PotentialKind {
    flat,
    rectangular_barrier,
    tabulated,
    time_dependent_tabulated,
};

// Scalar potential on the transport window [a, b]; identically zero outside
// (the reservoirs are flat). Tabulated data is interpolated linearly in x and
// held piecewise constant in t.
struct PotentialSpec {
    PotentialKind kind = PotentialKind::flat;

    // rectangular_barrier
    double barrier_center = 0.0;  // nm
    double barrier_width = 0.0;   // nm
    double barrier_height = 0.0;  // eV

    // tabulated / time_dependent_tabulated
    std::vector<double> table_x;                 // nm, ascending
    std::vector<double> table_t;                 // fs, ascending (time dependent only)
    std::vector<std::vector<double>> table_u;    // one row per table_t entry (one row total if static)

    double a = 0.0;
    double b = 0.0;

    bool is_flat() const { return kind == PotentialKind::flat; }

    double max_abs_value() const {
        switch (kind) {
            case PotentialKind::flat:
                return 0.0;
            case PotentialKind::rectangular_barrier:
                return std::abs(barrier_height);
            default: {
                double m = 0.0;
                for (const auto& row : table_u)
                    for (double v : row) m = std::max(m, std::abs(v));
                return m;
            }
        }
    }

    double value(double x, double t) const {
        if (x < a || x > b) return 0.0;
        switch (kind) {
            case PotentialKind::flat:
                return 0.0;
            case PotentialKind::rectangular_barrier: {
                const double half = 0.5 * barrier_width;
                return (x >= barrier_center - half && x <= barrier_center + half)
                           ? barrier_height
                           : 0.0;
            }
            case PotentialKind::tabulated:
                return interp_row(table_u.front(), x);
            case PotentialKind::time_dependent_tabulated:
                return interp_row(table_u[row_for(t)], x);
        }
        return 0.0;
    }

  private:
    std::size_t row_for(double t) const {
        // latest tabulated time not after t; clamp before the first entry
        auto it = std::upper_bound(table_t.begin(), table_t.end(), t);
        if (it == table_t.begin()) return 0;
        return static_cast<std::size_t>(it - table_t.begin()) - 1;
    }

    double interp_row(const std::vector<double>& row, double x) const {
        if (table_x.empty()) return 0.0;
        if (x <= table_x.front()) return row.front();
        if (x >= table_x.back()) return row.back();
        auto it = std::upper_bound(table_x.begin(), table_x.end(), x);
        const std::size_t i = static_cast<std::size_t>(it - table_x.begin());
        const double w = (x - table_x[i - 1]) / (table_x[i] - table_x[i - 1]);
        return row[i - 1] * (1.0 - w) + row[i] * w;
    }
};

inline void validate_potential(const PotentialSpec& p, std::vector<std::string>& out) {
    switch (p.kind) {
        case PotentialKind::flat:
            break;
        case PotentialKind::rectangular_barrier: {
            if (p.barrier_width <= 0.0) out.push_back("barrier width must be positive");
            const double half = 0.5 * p.barrier_width;
            if (p.barrier_center - half < p.a || p.barrier_center + half > p.b)
                out.push_back("barrier extends outside the window [a,b]");
            break;
        }
        case PotentialKind::tabulated:
        case PotentialKind::time_dependent_tabulated: {
            if (p.table_x.size() < 2) out.push_back("potential table needs at least two x samples");
            if (!std::is_sorted(p.table_x.begin(), p.table_x.end()))
                out.push_back("potential table x values must ascend");
            if (p.table_u.empty()) out.push_back("potential table has no value rows");
            for (const auto& row : p.table_u)
                if (row.size() != p.table_x.size())
                    out.push_back("potential table row length mismatch");
            if (p.kind == PotentialKind::time_dependent_tabulated) {
                if (p.table_t.size() != p.table_u.size())
                    out.push_back("potential table time count mismatch");
                if (!std::is_sorted(p.table_t.begin(), p.table_t.end()))
                    out.push_back("potential table times must ascend");
            }
            if (!p.table_x.empty() &&
                (p.table_x.front() > p.a || p.table_x.back() < p.b))
                out.push_back("potential table does not cover [a,b]");
            break;
        }
    }
}

}  // namespace schrodbox
