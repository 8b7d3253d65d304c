#pragma once

#include <vector>

#include "schrodbox/field.hpp"
#include "schrodbox/grid.hpp"

namespace schrodbox {

// Time series of field snapshots over a contiguous node range, recorded every
// `cadence` steps. frames[i] holds the nodes [j_begin, j_end] at times[i].
struct Trajectory {
    Grid grid;
    double dt = 0.0;
    int cadence = 1;
    int j_begin = 0;
    int j_end = 0;  // inclusive
    std::vector<double> times;
    std::vector<CField> frames;

    int width() const { return j_end - j_begin + 1; }
    double x_of(int local_j) const { return grid.x(j_begin + local_j); }
};

}  // namespace schrodbox
