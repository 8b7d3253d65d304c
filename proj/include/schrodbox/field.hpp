#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <vector>

#include "schrodbox/errors.hpp"

namespace schrodbox {

using cplx = std::complex<double>;

// Complex field stored as separate real/imaginary planes so the stencil
// loops stay plain real arithmetic.
struct CField {
    std::vector<double> re;
    std::vector<double> im;

    CField() = default;
    explicit CField(std::size_t n) : re(n, 0.0), im(n, 0.0) {}

    std::size_t size() const { return re.size(); }

    cplx at(std::size_t j) const { return {re[j], im[j]}; }
    void set(std::size_t j, cplx v) {
        re[j] = v.real();
        im[j] = v.imag();
    }

    void fill_zero() {
        std::fill(re.begin(), re.end(), 0.0);
        std::fill(im.begin(), im.end(), 0.0);
    }
};

inline double abs_sq(const CField& f, std::size_t j) {
    return f.re[j] * f.re[j] + f.im[j] * f.im[j];
}

inline double max_abs(const CField& f) {
    double m = 0.0;
    for (std::size_t j = 0; j < f.size(); ++j) m = std::max(m, abs_sq(f, j));
    return std::sqrt(m);
}

// Plain rectangle-rule L2 norm squared with uniform weight w.
inline double norm_sq(const CField& f, double w) {
    double s = 0.0;
    for (std::size_t j = 0; j < f.size(); ++j) s += abs_sq(f, j);
    return s * w;
}

inline bool all_finite(const CField& f) {
    for (std::size_t j = 0; j < f.size(); ++j) {
        if (!std::isfinite(f.re[j]) || !std::isfinite(f.im[j])) return false;
    }
    return true;
}

inline std::vector<cplx> to_complex(const CField& f) {
    std::vector<cplx> out(f.size());
    for (std::size_t j = 0; j < f.size(); ++j) out[j] = f.at(j);
    return out;
}

inline CField from_complex(const std::vector<cplx>& v) {
    CField f(v.size());
    for (std::size_t j = 0; j < v.size(); ++j) f.set(j, v[j]);
    return f;
}

}  // namespace schrodbox
