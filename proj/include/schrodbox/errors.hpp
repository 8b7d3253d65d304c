#pragma once

#include <stdexcept>
#include <string>

namespace schrodbox {

struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Grid construction: a segment width is not an integer multiple of dx.
struct NonCommensurateGrid : Error {
    using Error::Error;
};

// An argument lies outside the domain an operation is defined on.
struct DomainError : Error {
    using Error::Error;
};

// Energy outside the band of the requested dispersion relation.
struct OutOfBand : Error {
    using Error::Error;
};

// Absorber sizing needs a nonzero carrier wavevector.
struct DegenerateWavevector : Error {
    using Error::Error;
};

// Initial packet support does not fit on the grid.
struct TruncatedSupport : Error {
    using Error::Error;
};

// A field left the finite range (NaN/Inf or runaway growth).
struct NumericalBlowup : Error {
    using Error::Error;
};

// Mask value <= 0 where a strictly positive one is required.
struct NonPositiveMask : Error {
    using Error::Error;
};

// Two trajectories cannot be compared sample-for-sample.
struct MisalignedTrajectories : Error {
    using Error::Error;
};

// Reference-run probability reached the open grid edge.
struct BoundaryContamination : Error {
    using Error::Error;
};

// A run hit its step budget before the configured stop rule fired.
struct StopRuleNeverMet : Error {
    using Error::Error;
};

struct ConfigError : Error {
    using Error::Error;
};

}  // namespace schrodbox
