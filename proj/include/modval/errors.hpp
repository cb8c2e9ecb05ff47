#pragma once

#include <complex>
#include <optional>
#include <stdexcept>
#include <string>

namespace modval {

// Base of everything thrown by this library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed inputs: wrong dimensions, invalid parameters, unusable grids.
struct ValidationError : Error {
    using Error::Error;
};

struct DimensionMismatch : ValidationError {
    using ValidationError::ValidationError;
};

struct NonHermitian : ValidationError {
    using ValidationError::ValidationError;
};

struct GridTooNarrow : ValidationError {
    using ValidationError::ValidationError;
};

struct IncompleteBasis : ValidationError {
    using ValidationError::ValidationError;
};

// Well-formed inputs that land in a regime where the requested quantity
// does not exist or cannot be resolved.
struct DomainError : Error {
    using Error::Error;
};

// Post-selection orthogonal to pre-selection: weak and modular values are
// undefined there. Carries the offending overlap magnitude and, when the
// failure was detected inside a modular-value computation, the evolved
// numerator amplitude <phi|e^{-ikC}|psi>. Both are reported uninterpreted.
struct OrthogonalSelection : DomainError {
    OrthogonalSelection(const std::string& msg, double overlap_magnitude,
                        std::optional<std::complex<double>> evolved = std::nullopt)
        : DomainError(msg), overlap_magnitude(overlap_magnitude), evolved_amplitude(evolved) {}

    double overlap_magnitude;
    std::optional<std::complex<double>> evolved_amplitude;
};

// The post-selected amplitude vanished identically: no meter state survives.
struct PostSelectionImpossible : DomainError {
    using DomainError::DomainError;
};

// Readout inversion would amplify noise beyond usefulness (|gamma| under floor).
struct IllConditioned : DomainError {
    using DomainError::DomainError;
};

}  // namespace modval
