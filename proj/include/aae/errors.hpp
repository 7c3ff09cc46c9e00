#ifndef AAE_ERRORS_HPP
#define AAE_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace aae {

// Base of every error thrown by this library.  The CLI maps subclasses onto
// exit codes, so new error conditions should reuse one of these categories.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed argument values (bad flags, inconsistent options, non-hermitian
// operator where a hermitian one is required, ...).
struct ArgumentError : Error {
    using Error::Error;
};

// Index or value outside its documented range.
struct RangeError : Error {
    using Error::Error;
};

// Dimension mismatch between operands.
struct ShapeError : Error {
    using Error::Error;
};

// Request exceeds a configured resource cap (qubit budget, eigensolver cap,
// quadrature order cap, phase-register cap).
struct ResourceError : Error {
    using Error::Error;
};

// A caller-supplied object violates an interface contract that is checked at
// run time (state outside the invariant subspace, non-unitary oracle, ...).
struct ContractError : Error {
    using Error::Error;
};

// The measured expectation is consistent with delta >= 0, i.e. the promised
// upper bound p0 does not hold for this instance.
struct PriorViolationError : Error {
    PriorViolationError(const std::string& what, double estimate_, double p0_)
        : Error(what), estimate(estimate_), p0(p0_) {}
    double estimate;
    double p0;
};

// Spectral-gap trouble: degenerate ground state or gap collapse along a path.
struct GapError : Error {
    using Error::Error;
};

// Reference state has (numerically) zero overlap with the ground state.
struct OverlapError : Error {
    using Error::Error;
};

// Input file could not be parsed.
struct ParseError : Error {
    using Error::Error;
};

}  // namespace aae

#endif
