#ifndef POLARIZE_ERRORS_HPP
#define POLARIZE_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace polarize {

/// Base class for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A precondition on user-supplied data failed (bad config, bad spec, bad file).
struct ValidationError : Error {
    using Error::Error;
};

/// A tensor required to be invertible has a (near-)zero eigenvalue.
struct SingularTensor : Error {
    using Error::Error;
};

/// A lamination direction is not unit length.
struct NonUnitDirection : ValidationError {
    using ValidationError::ValidationError;
};

/// The closed-form laminate system is singular (cannot happen for valid input).
struct DegenerateFormula : Error {
    using Error::Error;
};

/// Target eigenvalues do not sum to the equality-curve value.
struct TargetOffCurve : ValidationError {
    using ValidationError::ValidationError;
};

/// A target eigenvalue lies outside the admissible interval.
struct TargetOutOfRange : ValidationError {
    using ValidationError::ValidationError;
};

/// Zero-volume-fraction tensor expected to be positive definite is not.
struct NotPositiveDefinite : ValidationError {
    using ValidationError::ValidationError;
};

/// Region curves are only defined for planar eigenvalue pairs.
struct UnsupportedDimension : ValidationError {
    using ValidationError::ValidationError;
};

/// Polarization average requested over an empty inclusion set.
struct EmptyInclusion : ValidationError {
    using ValidationError::ValidationError;
};

/// The algebraic polarization/effective-tensor relation degenerates at theta = 0.
struct ZeroFraction : ValidationError {
    using ValidationError::ValidationError;
};

/// Iterative solver exceeded its iteration cap.
struct SolverDiverged : Error {
    using Error::Error;
};

/// An inclusion is too small for the requested grid.
struct UnresolvedInclusion : ValidationError {
    using ValidationError::ValidationError;
};

/// Internal invariant broken; indicates a bug, not bad input.
struct InternalError : Error {
    using Error::Error;
};

}  // namespace polarize

#endif
