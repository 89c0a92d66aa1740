#ifndef OCE_ERRORS_HPP
#define OCE_ERRORS_HPP

#include <stdexcept>

namespace oce {

/// Base class for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// An argument lies outside its mathematical domain (probability, exponent, ...).
struct DomainError : Error {
    using Error::Error;
};

/// exp() would leave the double range (entropic disutility at large gamma*t).
struct OverflowError : Error {
    using Error::Error;
};

/// A derivative was requested exactly at a kink (cvar at t = 0).
struct KinkError : Error {
    using Error::Error;
};

/// The requested operation is undefined for this disutility family.
struct UnsupportedFamilyError : Error {
    using Error::Error;
};

/// No closed-form risk exists for this (disutility, model) pair.
struct NoClosedFormError : Error {
    using Error::Error;
};

/// Root bracketing exhausted its expansion budget.
struct NoRootError : Error {
    using Error::Error;
};

/// Step-size schedule parameters are invalid.
struct ScheduleError : Error {
    using Error::Error;
};

/// An aggregate was requested from a stream that has consumed no samples.
struct EmptyStreamError : Error {
    using Error::Error;
};

/// A stochastic-approximation iterate left the finite range.
struct DivergenceError : Error {
    using Error::Error;
};

/// A bound formula needs a constant that was not supplied.
struct IncompleteConstantsError : Error {
    using Error::Error;
};

/// Bandit budget too small for the arm count.
struct BudgetError : Error {
    using Error::Error;
};

/// The bandit instance lacks a unique best arm.
struct NonUniqueOptimumError : Error {
    using Error::Error;
};

/// A model / spec / constants file could not be parsed.
struct ParseError : Error {
    using Error::Error;
};

} // namespace oce

#endif
