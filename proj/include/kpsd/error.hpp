#pragma once

#include <stdexcept>
#include <string>

namespace kpsd {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An argument violates an operation's documented precondition.
class PreconditionError : public Error {
public:
    using Error::Error;
};

/// The Jacobi eigensolver hit its sweep cap.
class ConvergenceError : public Error {
public:
    using Error::Error;
};

/// Exhaustive k-set enumeration would exceed the configured cap.
class EnumerationCapError : public Error {
public:
    using Error::Error;
};

/// Malformed matrix, sample or design text.
class ParseError : public Error {
public:
    using Error::Error;
};

/// A block list fails the 2-design conditions.
class DesignError : public Error {
public:
    using Error::Error;
};

namespace detail {

inline void require(bool condition, const std::string& message)
{
    if (!condition) throw PreconditionError(message);
}

} // namespace detail
} // namespace kpsd
