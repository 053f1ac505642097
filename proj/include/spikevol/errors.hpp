#pragma once

#include <stdexcept>
#include <string>

namespace spikevol {

// Base of everything the library throws on purpose.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A caller violated a documented precondition (bad parameter, t <= 0, ...).
// The CLI maps these to exit code 1.
class DomainError : public Error {
public:
    using Error::Error;
};

class GridMismatch : public DomainError {
public:
    using DomainError::DomainError;
};

class InsufficientHorizon : public DomainError {
public:
    using DomainError::DomainError;
};

// Branching ratio reached one.
class SupercriticalError : public DomainError {
public:
    using DomainError::DomainError;
};

// Requested grid would exceed the node cap; `offending_n` names the ladder entry.
class GridCapExceeded : public DomainError {
public:
    GridCapExceeded(const std::string& what, long long offending_n)
        : DomainError(what), offending_n(offending_n) {}
    long long offending_n;
};

// Runtime failures: the computation was well-posed but did not finish.
// The CLI maps these to exit code 2.
class RuntimeFailure : public Error {
public:
    using Error::Error;
};

class PrecisionUnreachable : public RuntimeFailure {
public:
    PrecisionUnreachable(const std::string& what, double estimate, double error_bound)
        : RuntimeFailure(what), estimate(estimate), error_bound(error_bound) {}
    double estimate;
    double error_bound;
};

class ConvergenceError : public RuntimeFailure {
public:
    ConvergenceError(const std::string& what, int iterations, double last_increment)
        : RuntimeFailure(what), iterations(iterations), last_increment(last_increment) {}
    int iterations;
    double last_increment;
};

class IntegrityError : public RuntimeFailure {
public:
    using RuntimeFailure::RuntimeFailure;
};

inline void require(bool ok, const std::string& message)
{
    if (!ok) throw DomainError(message);
}

} // namespace spikevol
