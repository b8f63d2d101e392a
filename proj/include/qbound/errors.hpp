#ifndef QBOUND_ERRORS_HPP
#define QBOUND_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace qbound {

// Base class for all library errors.
struct Error : std::runtime_error {
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Argument outside the mathematical domain of an operation.
struct DomainError : Error {
    explicit DomainError(const std::string& what) : Error(what) {}
};

// Linear system could not be solved to the required accuracy.
struct SingularError : Error {
    SingularError(const std::string& what, int pivot_index)
        : Error(what), pivot(pivot_index) {}
    int pivot;
};

// Bracketed root search failed (transform never crosses the target line).
struct NoRootError : Error {
    explicit NoRootError(const std::string& what) : Error(what) {}
};

// Adaptive quadrature could not reach the requested tolerance.
struct QuadratureError : Error {
    explicit QuadratureError(const std::string& what) : Error(what) {}
};

// Moment envelope degenerates (success probability too large to be useful).
struct DegenerateError : Error {
    explicit DegenerateError(const std::string& what) : Error(what) {}
};

// Simulation exceeded its event budget.
struct ResourceError : Error {
    explicit ResourceError(const std::string& what) : Error(what) {}
};

// Malformed run configuration.
struct ConfigError : Error {
    explicit ConfigError(const std::string& what) : Error(what) {}
};

}

#endif
