#pragma once

#include <stdexcept>
#include <string>

namespace neveu {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A precondition on an argument was violated (bad parameters, thresholds, grids).
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// Adaptive quadrature could not reach the requested tolerance.
class QuadratureError : public Error {
public:
    QuadratureError(const std::string& what, double achieved_error)
        : Error(what), achieved_error_(achieved_error) {}

    double achieved_error() const noexcept { return achieved_error_; }

private:
    double achieved_error_;
};

/// An integral that should be finite is not (e.g. a test function that grows
/// too fast for the big-jump integral). `term` names the offending integral.
class DivergenceError : public Error {
public:
    DivergenceError(std::string term, const std::string& what)
        : Error(what), term_(std::move(term)) {}

    const std::string& term() const noexcept { return term_; }

private:
    std::string term_;
};

} // namespace neveu
