#pragma once

#include <stdexcept>
#include <string>

namespace schemelab {

// Root of every error raised by the library. The CLI maps any of these to
// exit status 1; argument-grammar problems are reported separately.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
public:
    using Error::Error;
};

// Invalid configuration value (sample sizes, steps, malformed inputs).
class ParameterError : public Error {
public:
    using Error::Error;
};

// A kernel constructor was asked for a budget at which uniform marginals
// cannot be maintained.
class InfeasibleError : public Error {
public:
    using Error::Error;
};

// Budget outside the regime handled by a closed form.
class RegimeError : public Error {
public:
    using Error::Error;
};

// A cost kernel could not be built or evaluated.
class KernelError : public Error {
public:
    using Error::Error;
};

// Quadrature failed to reach its tolerance.
class NumericError : public Error {
public:
    NumericError(const std::string& what, double achieved)
        : Error(what), achieved_tolerance_(achieved) {}

    double achieved_tolerance() const noexcept { return achieved_tolerance_; }

private:
    double achieved_tolerance_;
};

}  // namespace schemelab
