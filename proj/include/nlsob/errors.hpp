#pragma once

#include <stdexcept>
#include <string>

namespace nlsob {

/// Base of every error raised by the library. The CLI maps these onto exit codes.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An argument lies outside the domain of a function (negative kernel argument,
/// point outside the integration window).
class DomainError : public Error {
public:
    using Error::Error;
};

/// A numeric parameter violates an operation's precondition.
class ParameterError : public Error {
public:
    using Error::Error;
};

/// A kernel fails a check needed by the requested operation (e.g. divergent integral).
class ValidationError : public Error {
public:
    using Error::Error;
};

class NormalizationError : public Error {
public:
    using Error::Error;
};

/// An operation was requested outside the setting where it is defined.
class ContractError : public Error {
public:
    using Error::Error;
};

/// The lattice is too coarse for the requested smoothing scale.
class ResolutionError : public ParameterError {
public:
    ResolutionError(const std::string& what, int required_grid_n)
        : ParameterError(what), required_grid_n_(required_grid_n) {}

    int required_grid_n() const noexcept { return required_grid_n_; }

private:
    int required_grid_n_;
};

} // namespace nlsob
