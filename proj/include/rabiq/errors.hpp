#pragma once

#include <stdexcept>
#include <string>

namespace rabiq {

/// Root of every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Caller supplied a parameter outside its documented domain.
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// A computation was started with valid inputs but could not produce a
/// trustworthy number.
class NumericalError : public Error {
public:
    using Error::Error;
};

class InvalidSpec : public InvalidArgument {
public:
    using InvalidArgument::InvalidArgument;
};

class InvalidCoupling : public InvalidArgument {
public:
    using InvalidArgument::InvalidArgument;
};

class InvalidDispersion : public InvalidArgument {
public:
    using InvalidArgument::InvalidArgument;
};

class InvalidScheme : public InvalidArgument {
public:
    using InvalidArgument::InvalidArgument;
};

class OutOfSupport : public InvalidArgument {
public:
    using InvalidArgument::InvalidArgument;
};

class DomainError : public InvalidArgument {
public:
    using InvalidArgument::InvalidArgument;
};

class ConfigError : public InvalidArgument {
public:
    using InvalidArgument::InvalidArgument;
};

/// | |u|^2 - |v|^2 - 1 | exceeded the configured tolerance.
class ConstraintViolation : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class ConvergenceFailure : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class InsufficientData : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class NonPositiveEnergy : public NumericalError {
public:
    using NumericalError::NumericalError;
};

/// A single disorder realization failed; carries the offending delta.
class RealizationFailure : public NumericalError {
public:
    RealizationFailure(const std::string& what, double delta, double omega_tau)
        : NumericalError(what), delta_(delta), omega_tau_(omega_tau) {}

    [[nodiscard]] double delta() const noexcept { return delta_; }
    [[nodiscard]] double omega_tau() const noexcept { return omega_tau_; }

private:
    double delta_;
    double omega_tau_;
};

}  // namespace rabiq
