#pragma once

#include <stdexcept>
#include <string>

namespace rmtnorm {

/// A model parameter (J0, J1, N, mu, sigma, ...) is outside its domain.
/// `parameter()` names the offending field so front ends can map it back to a flag.
class ParameterError : public std::invalid_argument {
public:
    ParameterError(std::string parameter, std::string message)
        : std::invalid_argument(parameter + ": " + message),
          parameter_(std::move(parameter)),
          message_(std::move(message)) {}

    const std::string& parameter() const noexcept { return parameter_; }
    /// The explanation without the parameter prefix.
    const std::string& message() const noexcept { return message_; }

private:
    std::string parameter_;
    std::string message_;
};

/// A function argument (x, alpha, k, ...) is outside the function's domain.
class DomainError : public ParameterError {
public:
    using ParameterError::ParameterError;
};

/// Min-max normalization is undefined because the largest and smallest eigenvalue coincide.
class DegenerateSpectrumError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// The eigensolver failed or produced a result inconsistent with the requested shift.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace rmtnorm
