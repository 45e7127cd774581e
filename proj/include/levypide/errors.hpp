#pragma once

#include <stdexcept>
#include <string>

namespace levypide {

/// Root of the library's exception hierarchy.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A model or grid parameter lies outside its admissible domain.
class ParameterDomainError : public Error {
public:
    using Error::Error;
};

/// Malformed or incomplete configuration input.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// A standing assumption of the model (e.g. rho * L < 1) is violated.
class AssumptionViolation : public Error {
public:
    using Error::Error;
};

/// Family-specific operation applied to the wrong measure family.
class FamilyMismatch : public Error {
public:
    using Error::Error;
};

/// Argument outside the range covered by a computed object.
class OutOfRange : public Error {
public:
    using Error::Error;
};

/// Adaptive quadrature did not reach tolerance; carries the last estimate.
class QuadratureFailure : public Error {
public:
    QuadratureFailure(const std::string& what, double last_estimate)
        : Error(what), last_estimate_(last_estimate) {}
    double last_estimate() const noexcept { return last_estimate_; }

private:
    double last_estimate_;
};

/// Fixed-point or nonlinear iteration failed; carries the last residual.
class IterationError : public Error {
public:
    IterationError(const std::string& what, double last_residual)
        : Error(what), last_residual_(last_residual) {}
    double last_residual() const noexcept { return last_residual_; }

private:
    double last_residual_;
};

/// Numerical instability detected while time stepping.
class InstabilityError : public Error {
public:
    using Error::Error;
};

}  // namespace levypide
