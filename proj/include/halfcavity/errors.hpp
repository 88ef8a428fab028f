#pragma once

#include <stdexcept>
#include <string>

namespace halfcavity {

/// Invalid physical parameters (range or consistency violations).
class ParameterError : public std::invalid_argument {
public:
    ParameterError(std::string field, const std::string& message)
        : std::invalid_argument(field + ": " + message), field_(std::move(field)) {}
    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

/// Request outside the domain of an operation (e.g. non-finite input, divergent limit).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Failure of a numerical procedure (singular system, step-size underflow, ...).
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class SingularMatrixError : public NumericalError {
public:
    SingularMatrixError(const std::string& message, double condition)
        : NumericalError(message), condition_(condition) {}
    double condition() const noexcept { return condition_; }

private:
    double condition_;
};

class DegenerateKernelError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

}  // namespace halfcavity
