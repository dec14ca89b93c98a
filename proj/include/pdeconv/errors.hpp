#pragma once

#include <stdexcept>
#include <string>

namespace pdeconv {

/// Mismatched image or kernel dimensions.
class ShapeError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Inversion requested where the kernel spectrum vanishes.
class SingularityError : public DomainError {
public:
    using DomainError::DomainError;
};

/// Malformed file content; message carries the byte offset where parsing stopped.
class ParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid solver, denoiser, plan, or tuning configuration.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Non-finite value produced where a finite one is required.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace pdeconv
