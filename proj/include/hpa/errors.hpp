#pragma once

#include <stdexcept>
#include <string>

namespace hpa {

/// Base class for everything this library throws on purpose.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Bad user-supplied configuration (parameters, step sizes, brackets).
/// The CLI maps these to exit code 2.
struct ConfigError : Error {
    using Error::Error;
};

/// A numerical procedure could not produce a result.
/// The CLI maps these to exit code 3.
struct NumericalError : Error {
    using Error::Error;
};

struct EmptyBracket : NumericalError {
    using NumericalError::NumericalError;
};

struct ZeroPolynomial : NumericalError {
    using NumericalError::NumericalError;
};

struct UnsupportedDegree : NumericalError {
    using NumericalError::NumericalError;
};

struct PoleRegion : NumericalError {
    using NumericalError::NumericalError;
};

struct TransversalityDegenerate : NumericalError {
    using NumericalError::NumericalError;
};

struct DegenerateCrossing : NumericalError {
    using NumericalError::NumericalError;
};

struct StepTooLarge : ConfigError {
    using ConfigError::ConfigError;
};

struct DelayNotGridAligned : ConfigError {
    using ConfigError::ConfigError;
};

struct NonFiniteState : NumericalError {
    using NumericalError::NumericalError;
};

struct TooShort : ConfigError {
    using ConfigError::ConfigError;
};

struct BracketInvalid : NumericalError {
    using NumericalError::NumericalError;
};

} // namespace hpa
