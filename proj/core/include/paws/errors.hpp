#pragma once

#include <stdexcept>
#include <string>

namespace paws {

// Base for all library errors. Callers that only want "paws failed" catch this.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Operand dimensions do not line up. Message names both shapes.
struct ShapeError : Error {
    using Error::Error;
};

// A numeric argument is outside its documented domain (e.g. temperature <= 0).
struct DomainError : Error {
    using Error::Error;
};

// A structural configuration is invalid or unsupported.
struct ConfigError : Error {
    using Error::Error;
};

// Runtime data violates a documented invariant (e.g. target rows not normalized).
struct ValidationError : Error {
    using Error::Error;
};

// Two evaluations of a supposedly deterministic function disagreed.
struct DeterminismError : Error {
    using Error::Error;
};

// A stated precondition of a check or experiment does not hold.
struct PreconditionError : Error {
    using Error::Error;
};

// A serialized artifact (checkpoint, config file) cannot be decoded.
struct FormatError : Error {
    using Error::Error;
};

}  // namespace paws
