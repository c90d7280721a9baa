#pragma once

#include <stdexcept>
#include <string>

namespace infonoise {

// Base class for all library errors. The CLI maps subclasses to exit codes:
// ConfigError -> 2, DataError -> 3, DomainError/DegenerateError -> 4.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Invalid configuration or parameter values (bad K, negative rates, ...).
class ConfigError : public Error {
public:
    using Error::Error;
};

// Argument outside the mathematical domain of an operation (sigma <= 0,
// z outside [0,1], sigma outside the grid range).
class DomainError : public Error {
public:
    using Error::Error;
};

// Malformed or rejected input data (parse failures, NaN losses, absent data).
class DataError : public Error {
public:
    using Error::Error;
};

// Dimension mismatch between vectors and the objects consuming them.
class ShapeError : public DataError {
public:
    using DataError::DataError;
};

// Degenerate numerical state (all-zero profile, vanishing normalizer, ...).
class DegenerateError : public Error {
public:
    using Error::Error;
};

}  // namespace infonoise
