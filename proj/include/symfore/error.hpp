#pragma once

#include <stdexcept>
#include <string>

namespace symfore {

// Error taxonomy maps onto CLI exit codes:
//   ConfigError (and children) -> 2, DataError -> 3, NumericError -> 4.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConfigError : Error {
    using Error::Error;
};

struct DataError : Error {
    using Error::Error;
};

struct NumericError : Error {
    using Error::Error;
};

// Shape of an argument does not match what the operation requires.
struct DimensionError : ConfigError {
    using ConfigError::ConfigError;
};

// A parameter value is outside its legal domain (k < 2, dilation <= 0, ...).
struct ParameterError : ConfigError {
    using ConfigError::ConfigError;
};

// An index or horizon falls outside the addressable range.
struct RangeError : ConfigError {
    using ConfigError::ConfigError;
};

// A documented call contract was violated (non-scalar loss, unnormalized input, ...).
struct ContractError : ConfigError {
    using ConfigError::ConfigError;
};

}  // namespace symfore
