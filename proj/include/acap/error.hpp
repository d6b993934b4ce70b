#pragma once

#include <stdexcept>
#include <string>

namespace acap {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Shape disagreement between tensors (message names both shapes).
struct DimensionError : Error {
    using Error::Error;
};

// Invalid configuration value (p >= 1, degenerate filterbank, ...).
struct ConfigError : Error {
    using Error::Error;
};

// A documented precondition was violated at runtime.
struct ContractError : Error {
    using Error::Error;
};

// NaN/Inf appeared in a gradient or a loss.
struct DivergenceError : Error {
    using Error::Error;
};

// A sequence became shorter than one step under sub-sampling.
struct SequenceTooShortError : Error {
    using Error::Error;
};

struct FileNotFoundError : Error {
    using Error::Error;
};

// File exists but is not in the expected format.
struct FormatError : Error {
    using Error::Error;
};

struct EmptyDataError : Error {
    using Error::Error;
};

struct InvalidCaptionError : Error {
    using Error::Error;
};

struct UnknownTokenError : Error {
    using Error::Error;
};

}  // namespace acap
