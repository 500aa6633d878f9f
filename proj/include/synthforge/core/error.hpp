#pragma once

#include <stdexcept>
#include <string>

namespace synthforge {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed or out-of-range configuration, bad arguments.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// File system and format failures.
class IoError : public Error {
public:
    using Error::Error;
};

/// A dataset or manifest failed a consistency check.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// A stochastic draw produced an unusable result; the caller should retry
/// with a fresh child stream.
class ResampleSignal : public Error {
public:
    using Error::Error;
};

} // namespace synthforge
