#pragma once

#include <stdexcept>
#include <string>

namespace czsl {

// Error taxonomy shared by the library and the CLI. The CLI maps these to
// exit codes: ConfigError -> 2, DataError/IoError -> 3, NumericError -> 4.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Inconsistent tensor or batch dimensions.
class ShapeError : public Error {
public:
    explicit ShapeError(const std::string& msg) : Error(msg) {}
};

// Invalid or inconsistent experiment configuration.
class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& msg) : Error(msg) {}
};

// Malformed dataset directories, out-of-range labels, missing attributes.
class DataError : public Error {
public:
    explicit DataError(const std::string& msg) : Error(msg) {}
};

// Non-finite losses, gradients, or inputs.
class NumericError : public Error {
public:
    explicit NumericError(const std::string& msg) : Error(msg) {}
};

// An operation called on an object in the wrong state (e.g. offering to a
// memory configured with a different strategy, KD without a teacher).
class UsageError : public Error {
public:
    explicit UsageError(const std::string& msg) : Error(msg) {}
};

// Filesystem failures and corrupted on-disk artifacts.
class IoError : public Error {
public:
    explicit IoError(const std::string& msg) : Error(msg) {}
};

// Evaluation over an ill-posed pool, e.g. a class with zero test samples.
class EvalError : public Error {
public:
    explicit EvalError(const std::string& msg) : Error(msg) {}
};

} // namespace czsl
