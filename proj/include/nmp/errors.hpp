#pragma once

#include <stdexcept>
#include <string>

namespace nmp {

// Base of everything the library throws on bad input or configuration.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed input data. Data errors map to CLI exit code 3.
class DataError : public Error {
public:
    using Error::Error;
};

class ParseError : public DataError {
public:
    ParseError(std::size_t line, const std::string& what)
        : DataError("line " + std::to_string(line) + ": " + what), line_(line) {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

class DomainError : public DataError {
public:
    using DataError::DataError;
};

class DuplicateEdgeError : public DataError {
public:
    using DataError::DataError;
};

// Configuration that cannot be run (caps, horizons, unsatisfiable sweeps).
// Maps to CLI exit code 2.
class ConfigError : public Error {
public:
    using Error::Error;
};

// A caller violated a documented precondition.
class UsageError : public Error {
public:
    using Error::Error;
};

class UnsupportedError : public ConfigError {
public:
    using ConfigError::ConfigError;
};

} // namespace nmp
