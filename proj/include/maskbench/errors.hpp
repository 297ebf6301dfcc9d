#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace maskbench {

// Base for everything this library throws on bad input or bad files.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// PGM decoding failure; carries the byte offset where parsing stopped.
class PgmParseError : public Error {
public:
    PgmParseError(const std::string& what, std::size_t offset)
        : Error(what + " (byte offset " + std::to_string(offset) + ")"),
          offset_(offset) {}
    std::size_t offset() const { return offset_; }

private:
    std::size_t offset_;
};

class IoError : public Error {
public:
    using Error::Error;
};

// Invalid configuration or precondition violation (bad holdout index,
// image too small for an LBP config, k > n, ...).
class ConfigError : public Error {
public:
    using Error::Error;
};

// Model file decoding failure.
class ModelFormatError : public Error {
public:
    using Error::Error;
};

// Numerical failure that the caller asked for explicitly (e.g. LDA with
// shrinkage 0 on a singular covariance).
class NumericError : public Error {
public:
    using Error::Error;
};

}  // namespace maskbench
