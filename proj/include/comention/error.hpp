#pragma once

#include <stdexcept>
#include <string>

namespace comention {

// Base of every error raised by the library. The CLI maps these to exit code 2.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Bad or inconsistent input data (corpus records, lexicon, streams, bundles).
class DataError : public Error {
public:
    using Error::Error;
};

// A lexicon pattern that does not compile.
class PatternError : public DataError {
public:
    PatternError(std::string pattern, std::string reason)
        : DataError("pattern '" + pattern + "': " + reason),
          pattern_(std::move(pattern)), reason_(std::move(reason)) {}

    const std::string& pattern() const noexcept { return pattern_; }
    const std::string& reason() const noexcept { return reason_; }

private:
    std::string pattern_;
    std::string reason_;
};

// Precondition violated by the caller (unknown node, empty node set, ...).
class InvalidArgument : public Error {
public:
    using Error::Error;
};

// Numerical failure (eigensolver non-convergence, non-finite layout).
class NumericError : public Error {
public:
    using Error::Error;
};

}  // namespace comention
