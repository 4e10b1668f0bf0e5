#pragma once

#include <stdexcept>
#include <string>

namespace qosc {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Invalid sizes, malformed experiment configuration.
class ConfigError : public Error {
public:
    using Error::Error;
};

// Argument outside an operation's domain (unknown mode, k = 0 direction, grid mismatch, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

// Occupation number above the Fock truncation level.
class TruncationError : public Error {
public:
    using Error::Error;
};

// Non-finite values appearing in a field or evolution.
class PropagationError : public Error {
public:
    using Error::Error;
};

// Field dump files: malformed header, short payload, unreadable path.
class FormatError : public Error {
public:
    using Error::Error;
};

class VersionError : public FormatError {
public:
    using FormatError::FormatError;
};

}  // namespace qosc
