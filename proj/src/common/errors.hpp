#pragma once

#include <stdexcept>
#include <string>

namespace nmp {

// Base for every error raised by the engine. The C API maps each subclass
// onto one status code.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed file or byte stream. `field()` names the offending part.
class FormatError : public Error {
public:
    FormatError(std::string field, const std::string& detail);
    const std::string& field() const { return mField; }

private:
    std::string mField;
};

class UnsupportedFormatError : public Error {
public:
    using Error::Error;
};

// A documented precondition was violated by the caller.
class ContractError : public Error {
public:
    using Error::Error;
};

// An operation was invoked in the wrong state (e.g. backward before forward).
class StateError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

} // namespace nmp
