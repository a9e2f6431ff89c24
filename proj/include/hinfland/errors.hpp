#pragma once

#include <stdexcept>
#include <string>

namespace hinfland {

// Base for all library errors. The CLI maps these to exit code 1.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Inconsistent matrix dimensions; the message names the offending block.
class DimensionError : public Error {
public:
    using Error::Error;
};

// Input outside an operation's domain (unstable controller, singular P, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

// A numerical procedure failed to converge or produced unusable output.
class NumericalError : public Error {
public:
    using Error::Error;
};

} // namespace hinfland
