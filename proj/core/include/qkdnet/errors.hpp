#pragma once

#include <stdexcept>
#include <string>

namespace qkdnet {

/// Base class for all qkdnet errors.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Bad argument values (out-of-range physics parameters, invalid network size, ...).
class InvalidArgumentError : public Error {
public:
    using Error::Error;
};

/// Scenario / router configuration problems: missing channels, inconsistent
/// matrices, unparseable or contradictory scenario contents.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Routing problems: self-routes, channel absent at a port.
class RoutingError : public Error {
public:
    using Error::Error;
};

/// A requested calibration target cannot be reached (measured value below the
/// model floor or above its ceiling).
class CalibrationError : public Error {
public:
    using Error::Error;
};

/// Protocol-level failures: desynchronized pulse streams, insufficient data.
class ProtocolError : public Error {
public:
    using Error::Error;
};

/// Scenario file syntax errors; carries the offending line number.
class ParseError : public Error {
public:
    ParseError(const std::string& msg, int line)
        : Error(msg), line_(line) {}
    int line() const { return line_; }

private:
    int line_;
};

} // namespace qkdnet
