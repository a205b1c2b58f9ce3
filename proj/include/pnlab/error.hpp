#pragma once

#include <stdexcept>
#include <string>

namespace pnlab {

/// Base of every error raised by the library. The CLI maps subclasses to exit codes.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid argument to an operation (bad order, mismatched grids, narrow fit windows, ...).
class ArgumentError : public Error {
public:
    using Error::Error;
};

/// Invalid configuration or parameter combination.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Non-finite values or otherwise unusable numeric input.
class NumericError : public Error {
public:
    using Error::Error;
};

/// An iterative method ran out of budget; carries the last residual.
class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& what, double last_residual)
        : Error(what), last_residual_(last_residual) {}
    double last_residual() const noexcept { return last_residual_; }

private:
    double last_residual_;
};

/// Structural failure of a solver (lost monotonicity, singular system, ...).
class SolverError : public Error {
public:
    using Error::Error;
};

/// Coincident or nearly coincident particles.
class SingularityError : public Error {
public:
    using Error::Error;
};

/// Time stepping left the sanity band.
class InstabilityError : public Error {
public:
    using Error::Error;
};

/// Wrong number of level crossings (layers merged, or the window is too small).
class TopologyError : public Error {
public:
    using Error::Error;
};

/// Malformed or truncated file.
class ParseError : public Error {
public:
    using Error::Error;
};

/// File written by an unsupported format version.
class VersionError : public Error {
public:
    using Error::Error;
};

/// A configured acceptance predicate failed.
class AcceptanceError : public Error {
public:
    using Error::Error;
};

}  // namespace pnlab
