#pragma once

#include <stdexcept>
#include <string>

namespace stefan {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of a function (e.g. g(u) with u < 0).
class DomainError : public Error {
public:
    using Error::Error;
};

/// Value outside the admissible range (e.g. g_inv(v) with v outside [-V0, -v0]).
class RangeError : public Error {
public:
    using Error::Error;
};

/// Kinetic sensitivity nu(V) requested where g^{-1} has an unbounded derivative.
class SingularityError : public Error {
public:
    using Error::Error;
};

/// Invalid model or algorithm parameter.
class ParameterError : public Error {
public:
    using Error::Error;
};

/// Malformed grid or grid/field mismatch.
class GridError : public Error {
public:
    using Error::Error;
};

/// Time ordering or coverage violated.
class TimeError : public Error {
public:
    using Error::Error;
};

/// Floating point breakdown (NaN, singular system, underflow of a stretch factor).
class NumericalError : public Error {
public:
    using Error::Error;
};

/// Linearly dependent tangent vectors.
class DegenerateSetError : public Error {
public:
    using Error::Error;
};

/// A time step could not be completed; carries the time and the last residual.
class StepError : public Error {
public:
    StepError(const std::string& what, double time, double residual)
        : Error(what + " (t=" + std::to_string(time) + ", residual=" + std::to_string(residual) + ")"),
          time_(time),
          residual_(residual) {}

    double time() const noexcept { return time_; }
    double residual() const noexcept { return residual_; }

private:
    double time_;
    double residual_;
};

/// Configuration file problems; the message names the offending key.
class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace stefan
