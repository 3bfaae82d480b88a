#pragma once

#include <chrono>
#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace ffista {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Clock = std::chrono::steady_clock;

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Operand dimensions do not agree.
class ShapeError : public Error {
public:
    using Error::Error;
};

/// A point lies outside the domain of a function (e.g. KL with a non-positive mean).
class DomainError : public Error {
public:
    using Error::Error;
};

/// Requested (L, mu) pair is not a valid conditioning.
class InvalidConditioning : public Error {
public:
    using Error::Error;
};

/// Data that makes a closed-form estimate meaningless (e.g. A^T b = 0).
class DegenerateData : public Error {
public:
    using Error::Error;
};

/// Armijo loop hit its cap without satisfying the Bregman test.
class BacktrackDivergence : public Error {
public:
    using Error::Error;
};

class ArityError : public Error {
public:
    using Error::Error;
};

/// Bad user configuration (unknown names, out-of-range parameters).
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Malformed input file. Carries the offending line when known.
class ParseError : public Error {
public:
    ParseError(const std::string& what, long line = -1)
        : Error(line >= 0 ? what + " (line " + std::to_string(line) + ")" : what), line_(line) {}
    long line() const noexcept { return line_; }

private:
    long line_;
};

class EmptyDataset : public ParseError {
public:
    using ParseError::ParseError;
};

/// Reference value is not below the values a benchmark reached.
class StaleReference : public Error {
public:
    using Error::Error;
};

inline double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

inline void require_same_size(Eigen::Index got, Eigen::Index expected, const char* what) {
    if (got != expected)
        throw ShapeError(std::string(what) + ": expected dimension " + std::to_string(expected) +
                         ", got " + std::to_string(got));
}

} // namespace ffista
