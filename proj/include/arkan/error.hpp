#pragma once

#include <limits>
#include <stdexcept>
#include <string>

namespace arkan {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Caller supplied a value outside an operation's domain.
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// A file is missing or cannot be read/written.
class IoError : public Error {
public:
    using Error::Error;
};

/// Malformed CSV or model/config document.
class ParseError : public Error {
public:
    using Error::Error;
};

/// Vector/matrix dimensions disagree.
class ShapeError : public Error {
public:
    using Error::Error;
};

/// Constant (zero-variance) series where variation is required.
class DegenerateSeries : public Error {
public:
    using Error::Error;
};

/// Linear-model estimation failed (singular or rank-deficient system).
class EstimationError : public Error {
public:
    EstimationError(const std::string& what, double condition)
        : Error(what + " (condition estimate " + std::to_string(condition) + ")"),
          condition_(condition) {}
    /// No condition estimate applies.
    explicit EstimationError(const std::string& what)
        : Error(what), condition_(std::numeric_limits<double>::quiet_NaN()) {}

    [[nodiscard]] double condition() const noexcept { return condition_; }

private:
    double condition_;
};

/// A computation produced NaN or infinity.
class NumericError : public Error {
public:
    using Error::Error;
};

}  // namespace arkan
