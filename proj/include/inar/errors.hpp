#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace inar {

/// Base for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An argument lies outside the mathematical domain of an operation.
class DomainError : public Error {
public:
    using Error::Error;
};

/// Inconsistent or infeasible configuration (bad grid, too few covariate rows, ...).
class ConfigError : public Error {
public:
    using Error::Error;
};

/// The requested combination is not implemented (e.g. score path for p > 1).
class UnsupportedError : public Error {
public:
    using Error::Error;
};

/// A matrix that must be inverted is numerically singular.
class SingularityError : public Error {
public:
    using Error::Error;
};

/// An iterative fit stopped before meeting its convergence criterion.
class ConvergenceError : public Error {
public:
    using Error::Error;
};

/// A least-squares design matrix does not have full column rank.
class RankError : public Error {
public:
    RankError(const std::string& what, std::vector<std::string> columns)
        : Error(what), columns_(std::move(columns)) {}

    [[nodiscard]] const std::vector<std::string>& columns() const noexcept { return columns_; }

private:
    std::vector<std::string> columns_;
};

/// Malformed input data. `row` is 1-based; 0 when not tied to a row.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t row) : Error(what), row_(row) {}

    [[nodiscard]] std::size_t row() const noexcept { return row_; }

private:
    std::size_t row_;
};

}  // namespace inar
