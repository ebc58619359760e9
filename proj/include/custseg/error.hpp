#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace custseg {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A required CSV column is absent.
class SchemaError : public Error {
public:
    explicit SchemaError(std::string column)
        : Error("missing column: " + column), column_(std::move(column)) {}
    const std::string& column() const noexcept { return column_; }

private:
    std::string column_;
};

/// A cell could not be parsed or violates a domain invariant. `row` is the
/// zero-based data row (the header is not counted).
class ValueError : public Error {
public:
    ValueError(std::size_t row, const std::string& what)
        : Error("row " + std::to_string(row) + ": " + what), row_(row) {}
    explicit ValueError(const std::string& what) : Error(what), row_(npos) {}

    static constexpr std::size_t npos = static_cast<std::size_t>(-1);
    std::size_t row() const noexcept { return row_; }

private:
    std::size_t row_;
};

class ParseError : public ValueError {
public:
    using ValueError::ValueError;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class InputError : public Error {
public:
    using Error::Error;
};

/// A cluster validity index is mathematically undefined for the input.
class MetricError : public Error {
public:
    using Error::Error;
};

/// Non-finite values appeared during a numeric computation.
class NumericError : public Error {
public:
    using Error::Error;
};

/// A pipeline stage failed; wraps the underlying message.
class StageError : public Error {
public:
    StageError(std::string stage, const std::string& what)
        : Error("stage '" + stage + "' failed: " + what), stage_(std::move(stage)) {}
    const std::string& stage() const noexcept { return stage_; }

private:
    std::string stage_;
};

}  // namespace custseg
