#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace stochpath {

// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Argument outside the mathematical domain of an operation (|rho| > 1, dt <= 0, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

// Incompatible model/scheme combination or invalid simulation setup.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// A required CSV column is missing.
class SchemaError : public Error {
 public:
  explicit SchemaError(std::string column)
      : Error("missing required column '" + column + "'"), column_(std::move(column)) {}

  const std::string& column() const noexcept { return column_; }

 private:
  std::string column_;
};

// A cell that could not be parsed. Rows are 1-based file line numbers.
class ParseError : public Error {
 public:
  ParseError(std::size_t row, std::string column, const std::string& what)
      : Error("row " + std::to_string(row) + ", column '" + column + "': " + what),
        row_(row),
        column_(std::move(column)) {}

  std::size_t row() const noexcept { return row_; }
  const std::string& column() const noexcept { return column_; }

 private:
  std::size_t row_;
  std::string column_;
};

// Well-formed input that violates a data invariant (non-positive close, repeated date).
class DataError : public Error {
 public:
  DataError(std::size_t row, const std::string& what)
      : Error("row " + std::to_string(row) + ": " + what), row_(row) {}

  std::size_t row() const noexcept { return row_; }

 private:
  std::size_t row_;
};

// Calibration could not produce an estimate from the given series.
class EstimationError : public Error {
 public:
  using Error::Error;
};

}  // namespace stochpath
