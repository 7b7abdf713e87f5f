#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace clr {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input data problems: malformed files, bad indices, unusable values.
class DataError : public Error {
 public:
  using Error::Error;
};

class ParseError : public DataError {
 public:
  ParseError(std::size_t line, const std::string& what)
      : DataError("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class BoundsError : public DataError {
 public:
  using DataError::DataError;
};

class DuplicateError : public DataError {
 public:
  using DataError::DataError;
};

class DegenerateRangeError : public DataError {
 public:
  using DataError::DataError;
};

class RatioError : public DataError {
 public:
  using DataError::DataError;
};

/// Invalid configuration values (learning rate, swarm size, ...).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Training produced non-finite parameters or no usable model.
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace clr
