#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace polydeconv {

enum class ErrorKind {
  InvalidParameter,
  InvalidInput,
  Precision,
  Resolution,
  Divergence,
  Format,  // malformed or unreadable file
};

std::string_view to_string(ErrorKind kind) noexcept;

/// Base for every error raised by the library. The kind drives CLI exit codes.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class InvalidParameter : public Error {
 public:
  explicit InvalidParameter(const std::string& message)
      : Error(ErrorKind::InvalidParameter, message) {}
};

class InvalidInput : public Error {
 public:
  explicit InvalidInput(const std::string& message)
      : Error(ErrorKind::InvalidInput, message) {}
};

class ResolutionError : public Error {
 public:
  explicit ResolutionError(const std::string& message)
      : Error(ErrorKind::Resolution, message) {}
};

class FormatError : public Error {
 public:
  explicit FormatError(const std::string& message)
      : Error(ErrorKind::Format, message) {}
};

/// Quadrature did not reach the requested tolerance.
class PrecisionError : public Error {
 public:
  PrecisionError(const std::string& message, double achieved_error)
      : Error(ErrorKind::Precision, message), achieved_error_(achieved_error) {}

  double achieved_error() const noexcept { return achieved_error_; }

 private:
  double achieved_error_;
};

/// A non-finite value appeared while iterating.
class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& message, std::size_t iteration)
      : Error(ErrorKind::Divergence, message), iteration_(iteration) {}

  std::size_t iteration() const noexcept { return iteration_; }

 private:
  std::size_t iteration_;
};

}  // namespace polydeconv
