#pragma once

#include <stdexcept>
#include <string>

namespace rtpref {

// Exit/status codes shared by the C API and the CLI.
enum class ErrorKind : int {
  kValidation = 1,
  kNumerical = 2,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Bad input: malformed rows, out-of-range parameters, unknown config keys, I/O.
class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& what) : Error(ErrorKind::kValidation, what) {}
};

/// A computation that could not produce a trustworthy number (divergence,
/// non-convergence, empty bracket).
class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& what) : Error(ErrorKind::kNumerical, what) {}
};

}  // namespace rtpref
