// Error types shared across the library. Every failure surfaces as an
// exception derived from dwellrec::Error; the CLI maps the category to an
// exit code.

#pragma once

#include <stdexcept>
#include <string>

namespace dwellrec {

enum class ErrorKind {
  kInvalidInput,
  kEmptyInput,
  kConfig,
  kFormat,
  kShape,
  kLookup,
  kNumeric,
  kRetryable,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

struct InvalidInputError : Error {
  explicit InvalidInputError(const std::string& w) : Error(ErrorKind::kInvalidInput, w) {}
};
struct EmptyInputError : Error {
  explicit EmptyInputError(const std::string& w) : Error(ErrorKind::kEmptyInput, w) {}
};
struct ConfigError : Error {
  explicit ConfigError(const std::string& w) : Error(ErrorKind::kConfig, w) {}
};
struct FormatError : Error {
  explicit FormatError(const std::string& w) : Error(ErrorKind::kFormat, w) {}
};
struct ShapeError : Error {
  explicit ShapeError(const std::string& w) : Error(ErrorKind::kShape, w) {}
};
struct LookupError : Error {
  explicit LookupError(const std::string& w) : Error(ErrorKind::kLookup, w) {}
};
struct NumericError : Error {
  explicit NumericError(const std::string& w) : Error(ErrorKind::kNumeric, w) {}
};
// Transient failure (network); the operation may succeed if repeated.
struct RetryableError : Error {
  explicit RetryableError(const std::string& w) : Error(ErrorKind::kRetryable, w) {}
};

}  // namespace dwellrec
