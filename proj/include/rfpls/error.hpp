#pragma once

#include <stdexcept>
#include <string>

namespace rfpls {

/// Broad failure categories; the CLI maps each one to an exit code.
enum class ErrorKind {
  Input,      ///< malformed data, dimension mismatch, precondition violation
  Numerical,  ///< breakdown of an estimator (degenerate scale, singular system)
  Config,     ///< invalid experiment configuration
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class InputError : public Error {
 public:
  explicit InputError(const std::string& what) : Error(ErrorKind::Input, what) {}
};

class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& what)
      : Error(ErrorKind::Numerical, what) {}
};

/// Raised when a MAD-type scale collapses to zero.
class DegenerateScaleError : public NumericalError {
 public:
  explicit DegenerateScaleError(const std::string& what) : NumericalError(what) {}
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(ErrorKind::Config, what) {}
};

}  // namespace rfpls
