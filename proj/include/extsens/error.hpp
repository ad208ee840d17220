#pragma once

#include <stdexcept>
#include <string>

namespace extsens {

/// Invalid input or configuration: bad flags, malformed files, violated
/// preconditions. CLI maps this to exit code 2.
class ValidationError : public std::invalid_argument {
 public:
  ValidationError(std::string code, const std::string& what)
      : std::invalid_argument(code + ": " + what), code_(std::move(code)) {}

  /// Machine-readable error code, stable across releases.
  const std::string& code() const { return code_; }

 private:
  std::string code_;
};

/// Numerical failure: non-convergence, degenerate systems. Carries the last
/// iterate's residual so callers can log diagnostics. CLI exit code 3.
class NumericalError : public std::runtime_error {
 public:
  NumericalError(std::string code, const std::string& what,
                 double residual = 0.0)
      : std::runtime_error(code + ": " + what),
        code_(std::move(code)),
        residual_(residual) {}

  const std::string& code() const { return code_; }
  double residual() const { return residual_; }

 private:
  std::string code_;
  double residual_;
};

}  // namespace extsens
