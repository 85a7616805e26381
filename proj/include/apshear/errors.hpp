#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace apshear {

/// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of an operation (negative q, non-finite input, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A structured precondition failure; carries every problem found, not just the first.
class ValidationError : public Error {
 public:
  explicit ValidationError(std::vector<std::string> problems)
      : Error(join(problems)), problems_(std::move(problems)) {}

  const std::vector<std::string>& problems() const noexcept { return problems_; }

 private:
  static std::string join(const std::vector<std::string>& p) {
    std::string out = "validation failed";
    for (const auto& s : p) out += "\n  - " + s;
    return out;
  }
  std::vector<std::string> problems_;
};

/// Model II assembly hit |grad u|^2 >= q1 at a flux sample.
class EllipticityExceeded : public Error {
 public:
  EllipticityExceeded(double x, double y, double grad_sq, double q1)
      : Error("ellipticity exceeded: |grad u|^2 = " + std::to_string(grad_sq) + " >= q1 = " +
              std::to_string(q1) + " at (" + std::to_string(x) + ", " + std::to_string(y) + ")"),
        x(x), y(y), grad_sq(grad_sq), q1(q1) {}

  double x, y, grad_sq, q1;
};

/// Newton iteration failed to reach tolerance.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, std::vector<double> history)
      : Error(what), history(std::move(history)) {}

  std::vector<double> history;
};

/// The sparse factorization broke down.
class SingularJacobian : public Error {
 public:
  SingularJacobian() : Error("singular Jacobian: fold or ellipticity loss suspected") {}
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace apshear
