#pragma once

#include <stdexcept>
#include <string>

namespace nudge {

// Geometric series diverge (z = 0 or 1 - gamma(1 - d) = 0).
class SingularityError : public std::domain_error {
 public:
  explicit SingularityError(const std::string& what) : std::domain_error(what) {}
};

// Value iteration ran out of iterations before reaching the tolerance.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double residual)
      : std::runtime_error(what), residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

}  // namespace nudge
