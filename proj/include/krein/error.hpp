#pragma once

#include <stdexcept>
#include <string>

namespace krein {

/// Input violates a documented precondition or type invariant.
class validation_error : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A function model has no derivative at the requested point.
class non_differentiable_error : public validation_error {
 public:
  non_differentiable_error(const std::string& what, double angle)
      : validation_error(what), angle_(angle) {}
  double angle() const noexcept { return angle_; }

 private:
  double angle_;
};

/// A numerical procedure failed to deliver its postconditions
/// (non-convergence, refinement exhaustion, tolerance not met).
class numerical_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace krein
