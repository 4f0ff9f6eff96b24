#pragma once

#include <stdexcept>
#include <string>

namespace dimerlab {

/// Requested operator dimension exceeds the configured cap.
class DimensionCapError : public std::runtime_error {
 public:
  explicit DimensionCapError(const std::string& what) : std::runtime_error(what) {}
};

/// An iterative method (eigensolver or self-consistency loop) failed to
/// converge; carries the best residual reached.
class NonConvergenceError : public std::runtime_error {
 public:
  NonConvergenceError(const std::string& what, double residual)
      : std::runtime_error(what), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

}  // namespace dimerlab
