#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace oscdmrg {

/// Invalid argument or violated precondition.
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A requested object would exceed a configured size cap.
class ResourceError : public std::length_error {
 public:
  using std::length_error::length_error;
};

/// Iterative eigensolver did not reach the requested tolerance.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, std::vector<double> residual_norms)
      : std::runtime_error(what), residual_norms_(std::move(residual_norms)) {}

  const std::vector<double>& residual_norms() const { return residual_norms_; }

 private:
  std::vector<double> residual_norms_;
};

/// Matrix handed to an entropy routine is not a density matrix.
class InvalidDensityError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

}  // namespace oscdmrg
