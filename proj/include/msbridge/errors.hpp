#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace msb {

/// Base class for all library errors. The CLI maps the concrete type to an
/// exit code (1 validation, 2 numerical failure, 3 infeasible).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Precondition or input validation failure.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// File or parse failure.
class IoError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// Iterative method failed to reach its tolerances.
class NumericalError : public Error {
 public:
  NumericalError(const std::string& what, double marginal_residual = 0.0,
                 double martingale_residual = 0.0)
      : Error(what),
        marginal_residual_(marginal_residual),
        martingale_residual_(martingale_residual) {}

  double marginal_residual() const { return marginal_residual_; }
  double martingale_residual() const { return martingale_residual_; }

 private:
  double marginal_residual_;
  double martingale_residual_;
};

/// Linear system has no nonnegative solution. The certificate y satisfies
/// y^T A <= 0 and y^T b > 0 for the system A x = b, x >= 0.
class InfeasibleError : public Error {
 public:
  InfeasibleError(const std::string& what, std::vector<double> certificate = {})
      : Error(what), certificate_(std::move(certificate)) {}

  const std::vector<double>& certificate() const { return certificate_; }

 private:
  std::vector<double> certificate_;
};

}  // namespace msb
