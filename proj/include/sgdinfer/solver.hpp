#pragma once

#include <optional>
#include <stdexcept>

#include "sgdinfer/linalg.hpp"
#include "sgdinfer/models.hpp"

namespace sgdinfer {

struct FitResult {
  Vector theta_hat;
  int iterations = 0;
  double final_gradient_norm = 0.0;
};

/// Newton failed: singular Hessian, stalled line search, or iteration cap.
/// Carries the last iterate reached.
class FitError : public std::runtime_error {
 public:
  FitError(const std::string& what, Vector last_iterate, int iterations)
      : std::runtime_error(what), last_iterate_(std::move(last_iterate)), iterations_(iterations) {}
  const Vector& last_iterate() const { return last_iterate_; }
  int iterations() const { return iterations_; }

 private:
  Vector last_iterate_;
  int iterations_;
};

/// Starting point used when none is given: zeros, or ones for the
/// exponential and Poisson families whose domain is θ > 0.
Vector default_start(const ModelSpec& model, const Dataset& data);

/// Empirical risk minimizer by damped Newton: θ ← θ - s H(θ)⁻¹∇f(θ), with s
/// halved until the loss does not increase. Stops once ‖∇f(θ)‖₂ ≤ tol.
FitResult fit_erm(const ModelSpec& model, const Dataset& data, double tol = 1e-10, int max_iter = 100,
                  const std::optional<Vector>& theta_init = std::nullopt);

/// Ĝ = (1/n) Σ ∇f_i ∇f_iᵀ of the underlying per-observation risk.
Matrix gradient_outer_product(const ModelSpec& model, const Vector& theta, const Dataset& data);

/// Ĥ⁻¹ĜĤ⁻¹ at θ̂ for the underlying risk (k for the logistic families).
/// Estimates the asymptotic covariance of √n(θ̂ - θ*); divide by n for θ̂.
Matrix sandwich_covariance(const ModelSpec& model, const Vector& theta_hat, const Dataset& data);

/// Ĥ at θ̂ for the underlying risk: the empirical Fisher information under
/// a correctly specified likelihood.
Matrix fisher_information(const ModelSpec& model, const Vector& theta_hat, const Dataset& data);

}  // namespace sgdinfer
