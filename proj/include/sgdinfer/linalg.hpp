#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace sgdinfer {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

/// Raised when a symmetric factorization meets a non-positive pivot.
class FactorizationError : public std::runtime_error {
 public:
  FactorizationError(Index pivot, double value);
  Index pivot() const { return pivot_; }
  double value() const { return value_; }

 private:
  Index pivot_;
  double value_;
};

/// Lower-triangular L with m = L Lᵀ. Only the lower triangle of m is read.
Matrix cholesky_factor(const Matrix& m);

/// Inverse of a symmetric positive definite matrix via its Cholesky factor.
/// The result is exactly symmetric.
Matrix invert_spd(const Matrix& m);

/// Solves m x = rhs for SPD m.
Vector solve_spd(const Matrix& m, const Vector& rhs);

/// Largest singular value, by power iteration on mᵀm.
double spectral_norm(const Matrix& m);

bool all_finite(const Matrix& m);
bool all_finite(const Vector& v);

}  // namespace sgdinfer
