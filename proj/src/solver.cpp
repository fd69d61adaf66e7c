#include "sgdinfer/solver.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace sgdinfer {

namespace {

double safe_loss(const ModelSpec& model, const Vector& theta, const Dataset& data) {
  try {
    const double value = loss(model, theta, data);
    return std::isfinite(value) ? value : std::numeric_limits<double>::infinity();
  } catch (const std::domain_error&) {
    return std::numeric_limits<double>::infinity();
  }
}

}  // namespace

Vector default_start(const ModelSpec& model, const Dataset& data) {
  const Index p = parameter_dimension(model, data);
  if (model.family == Family::ExponentialMLE || model.family == Family::PoissonMLE) return Vector::Ones(p);
  return Vector::Zero(p);
}

FitResult fit_erm(const ModelSpec& model, const Dataset& data, double tol, int max_iter,
                  const std::optional<Vector>& theta_init) {
  check_compatible(model, data);
  Vector theta = theta_init ? *theta_init : default_start(model, data);
  check_theta(model, theta, data);

  double current = loss(model, theta, data);
  Vector grad = gradient(model, theta, data);
  int iter = 0;
  while (grad.norm() > tol) {
    if (iter >= max_iter) {
      std::ostringstream os;
      os << "Newton did not converge in " << max_iter << " iterations (gradient norm " << grad.norm() << ")";
      throw FitError(os.str(), theta, iter);
    }
    Vector step;
    try {
      step = solve_spd(hessian(model, theta, data), grad);
    } catch (const FactorizationError& e) {
      throw FitError(std::string("Hessian factorization failed: ") + e.what(), theta, iter);
    }

    double scale = 1.0;
    Vector candidate = theta - step;
    double next = safe_loss(model, candidate, data);
    int halvings = 0;
    while (!(next <= current + 1e-14 * (1.0 + std::abs(current)))) {
      if (++halvings > 60) throw FitError("line search failed to decrease the loss", theta, iter);
      scale *= 0.5;
      candidate = theta - scale * step;
      next = safe_loss(model, candidate, data);
    }
    theta = std::move(candidate);
    current = next;
    grad = gradient(model, theta, data);
    ++iter;
  }
  return {theta, iter, grad.norm()};
}

Matrix gradient_outer_product(const ModelSpec& model, const Vector& theta, const Dataset& data) {
  const Index p = theta.size();
  Matrix g = Matrix::Zero(p, p);
  for (Index i = 0; i < data.n(); ++i) {
    const Vector gi = observation_gradient(model, theta, data, i);
    g.selfadjointView<Eigen::Lower>().rankUpdate(gi);
  }
  Matrix out = g.selfadjointView<Eigen::Lower>();
  return out / static_cast<double>(data.n());
}

Matrix fisher_information(const ModelSpec& model, const Vector& theta_hat, const Dataset& data) {
  check_compatible(model, data);
  return hessian(underlying_model(model), theta_hat, data);
}

Matrix sandwich_covariance(const ModelSpec& model, const Vector& theta_hat, const Dataset& data) {
  check_compatible(model, data);
  const Matrix h_inv = invert_spd(hessian(underlying_model(model), theta_hat, data));
  const Matrix g = gradient_outer_product(model, theta_hat, data);
  Matrix s = h_inv * g * h_inv;
  return 0.5 * (s + s.transpose());
}

}  // namespace sgdinfer
