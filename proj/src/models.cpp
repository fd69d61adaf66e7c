#include "sgdinfer/models.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace sgdinfer {

namespace {

// log(1 + exp(z)) without overflow
double softplus(double z) { return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

// 1 / (1 + exp(-z))
double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

bool is_scalar_mle(Family f) { return f == Family::ExponentialMLE || f == Family::PoissonMLE; }

// out += weight * ∇f_i(θ) for the underlying per-observation risk
inline void add_observation_gradient(Family family, const Vector& theta, const Dataset& data, Index i,
                                     double weight, Vector& out) {
  switch (family) {
    case Family::MeanEstimation:
      out.noalias() += weight * (theta - data.row(i).transpose());
      break;
    case Family::LinearRegression: {
      const double residual = data.row(i).dot(theta) - data.y(i);
      out.noalias() += (weight * residual) * data.row(i).transpose();
      break;
    }
    case Family::LogisticVanilla:
    case Family::LogisticModified: {
      const double yi = data.y(i);
      const double margin = yi * data.row(i).dot(theta);
      out.noalias() += (-weight * yi * sigmoid(-margin)) * data.row(i).transpose();
      break;
    }
    case Family::ExponentialMLE:
      out(0) += weight * (-1.0 / theta(0) + data.features()(i, 0));
      break;
    case Family::PoissonMLE:
      out(0) += weight * (1.0 - data.features()(i, 0) / theta(0));
      break;
  }
}

// out += weight * ∇²f_i(θ) (underlying risk)
void add_observation_hessian(Family family, const Vector& theta, const Dataset& data, Index i, double weight,
                             Matrix& out) {
  switch (family) {
    case Family::MeanEstimation:
      out.diagonal().array() += weight;
      break;
    case Family::LinearRegression:
      out.noalias() += weight * data.row(i).transpose() * data.row(i);
      break;
    case Family::LogisticVanilla:
    case Family::LogisticModified: {
      const double margin = data.y(i) * data.row(i).dot(theta);
      const double curvature = sigmoid(margin) * sigmoid(-margin);
      out.noalias() += (weight * curvature) * data.row(i).transpose() * data.row(i);
      break;
    }
    case Family::ExponentialMLE:
      out(0, 0) += weight / (theta(0) * theta(0));
      break;
    case Family::PoissonMLE:
      out(0, 0) += weight * data.features()(i, 0) / (theta(0) * theta(0));
      break;
  }
}

double observation_loss(Family family, const Vector& theta, const Dataset& data, Index i) {
  switch (family) {
    case Family::MeanEstimation:
      return 0.5 * (data.row(i).transpose() - theta).squaredNorm();
    case Family::LinearRegression: {
      const double residual = data.row(i).dot(theta) - data.y(i);
      return 0.5 * residual * residual;
    }
    case Family::LogisticVanilla:
    case Family::LogisticModified:
      return softplus(-data.y(i) * data.row(i).dot(theta));
    case Family::ExponentialMLE:
      return -std::log(theta(0)) + theta(0) * data.features()(i, 0);
    case Family::PoissonMLE:
      return -data.features()(i, 0) * std::log(theta(0)) + theta(0);
  }
  return 0.0;
}

// k(θ) and ∇k(θ) over the full data
double logistic_risk(const Vector& theta, const Dataset& data, Vector* grad) {
  double total = 0.0;
  if (grad) grad->setZero(theta.size());
  const double w = 1.0 / static_cast<double>(data.n());
  for (Index i = 0; i < data.n(); ++i) {
    total += logistic_term(theta, data, i);
    if (grad) add_observation_gradient(Family::LogisticVanilla, theta, data, i, w, *grad);
  }
  return total * w;
}

}  // namespace

std::string to_string(Family family) {
  switch (family) {
    case Family::MeanEstimation: return "mean";
    case Family::LinearRegression: return "linear";
    case Family::LogisticVanilla: return "logistic";
    case Family::LogisticModified: return "logistic_modified";
    case Family::ExponentialMLE: return "exponential";
    case Family::PoissonMLE: return "poisson";
  }
  return "unknown";
}

Family parse_family(const std::string& name) {
  for (Family f : {Family::MeanEstimation, Family::LinearRegression, Family::LogisticVanilla,
                   Family::LogisticModified, Family::ExponentialMLE, Family::PoissonMLE}) {
    if (to_string(f) == name) return f;
  }
  throw std::invalid_argument("unknown model family '" + name + "'");
}

std::string to_string(Sampling sampling) {
  return sampling == Sampling::WithReplacement ? "with_replacement" : "without_replacement";
}

Sampling parse_sampling(const std::string& name) {
  if (name == "with_replacement") return Sampling::WithReplacement;
  if (name == "without_replacement") return Sampling::WithoutReplacement;
  throw std::invalid_argument("unknown sampling mode '" + name + "'");
}

Dataset::Dataset(Matrix features, std::optional<Vector> response)
    : features_(std::move(features)), response_(std::move(response)) {
  if (features_.rows() < 1) throw std::invalid_argument("dataset needs at least one observation");
  if (features_.cols() < 1) throw std::invalid_argument("dataset needs at least one feature column");
  if (!features_.allFinite()) throw std::invalid_argument("dataset features must be finite");
  if (response_) {
    if (response_->size() != features_.rows()) throw std::invalid_argument("response length must equal row count");
    if (!response_->allFinite()) throw std::invalid_argument("dataset response must be finite");
  }
}

const Vector& Dataset::response() const {
  if (!response_) throw std::logic_error("dataset has no response column");
  return *response_;
}

Dataset Dataset::subset(std::span<const Index> indices) const {
  Matrix x(static_cast<Index>(indices.size()), p());
  std::optional<Vector> y;
  if (response_) y = Vector(static_cast<Index>(indices.size()));
  for (std::size_t k = 0; k < indices.size(); ++k) {
    x.row(static_cast<Index>(k)) = features_.row(indices[k]);
    if (y) (*y)(static_cast<Index>(k)) = (*response_)(indices[k]);
  }
  return Dataset(std::move(x), std::move(y));
}

void ModelSpec::validate() const {
  if (!(c > 0.0) || !std::isfinite(c)) throw std::invalid_argument("model constant c must be positive");
  if (psi_mode.has_value() != (family == Family::LogisticModified)) {
    throw std::invalid_argument("psi_mode is required for, and only for, the modified logistic family");
  }
}

ModelSpec underlying_model(const ModelSpec& model) {
  return model.family == Family::LogisticModified ? ModelSpec::logistic_vanilla() : model;
}

Index parameter_dimension(const ModelSpec& model, const Dataset& data) {
  return is_scalar_mle(model.family) ? 1 : data.p();
}

void check_compatible(const ModelSpec& model, const Dataset& data) {
  model.validate();
  switch (model.family) {
    case Family::MeanEstimation:
      break;
    case Family::LinearRegression:
      if (!data.has_response()) throw std::invalid_argument("linear regression needs a response column");
      break;
    case Family::LogisticVanilla:
    case Family::LogisticModified:
      if (!data.has_response()) throw std::invalid_argument("logistic regression needs a label column");
      for (Index i = 0; i < data.n(); ++i) {
        if (data.y(i) != 1.0 && data.y(i) != -1.0) {
          throw std::invalid_argument("logistic labels must be exactly +1 or -1 (row " + std::to_string(i) + ")");
        }
      }
      break;
    case Family::ExponentialMLE:
    case Family::PoissonMLE:
      if (data.p() != 1) throw std::invalid_argument(to_string(model.family) + " expects a single data column");
      break;
  }
}

void check_theta(const ModelSpec& model, const Vector& theta, const Dataset& data) {
  if (theta.size() != parameter_dimension(model, data)) {
    throw std::domain_error("theta has dimension " + std::to_string(theta.size()) + ", expected " +
                            std::to_string(parameter_dimension(model, data)));
  }
  if (is_scalar_mle(model.family) && !(theta(0) > 0.0)) {
    throw std::domain_error(to_string(model.family) + " requires theta > 0");
  }
}

double logistic_term(const Vector& theta, const Dataset& data, Index i) {
  return softplus(-data.y(i) * data.row(i).dot(theta));
}

double loss(const ModelSpec& model, const Vector& theta, const Dataset& data) {
  check_theta(model, theta, data);
  if (model.family == Family::LogisticModified) {
    const double k = logistic_risk(theta, data, nullptr);
    return 0.5 * (model.c + k) * (model.c + k);
  }
  double total = 0.0;
  for (Index i = 0; i < data.n(); ++i) total += observation_loss(model.family, theta, data, i);
  return total / static_cast<double>(data.n());
}

Vector gradient(const ModelSpec& model, const Vector& theta, const Dataset& data) {
  check_theta(model, theta, data);
  if (model.family == Family::LogisticModified) {
    Vector grad_k;
    const double k = logistic_risk(theta, data, &grad_k);
    return (model.c + k) * grad_k;
  }
  Vector g = Vector::Zero(theta.size());
  const double w = 1.0 / static_cast<double>(data.n());
  for (Index i = 0; i < data.n(); ++i) add_observation_gradient(model.family, theta, data, i, w, g);
  return g;
}

Matrix hessian(const ModelSpec& model, const Vector& theta, const Dataset& data) {
  check_theta(model, theta, data);
  const Index p = theta.size();
  const double w = 1.0 / static_cast<double>(data.n());
  Matrix h = Matrix::Zero(p, p);
  for (Index i = 0; i < data.n(); ++i) add_observation_hessian(model.family, theta, data, i, w, h);
  if (model.family == Family::LogisticModified) {
    Vector grad_k;
    const double k = logistic_risk(theta, data, &grad_k);
    h = grad_k * grad_k.transpose() + (model.c + k) * h;
  }
  return 0.5 * (h + h.transpose());
}

Vector observation_gradient(const ModelSpec& model, const Vector& theta, const Dataset& data, Index i) {
  check_theta(model, theta, data);
  Vector g = Vector::Zero(theta.size());
  add_observation_gradient(underlying_model(model).family, theta, data, i, 1.0, g);
  return g;
}

std::vector<Index> draw_with_replacement(Index n, Index count, RngStream& rng) {
  std::vector<Index> out(static_cast<std::size_t>(count));
  for (auto& idx : out) idx = static_cast<Index>(rng.uniform_index(static_cast<std::size_t>(n)));
  return out;
}

std::vector<Index> draw_without_replacement(Index n, Index count, RngStream& rng) {
  if (count > n) throw std::invalid_argument("cannot draw more indices than observations without replacement");
  if (count * 4 >= n) {
    // partial Fisher-Yates
    std::vector<Index> pool(static_cast<std::size_t>(n));
    std::iota(pool.begin(), pool.end(), Index{0});
    for (Index k = 0; k < count; ++k) {
      const auto j = k + static_cast<Index>(rng.uniform_index(static_cast<std::size_t>(n - k)));
      std::swap(pool[static_cast<std::size_t>(k)], pool[static_cast<std::size_t>(j)]);
    }
    pool.resize(static_cast<std::size_t>(count));
    return pool;
  }
  // Floyd's algorithm
  std::vector<Index> out;
  out.reserve(static_cast<std::size_t>(count));
  for (Index j = n - count; j < n; ++j) {
    const auto t = static_cast<Index>(rng.uniform_index(static_cast<std::size_t>(j + 1)));
    if (std::find(out.begin(), out.end(), t) == out.end()) {
      out.push_back(t);
    } else {
      out.push_back(j);
    }
  }
  return out;
}

Vector batch_gradient(const ModelSpec& model, const Vector& theta, const Dataset& data,
                      std::span<const Index> batch) {
  if (model.family == Family::LogisticModified) {
    throw std::invalid_argument("use modified_logistic_batch_gradient for the modified logistic family");
  }
  check_theta(model, theta, data);
  if (batch.empty()) throw std::invalid_argument("batch must not be empty");
  Vector g = Vector::Zero(theta.size());
  const double w = 1.0 / static_cast<double>(batch.size());
  for (Index i : batch) add_observation_gradient(model.family, theta, data, i, w, g);
  return g;
}

void stochastic_gradient_into(const ModelSpec& model, const Vector& theta, const Dataset& data,
                              const BatchSpec& batch, RngStream& rng, Vector& out) {
  if (model.family == Family::LogisticModified) {
    throw std::invalid_argument("use modified_logistic_stochastic_gradient for the modified logistic family");
  }
  if (batch.size < 1) throw std::invalid_argument("batch size must be at least 1");
  if (is_scalar_mle(model.family) && !(theta(0) > 0.0)) {
    throw std::domain_error(to_string(model.family) + " requires theta > 0");
  }
  out.setZero();
  const double w = 1.0 / static_cast<double>(batch.size);
  const auto n = static_cast<std::size_t>(data.n());
  for (Index k = 0; k < batch.size; ++k) {
    const auto i = static_cast<Index>(rng.uniform_index(n));
    add_observation_gradient(model.family, theta, data, i, w, out);
  }
}

Vector stochastic_gradient(const ModelSpec& model, const Vector& theta, const Dataset& data,
                           const BatchSpec& batch, RngStream& rng) {
  check_theta(model, theta, data);
  Vector out(theta.size());
  stochastic_gradient_into(model, theta, data, batch, rng, out);
  return out;
}

Vector modified_logistic_batch_gradient(const Vector& theta, const Dataset& data, double c,
                                        std::span<const Index> psi, std::span<const Index> upsilon) {
  if (theta.size() != data.p()) throw std::domain_error("theta dimension does not match the data");
  if (psi.empty() || upsilon.empty()) throw std::invalid_argument("index sets must not be empty");
  double psi_s = 0.0;
  for (Index i : psi) psi_s += logistic_term(theta, data, i);
  psi_s = c + psi_s / static_cast<double>(psi.size());
  Vector upsilon_s = Vector::Zero(theta.size());
  const double w = 1.0 / static_cast<double>(upsilon.size());
  for (Index i : upsilon) add_observation_gradient(Family::LogisticVanilla, theta, data, i, w, upsilon_s);
  return psi_s * upsilon_s;
}

Vector modified_logistic_stochastic_gradient(const Vector& theta, const Dataset& data, const BatchSpec& batch,
                                             double c, Sampling psi_mode, RngStream& rng) {
  if (batch.s_psi < 1 || batch.s_upsilon < 1) throw std::invalid_argument("s_psi and s_upsilon must be >= 1");
  RngStream call = rng.fork();
  RngStream psi_rng = call.split(0);
  RngStream upsilon_rng = call.split(1);
  const auto psi = psi_mode == Sampling::WithReplacement
                       ? draw_with_replacement(data.n(), batch.s_psi, psi_rng)
                       : draw_without_replacement(data.n(), batch.s_psi, psi_rng);
  const auto upsilon = draw_with_replacement(data.n(), batch.s_upsilon, upsilon_rng);
  return modified_logistic_batch_gradient(theta, data, c, psi, upsilon);
}

double k_g(const Vector& theta, const Dataset& data, Index s_psi, double c, Sampling psi_mode) {
  const Index n = data.n();
  if (s_psi < 1) throw std::invalid_argument("s_psi must be >= 1");
  if (psi_mode == Sampling::WithoutReplacement && s_psi > n) {
    throw std::invalid_argument("s_psi cannot exceed n when sampling without replacement");
  }
  double second = 0.0;
  double mean = 0.0;
  for (Index i = 0; i < n; ++i) {
    const double v = c + logistic_term(theta, data, i);
    second += v * v;
    mean += v;
  }
  second /= static_cast<double>(n);
  mean /= static_cast<double>(n);
  const double s = static_cast<double>(s_psi);
  if (s_psi == 1) return second;
  if (psi_mode == Sampling::WithReplacement) return second / s + (s - 1.0) / s * mean * mean;
  if (n == 1) throw std::invalid_argument("without-replacement K_G needs n > 1 when s_psi > 1");
  const double nd = static_cast<double>(n);
  return (1.0 - (s - 1.0) / (nd - 1.0)) / s * second + (s - 1.0) / s * nd / (nd - 1.0) * mean * mean;
}

double scaling_factor(const ModelSpec& model, const Vector& theta_hat, const Dataset& data,
                      const BatchSpec& batch) {
  model.validate();
  check_theta(model, theta_hat, data);
  if (model.family == Family::LogisticModified) {
    const double k = logistic_risk(theta_hat, data, nullptr);
    return (model.c + k) * (model.c + k) / k_g(theta_hat, data, batch.s_psi, model.c, *model.psi_mode);
  }
  if (batch.size < 1) throw std::invalid_argument("batch size must be at least 1");
  return static_cast<double>(batch.size);
}

}  // namespace sgdinfer
