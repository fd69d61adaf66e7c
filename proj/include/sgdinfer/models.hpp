#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sgdinfer/linalg.hpp"
#include "sgdinfer/rng.hpp"

namespace sgdinfer {

enum class Family {
  MeanEstimation,
  LinearRegression,
  LogisticVanilla,
  LogisticModified,
  ExponentialMLE,
  PoissonMLE,
};

enum class Sampling { WithReplacement, WithoutReplacement };

std::string to_string(Family family);
Family parse_family(const std::string& name);
std::string to_string(Sampling sampling);
Sampling parse_sampling(const std::string& name);

/// Observations X_i as rows of `features`, with an optional response y_i.
///
/// Mean estimation uses the rows themselves as observations. The exponential
/// and Poisson families expect a single feature column holding x_i. No
/// intercept is added; callers append a constant column when they need one.
class Dataset {
 public:
  explicit Dataset(Matrix features, std::optional<Vector> response = std::nullopt);

  Index n() const { return features_.rows(); }
  Index p() const { return features_.cols(); }
  const Matrix& features() const { return features_; }
  bool has_response() const { return response_.has_value(); }
  const Vector& response() const;

  auto row(Index i) const { return features_.row(i); }
  double y(Index i) const { return (*response_)(i); }

  /// Dataset made of rows `indices` (with repetition allowed).
  Dataset subset(std::span<const Index> indices) const;

 private:
  Matrix features_;
  std::optional<Vector> response_;
};

/// Which empirical risk is minimized. `c` and `psi_mode` only apply to the
/// modified logistic objective ½(c + k(θ))².
struct ModelSpec {
  Family family = Family::MeanEstimation;
  double c = 1.0;
  std::optional<Sampling> psi_mode;

  static ModelSpec mean_estimation() { return {Family::MeanEstimation, 1.0, std::nullopt}; }
  static ModelSpec linear_regression() { return {Family::LinearRegression, 1.0, std::nullopt}; }
  static ModelSpec logistic_vanilla() { return {Family::LogisticVanilla, 1.0, std::nullopt}; }
  static ModelSpec logistic_modified(double c = 1.0, Sampling psi_mode = Sampling::WithReplacement) {
    return {Family::LogisticModified, c, psi_mode};
  }
  static ModelSpec exponential_mle() { return {Family::ExponentialMLE, 1.0, std::nullopt}; }
  static ModelSpec poisson_mle() { return {Family::PoissonMLE, 1.0, std::nullopt}; }

  void validate() const;
};

/// Mini-batch sizes. `size` is S for the ordinary stochastic gradient; the
/// modified logistic gradient uses `s_psi` and `s_upsilon` instead.
struct BatchSpec {
  Index size = 1;
  Index s_psi = 1;
  Index s_upsilon = 1;
};

/// Model whose per-observation risk drives inference: k for the modified
/// logistic objective, the model itself otherwise.
ModelSpec underlying_model(const ModelSpec& model);

/// Dimension of θ for this model on this data.
Index parameter_dimension(const ModelSpec& model, const Dataset& data);

/// Throws std::invalid_argument when the model cannot be evaluated on data.
void check_compatible(const ModelSpec& model, const Dataset& data);

/// Throws std::domain_error when θ has the wrong dimension or lies outside
/// the model's domain (θ > 0 for the exponential and Poisson families).
void check_theta(const ModelSpec& model, const Vector& theta, const Dataset& data);

double loss(const ModelSpec& model, const Vector& theta, const Dataset& data);
Vector gradient(const ModelSpec& model, const Vector& theta, const Dataset& data);
Matrix hessian(const ModelSpec& model, const Vector& theta, const Dataset& data);

/// ∇f_i(θ) of the underlying per-observation risk (k_i for logistic families).
Vector observation_gradient(const ModelSpec& model, const Vector& theta, const Dataset& data, Index i);

/// Per-observation logistic risk k_i(θ) = log(1 + exp(-y_i θᵀx_i)).
double logistic_term(const Vector& theta, const Dataset& data, Index i);

/// S indices drawn uniformly with replacement.
std::vector<Index> draw_with_replacement(Index n, Index count, RngStream& rng);

/// `count` distinct indices drawn uniformly without replacement.
std::vector<Index> draw_without_replacement(Index n, Index count, RngStream& rng);

/// (1/|batch|) Σ_{i∈batch} ∇f_i(θ) for a fixed index multiset.
Vector batch_gradient(const ModelSpec& model, const Vector& theta, const Dataset& data,
                      std::span<const Index> batch);

/// Mini-batch stochastic gradient with S = batch.size indices drawn with
/// replacement. Not defined for the modified logistic family.
Vector stochastic_gradient(const ModelSpec& model, const Vector& theta, const Dataset& data,
                           const BatchSpec& batch, RngStream& rng);

/// In-place variant used by the SGD loop; `out` must have the right size.
void stochastic_gradient_into(const ModelSpec& model, const Vector& theta, const Dataset& data,
                              const BatchSpec& batch, RngStream& rng, Vector& out);

/// Ψ_s · Υ_s for fixed index sets: Ψ_s = c + mean of k_i over `psi`,
/// Υ_s = mean of ∇k_i over `upsilon`.
Vector modified_logistic_batch_gradient(const Vector& theta, const Dataset& data, double c,
                                        std::span<const Index> psi, std::span<const Index> upsilon);

/// Stochastic gradient of ½(c + k(θ))². The Ψ and Υ index sets are drawn
/// from two independent child streams forked from `rng`.
Vector modified_logistic_stochastic_gradient(const Vector& theta, const Dataset& data, const BatchSpec& batch,
                                             double c, Sampling psi_mode, RngStream& rng);

/// K_G(θ) = E[Ψ_s²] in closed form for the chosen Ψ sampling mode.
double k_g(const Vector& theta, const Dataset& data, Index s_psi, double c, Sampling psi_mode);

/// Scaling factor K_s used when rescaling segment averages.
double scaling_factor(const ModelSpec& model, const Vector& theta_hat, const Dataset& data,
                      const BatchSpec& batch);

}  // namespace sgdinfer
