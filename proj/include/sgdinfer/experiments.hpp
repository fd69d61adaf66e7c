#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "sgdinfer/baselines.hpp"
#include "sgdinfer/linalg.hpp"
#include "sgdinfer/models.hpp"
#include "sgdinfer/rng.hpp"
#include "sgdinfer/sgd_inference.hpp"
#include "sgdinfer/stats.hpp"

namespace sgdinfer {

enum class GeneratorKind {
  NormalMean,
  ExponentialData,
  PoissonData,
  LinearExp1,
  LinearExp2,
  LogisticExp1,
  LogisticExp2,
  CsvFile,
};

std::string to_string(GeneratorKind kind);
GeneratorKind parse_generator(const std::string& name);

/// Synthetic data law. Linear: X ~ N(0, Σ), y = w*ᵀX + ε, ε ~ N(0, σ²),
/// w* = 1_p/√p. Logistic: y = ±1 with probability ½, X | y ~ N(signal·y·1_p/√p, Σ).
/// Σ_ij = ρ^|i-j| in both. Univariate laws use `lambda` (and unit variance
/// for NormalMean, which may be p-dimensional).
struct GeneratorSpec {
  GeneratorKind kind = GeneratorKind::NormalMean;
  Index n = 20;
  Index p = 1;
  double sigma = 10.0;
  double rho = 0.0;
  double signal = 0.01;
  double lambda = 1.0;
  /// Model fitted to the data. Presets pick the natural one.
  ModelSpec model = ModelSpec::mean_estimation();
  /// CsvFile only.
  std::string csv_path;

  /// Sizes and parameters of the named experiment.
  static GeneratorSpec preset(GeneratorKind kind);

  void validate() const;
};

struct Generated {
  Dataset data;
  Vector true_theta;
};

/// Population minimizer θ* for the spec's law. For CsvFile there is no
/// population, so this is left empty and generate() substitutes θ̂.
Vector population_theta(const GeneratorSpec& spec);

Generated generate(const GeneratorSpec& spec, RngStream& rng);

enum class CovarianceSource { Sandwich, InverseFisher };

std::string to_string(CovarianceSource source);
CovarianceSource parse_covariance_source(const std::string& name);

struct SgdMethod {
  /// The per-simulation seed replaces cfg.seed.
  SgdConfig cfg;
  ThetaHatSource theta_hat = ThetaHatSource::SegmentMean;
};

struct BootstrapMethod {
  /// The per-simulation seed replaces cfg.seed; cfg.threads is ignored.
  BootstrapConfig cfg;
};

struct NormalApproxMethod {
  CovarianceSource source = CovarianceSource::Sandwich;
  double solver_tol = 1e-10;
};

/// Any other interval procedure, mainly for harness checks.
struct CustomMethod {
  std::string name;
  /// Returns the intervals and the operation count.
  std::function<std::pair<CiTable, std::int64_t>(const Generated&, const ModelSpec&, double level, RngStream&)> fn;
};

using Method = std::variant<SgdMethod, BootstrapMethod, NormalApproxMethod, CustomMethod>;

std::string method_name(const Method& method);

/// Intervals and operation count from one method on one dataset.
std::pair<CiTable, std::int64_t> run_method(const Method& method, const ModelSpec& model, const Generated& g,
                                            double level, RngStream& rng);

struct ExperimentReport {
  std::string method;
  double coverage = 0.0;
  double avg_width = 0.0;
  int num_sims = 0;
  int failed = 0;
  double runtime_seconds = 0.0;
  std::int64_t operation_count = 0;
};

/// Raised when more than 5% of simulations fail for some method.
class ExperimentError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Simulation s draws its dataset from RngStream(master_seed, 2s) and method m
/// runs on RngStream(master_seed, 2s+1).split(m). Every method sees the same
/// datasets. Results are reduced in simulation order, so they do not depend
/// on `threads`.
std::vector<ExperimentReport> compare_methods(const GeneratorSpec& spec, std::span<const Method> methods,
                                              int num_sims, double level, std::uint64_t master_seed,
                                              int threads = 1);

ExperimentReport coverage_simulation(const GeneratorSpec& spec, const Method& method, int num_sims, double level,
                                     std::uint64_t master_seed, int threads = 1);

/// SGD inference, bootstrap and normal approximation with the settings used
/// for each univariate law.
std::vector<Method> univariate_methods(GeneratorKind kind);

std::vector<ExperimentReport> univariate_comparison(GeneratorKind kind, int num_sims, double level,
                                                    std::uint64_t master_seed, int threads = 1);

/// Settings for the multivariate experiments: R = 200 segments, d = 100,
/// batch 4, b = 5000, started at zero.
SgdConfig multivariate_sgd_config(double eta, std::int64_t t);

/// Covariance of θ̂ estimated four ways (all already divided by n where the
/// estimator targets the asymptotic covariance).
struct CovarianceComparison {
  Vector theta_hat;
  Matrix sgd;
  std::optional<Matrix> bootstrap;
  Matrix sandwich;
  Matrix inverse_fisher;
};

CovarianceComparison covariance_comparison(const ModelSpec& model, const Dataset& data, const SgdConfig& sgd,
                                           const std::optional<BootstrapConfig>& bootstrap);

/// p × 4 (or 3 without bootstrap) table of diagonals: sgd, bootstrap,
/// sandwich, inverse_fisher.
Matrix diagonal_table(const CovarianceComparison& cmp);

struct NormalReference {
  double mean = 0.0;
  double variance = 1.0;
};

struct QqPoint {
  double theoretical = 0.0;
  double sample = 0.0;
};

/// Sorted samples against reference quantiles at (k - 0.5)/len.
std::vector<QqPoint> qq_export(std::span<const double> samples, const NormalReference& reference);

struct TrendCell {
  double eta = 0.0;
  std::int64_t t = 0;
  double error = 0.0;
};

struct TrendConfig {
  std::vector<double> etas;
  std::vector<std::int64_t> ts;
  Index batch_size = 1;
  int runs_per_cell = 2000;
  /// Burn-in per chain, started from zero.
  std::int64_t burn_in = 1000;
  std::uint64_t master_seed = 0;
  int threads = 1;
};

/// For each (η_k, t_k) pair, ‖t·Ê[(θ̄_t - θ̂)(θ̄_t - θ̂)ᵀ] - Σ̂/S‖₂ on mean
/// estimation, with Σ̂ the (1/n) data covariance. Each run is one segment
/// after burn-in; chain r of cell k is seeded from RngStream(master_seed, k).split(r).
std::vector<TrendCell> covariance_error_trend(const Dataset& data, const TrendConfig& cfg);

}  // namespace sgdinfer
