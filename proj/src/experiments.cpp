#include "sgdinfer/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <random>
#include <stdexcept>

#include "sgdinfer/io.hpp"
#include "sgdinfer/parallel.hpp"
#include "sgdinfer/solver.hpp"

namespace sgdinfer {

namespace {

struct GeneratorName {
  GeneratorKind kind;
  const char* name;
};

constexpr GeneratorName kGeneratorNames[] = {
    {GeneratorKind::NormalMean, "normal_mean"},       {GeneratorKind::ExponentialData, "exponential"},
    {GeneratorKind::PoissonData, "poisson"},          {GeneratorKind::LinearExp1, "linear_exp1"},
    {GeneratorKind::LinearExp2, "linear_exp2"},       {GeneratorKind::LogisticExp1, "logistic_exp1"},
    {GeneratorKind::LogisticExp2, "logistic_exp2"},   {GeneratorKind::CsvFile, "csv"},
};

// Σ_ij = ρ^|i-j|
Matrix toeplitz(Index p, double rho) {
  Matrix sigma(p, p);
  for (Index i = 0; i < p; ++i) {
    for (Index j = 0; j < p; ++j) sigma(i, j) = std::pow(rho, static_cast<double>(std::abs(i - j)));
  }
  return sigma;
}

Matrix toeplitz_factor(Index p, double rho) { return cholesky_factor(toeplitz(p, rho)); }

Matrix standard_normal_matrix(Index rows, Index cols, RngStream& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix z(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    for (Index j = 0; j < cols; ++j) z(i, j) = normal(rng);
  }
  return z;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

std::string to_string(GeneratorKind kind) {
  for (const auto& g : kGeneratorNames) {
    if (g.kind == kind) return g.name;
  }
  throw std::invalid_argument("unknown generator kind");
}

GeneratorKind parse_generator(const std::string& name) {
  for (const auto& g : kGeneratorNames) {
    if (name == g.name) return g.kind;
  }
  throw std::invalid_argument("unknown generator '" + name + "'");
}

GeneratorSpec GeneratorSpec::preset(GeneratorKind kind) {
  GeneratorSpec s;
  s.kind = kind;
  switch (kind) {
    case GeneratorKind::NormalMean:
      s.n = 20;
      s.p = 1;
      s.model = ModelSpec::mean_estimation();
      break;
    case GeneratorKind::ExponentialData:
      s.n = 100;
      s.p = 1;
      s.model = ModelSpec::exponential_mle();
      break;
    case GeneratorKind::PoissonData:
      s.n = 100;
      s.p = 1;
      s.model = ModelSpec::poisson_mle();
      break;
    case GeneratorKind::LinearExp1:
    case GeneratorKind::LinearExp2:
      s.n = 100;
      s.p = 10;
      s.sigma = 10.0;
      s.rho = kind == GeneratorKind::LinearExp1 ? 0.0 : 0.3;
      s.model = ModelSpec::linear_regression();
      break;
    case GeneratorKind::LogisticExp1:
    case GeneratorKind::LogisticExp2:
      s.n = 1000;
      s.p = 10;
      s.signal = 0.01;
      s.rho = kind == GeneratorKind::LogisticExp1 ? 0.0 : 0.2;
      s.model = ModelSpec::logistic_vanilla();
      break;
    case GeneratorKind::CsvFile:
      s.n = 0;
      s.p = 0;
      s.model = ModelSpec::linear_regression();
      break;
  }
  return s;
}

void GeneratorSpec::validate() const {
  model.validate();
  if (kind == GeneratorKind::CsvFile) {
    if (csv_path.empty()) throw std::invalid_argument("csv generator needs a path");
    return;
  }
  if (n < 1) throw std::invalid_argument("n must be >= 1");
  if (p < 1) throw std::invalid_argument("p must be >= 1");
  if ((kind == GeneratorKind::ExponentialData || kind == GeneratorKind::PoissonData) && p != 1) {
    throw std::invalid_argument("univariate generators need p = 1");
  }
  if (!(std::abs(rho) < 1.0)) throw std::invalid_argument("rho must lie in (-1, 1)");
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw std::invalid_argument("sigma must be >= 0");
  if (!std::isfinite(signal)) throw std::invalid_argument("signal must be finite");
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw std::invalid_argument("lambda must be positive");

  const Family f = model.family;
  const bool ok = [&] {
    switch (kind) {
      case GeneratorKind::NormalMean: return f == Family::MeanEstimation;
      case GeneratorKind::ExponentialData: return f == Family::ExponentialMLE;
      case GeneratorKind::PoissonData: return f == Family::PoissonMLE;
      case GeneratorKind::LinearExp1:
      case GeneratorKind::LinearExp2: return f == Family::LinearRegression;
      case GeneratorKind::LogisticExp1:
      case GeneratorKind::LogisticExp2: return f == Family::LogisticVanilla || f == Family::LogisticModified;
      case GeneratorKind::CsvFile: return true;
    }
    return false;
  }();
  if (!ok) {
    throw std::invalid_argument("model '" + to_string(f) + "' does not match generator '" + to_string(kind) + "'");
  }
}

Vector population_theta(const GeneratorSpec& spec) {
  switch (spec.kind) {
    case GeneratorKind::NormalMean: return Vector::Zero(spec.p);
    case GeneratorKind::ExponentialData:
    case GeneratorKind::PoissonData: return Vector::Constant(1, spec.lambda);
    case GeneratorKind::LinearExp1:
    case GeneratorKind::LinearExp2:
      return Vector::Constant(spec.p, 1.0 / std::sqrt(static_cast<double>(spec.p)));
    case GeneratorKind::LogisticExp1:
    case GeneratorKind::LogisticExp2: {
      // Equal-covariance Gaussian classes with means ±μ: the log-odds are
      // exactly linear, log P(+1|x)/P(-1|x) = 2μᵀΣ⁻¹x.
      const Vector mu = Vector::Constant(spec.p, spec.signal / std::sqrt(static_cast<double>(spec.p)));
      return 2.0 * solve_spd(toeplitz(spec.p, spec.rho), mu);
    }
    case GeneratorKind::CsvFile: return Vector();
  }
  return Vector();
}

Generated generate(const GeneratorSpec& spec, RngStream& rng) {
  spec.validate();
  switch (spec.kind) {
    case GeneratorKind::NormalMean: {
      return {Dataset(standard_normal_matrix(spec.n, spec.p, rng)), population_theta(spec)};
    }
    case GeneratorKind::ExponentialData: {
      std::exponential_distribution<double> dist(spec.lambda);
      Matrix x(spec.n, 1);
      for (Index i = 0; i < spec.n; ++i) x(i, 0) = dist(rng);
      return {Dataset(std::move(x)), population_theta(spec)};
    }
    case GeneratorKind::PoissonData: {
      std::poisson_distribution<int> dist(spec.lambda);
      Matrix x(spec.n, 1);
      for (Index i = 0; i < spec.n; ++i) x(i, 0) = static_cast<double>(dist(rng));
      return {Dataset(std::move(x)), population_theta(spec)};
    }
    case GeneratorKind::LinearExp1:
    case GeneratorKind::LinearExp2: {
      const Matrix l = toeplitz_factor(spec.p, spec.rho);
      const Matrix x = standard_normal_matrix(spec.n, spec.p, rng) * l.transpose();
      const Vector w = population_theta(spec);
      std::normal_distribution<double> noise(0.0, spec.sigma);
      Vector y = x * w;
      for (Index i = 0; i < spec.n; ++i) y(i) += noise(rng);
      return {Dataset(x, std::move(y)), w};
    }
    case GeneratorKind::LogisticExp1:
    case GeneratorKind::LogisticExp2: {
      const Matrix l = toeplitz_factor(spec.p, spec.rho);
      Vector y(spec.n);
      for (Index i = 0; i < spec.n; ++i) y(i) = (rng() >> 63) ? 1.0 : -1.0;
      Matrix x = standard_normal_matrix(spec.n, spec.p, rng) * l.transpose();
      const double shift = spec.signal / std::sqrt(static_cast<double>(spec.p));
      for (Index i = 0; i < spec.n; ++i) x.row(i).array() += shift * y(i);
      return {Dataset(std::move(x), std::move(y)), population_theta(spec)};
    }
    case GeneratorKind::CsvFile: {
      Dataset data = read_csv_dataset(spec.csv_path, spec.model.family);
      Vector theta = fit_erm(underlying_model(spec.model), data).theta_hat;
      return {std::move(data), std::move(theta)};
    }
  }
  throw std::invalid_argument("unknown generator kind");
}

std::string to_string(CovarianceSource source) {
  return source == CovarianceSource::Sandwich ? "sandwich" : "inverse_fisher";
}

CovarianceSource parse_covariance_source(const std::string& name) {
  if (name == "sandwich") return CovarianceSource::Sandwich;
  if (name == "inverse_fisher") return CovarianceSource::InverseFisher;
  throw std::invalid_argument("unknown covariance source '" + name + "'");
}

std::string method_name(const Method& method) {
  struct {
    std::string operator()(const SgdMethod&) const { return "sgd_inference"; }
    std::string operator()(const BootstrapMethod&) const { return "bootstrap"; }
    std::string operator()(const NormalApproxMethod& m) const { return "normal_approx_" + to_string(m.source); }
    std::string operator()(const CustomMethod& m) const { return m.name; }
  } visitor;
  return std::visit(visitor, method);
}

std::pair<CiTable, std::int64_t> run_method(const Method& method, const ModelSpec& model, const Generated& g,
                                            double level, RngStream& rng) {
  const Dataset& data = g.data;
  if (const auto* m = std::get_if<SgdMethod>(&method)) {
    SgdConfig cfg = m->cfg;
    cfg.seed = rng();
    cfg.trace = false;
    const SegmentRun run = run_sgd_segments(model, data, cfg);
    Vector theta_hat = run.point_estimate;
    if (m->theta_hat == ThetaHatSource::Newton) theta_hat = fit_erm(model, data).theta_hat;
    const double k_s = scaling_factor(model, theta_hat, data, cfg.batch);
    const InferenceSamples samples = rescale_samples(run, theta_hat, k_s, cfg.t, data.n());
    return {confidence_intervals(samples, level), run.gradient_evaluations};
  }
  if (const auto* m = std::get_if<BootstrapMethod>(&method)) {
    BootstrapConfig cfg = m->cfg;
    cfg.seed = rng();
    cfg.threads = 1;
    const BootstrapResult res = bootstrap_samples(model, data, cfg);
    return {quantile_intervals(res.samples, level), res.operation_count};
  }
  if (const auto* m = std::get_if<NormalApproxMethod>(&method)) {
    const FitResult fit = fit_erm(model, data, m->solver_tol);
    const Matrix cov = m->source == CovarianceSource::Sandwich
                           ? sandwich_covariance(model, fit.theta_hat, data)
                           : invert_spd(fisher_information(model, fit.theta_hat, data));
    return {normal_approx_cis(fit.theta_hat, cov, data.n(), level),
            static_cast<std::int64_t>(fit.iterations) * data.n()};
  }
  const auto& custom = std::get<CustomMethod>(method);
  return custom.fn(g, model, level, rng);
}

std::vector<ExperimentReport> compare_methods(const GeneratorSpec& spec, std::span<const Method> methods,
                                              int num_sims, double level, std::uint64_t master_seed,
                                              int threads) {
  if (num_sims < 1) throw std::invalid_argument("num_sims must be >= 1");
  if (!(level > 0.0 && level < 1.0)) throw std::invalid_argument("level must lie in (0, 1)");
  if (methods.empty()) throw std::invalid_argument("no methods given");
  spec.validate();

  struct Outcome {
    bool ok = false;
    double covered = 0.0;
    double width = 0.0;
    std::int64_t ops = 0;
    double seconds = 0.0;
  };
  const std::size_t m_count = methods.size();
  std::vector<Outcome> outcomes(static_cast<std::size_t>(num_sims) * m_count);

  parallel_for(num_sims, threads, [&](std::int64_t s) {
    RngStream data_rng(master_seed, 2 * static_cast<std::uint64_t>(s));
    const Generated g = generate(spec, data_rng);
    const RngStream method_root(master_seed, 2 * static_cast<std::uint64_t>(s) + 1);
    for (std::size_t m = 0; m < m_count; ++m) {
      Outcome& out = outcomes[static_cast<std::size_t>(s) * m_count + m];
      RngStream rng = method_root.split(m);
      const auto start = std::chrono::steady_clock::now();
      try {
        const auto [cis, ops] = run_method(methods[m], spec.model, g, level, rng);
        if (cis.size() != static_cast<std::size_t>(g.true_theta.size())) {
          throw std::runtime_error("method returned the wrong number of intervals");
        }
        double covered = 0.0;
        double width = 0.0;
        for (std::size_t i = 0; i < cis.size(); ++i) {
          covered += cis[i].contains(g.true_theta(static_cast<Index>(i))) ? 1.0 : 0.0;
          width += cis[i].width();
        }
        out.covered = covered / static_cast<double>(cis.size());
        out.width = width / static_cast<double>(cis.size());
        out.ops = ops;
        out.ok = true;
      } catch (const std::exception&) {
        out.ok = false;
      }
      out.seconds = seconds_since(start);
    }
  });

  std::vector<ExperimentReport> reports;
  for (std::size_t m = 0; m < m_count; ++m) {
    ExperimentReport r;
    r.method = method_name(methods[m]);
    r.num_sims = num_sims;
    double covered = 0.0;
    double width = 0.0;
    int ok = 0;
    for (int s = 0; s < num_sims; ++s) {
      const Outcome& out = outcomes[static_cast<std::size_t>(s) * m_count + m];
      r.runtime_seconds += out.seconds;
      if (!out.ok) {
        ++r.failed;
        continue;
      }
      ++ok;
      covered += out.covered;
      width += out.width;
      r.operation_count += out.ops;
    }
    if (r.failed * 20 > num_sims) {
      throw ExperimentError(r.method + ": " + std::to_string(r.failed) + " of " + std::to_string(num_sims) +
                            " simulations failed");
    }
    r.coverage = covered / ok;
    r.avg_width = width / ok;
    reports.push_back(std::move(r));
  }
  return reports;
}

ExperimentReport coverage_simulation(const GeneratorSpec& spec, const Method& method, int num_sims, double level,
                                     std::uint64_t master_seed, int threads) {
  return compare_methods(spec, std::span<const Method>(&method, 1), num_sims, level, master_seed, threads).front();
}

std::vector<Method> univariate_methods(GeneratorKind kind) {
  SgdConfig cfg;
  cfg.r = 500;
  BootstrapConfig boot;
  boot.replicates = 500;
  NormalApproxMethod normal;
  switch (kind) {
    case GeneratorKind::NormalMean:
      cfg.eta = 0.8;
      cfg.t = 5;
      cfg.d = 10;
      cfg.b = 20;
      cfg.batch.size = 2;
      cfg.theta_init = Vector::Zero(1);
      normal.source = CovarianceSource::Sandwich;
      break;
    case GeneratorKind::ExponentialData:
    case GeneratorKind::PoissonData:
      cfg.eta = 0.1;
      cfg.t = 100;
      cfg.d = 5;
      cfg.b = 100;
      cfg.batch.size = 5;
      cfg.theta_init = Vector::Constant(1, 0.5);
      normal.source = CovarianceSource::InverseFisher;
      break;
    default: throw std::invalid_argument("univariate_methods needs a univariate generator");
  }
  return {SgdMethod{cfg, ThetaHatSource::SegmentMean}, BootstrapMethod{boot}, normal};
}

std::vector<ExperimentReport> univariate_comparison(GeneratorKind kind, int num_sims, double level,
                                                    std::uint64_t master_seed, int threads) {
  const std::vector<Method> methods = univariate_methods(kind);
  return compare_methods(GeneratorSpec::preset(kind), methods, num_sims, level, master_seed, threads);
}

SgdConfig multivariate_sgd_config(double eta, std::int64_t t) {
  SgdConfig cfg;
  cfg.eta = eta;
  cfg.t = t;
  cfg.d = 100;
  cfg.r = 200;
  cfg.b = 5000;
  cfg.batch.size = 4;
  return cfg;
}

CovarianceComparison covariance_comparison(const ModelSpec& model, const Dataset& data, const SgdConfig& sgd,
                                           const std::optional<BootstrapConfig>& bootstrap) {
  const ModelSpec base = underlying_model(model);
  const FitResult fit = fit_erm(base, data);
  const double n = static_cast<double>(data.n());

  CovarianceComparison out;
  out.theta_hat = fit.theta_hat;
  out.sgd = inference_covariance(sgd_inference(model, data, sgd));
  if (bootstrap) {
    const BootstrapResult res = bootstrap_samples(base, data, *bootstrap);
    out.bootstrap = sample_covariance(res.samples);
  }
  out.sandwich = sandwich_covariance(base, fit.theta_hat, data) / n;
  out.inverse_fisher = invert_spd(fisher_information(base, fit.theta_hat, data)) / n;
  return out;
}

Matrix diagonal_table(const CovarianceComparison& cmp) {
  const Index p = cmp.theta_hat.size();
  Matrix table(p, cmp.bootstrap ? 4 : 3);
  Index col = 0;
  table.col(col++) = cmp.sgd.diagonal();
  if (cmp.bootstrap) table.col(col++) = cmp.bootstrap->diagonal();
  table.col(col++) = cmp.sandwich.diagonal();
  table.col(col++) = cmp.inverse_fisher.diagonal();
  return table;
}

std::vector<QqPoint> qq_export(std::span<const double> samples, const NormalReference& reference) {
  if (samples.size() < 10) throw std::invalid_argument("qq_export needs at least 10 samples");
  if (!(reference.variance >= 0.0)) throw std::invalid_argument("reference variance must be >= 0");
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  const double len = static_cast<double>(sorted.size());
  const double sd = std::sqrt(reference.variance);
  std::vector<QqPoint> out;
  out.reserve(sorted.size());
  for (std::size_t k = 0; k < sorted.size(); ++k) {
    const double pos = (static_cast<double>(k) + 0.5) / len;
    out.push_back({reference.mean + sd * normal_quantile(pos), sorted[k]});
  }
  return out;
}

std::vector<TrendCell> covariance_error_trend(const Dataset& data, const TrendConfig& cfg) {
  if (cfg.etas.size() != cfg.ts.size() || cfg.etas.empty()) {
    throw std::invalid_argument("etas and ts must be non-empty and of equal length");
  }
  if (cfg.runs_per_cell < 2) throw std::invalid_argument("runs_per_cell must be >= 2");
  const ModelSpec model = ModelSpec::mean_estimation();
  check_compatible(model, data);

  const Index p = data.p();
  const double n = static_cast<double>(data.n());
  const Vector theta_hat = data.features().colwise().mean().transpose();
  const Matrix centered = data.features().rowwise() - theta_hat.transpose();
  const Matrix target = (centered.transpose() * centered) / (n * static_cast<double>(cfg.batch_size));

  std::vector<TrendCell> cells;
  for (std::size_t k = 0; k < cfg.etas.size(); ++k) {
    SgdConfig sgd;
    sgd.eta = cfg.etas[k];
    sgd.t = cfg.ts[k];
    sgd.d = 0;
    sgd.r = 1;
    sgd.b = cfg.burn_in;
    sgd.batch.size = cfg.batch_size;
    sgd.theta_init = Vector::Zero(p);
    sgd.validate();

    const RngStream cell_root(cfg.master_seed, k);
    std::vector<Vector> deviations(static_cast<std::size_t>(cfg.runs_per_cell));
    parallel_for(cfg.runs_per_cell, cfg.threads, [&](std::int64_t r) {
      SgdConfig chain = sgd;
      chain.seed = cell_root.split(static_cast<std::uint64_t>(r))();
      const SegmentRun run = run_sgd_segments(model, data, chain);
      deviations[static_cast<std::size_t>(r)] = run.segment_averages.front() - theta_hat;
    });

    Matrix second = Matrix::Zero(p, p);
    for (const auto& v : deviations) second.noalias() += v * v.transpose();
    second *= static_cast<double>(sgd.t) / static_cast<double>(cfg.runs_per_cell);
    cells.push_back({sgd.eta, sgd.t, spectral_norm(second - target)});
  }
  return cells;
}

}  // namespace sgdinfer
