#include "sgdinfer/sgd_inference.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>

#include "sgdinfer/io.hpp"
#include "sgdinfer/solver.hpp"

namespace sgdinfer {

void SgdConfig::validate() const {
  if (!(eta > 0.0) || !std::isfinite(eta)) throw std::invalid_argument("eta must be positive");
  if (t < 1) throw std::invalid_argument("t must be >= 1");
  if (d < 0) throw std::invalid_argument("d must be >= 0");
  if (b < 0) throw std::invalid_argument("b must be >= 0");
  if (r < 1) throw std::invalid_argument("r must be >= 1");
  if (batch.size < 1 || batch.s_psi < 1 || batch.s_upsilon < 1) {
    throw std::invalid_argument("batch sizes must be >= 1");
  }
}

double InferenceSamples::scale() const {
  return std::sqrt(k_s * static_cast<double>(t) / static_cast<double>(n));
}

SegmentRun run_sgd_segments(const ModelSpec& model, const Dataset& data, const SgdConfig& cfg) {
  cfg.validate();
  check_compatible(model, data);
  const bool modified = model.family == Family::LogisticModified;
  if (modified && *model.psi_mode == Sampling::WithoutReplacement && cfg.batch.s_psi > data.n()) {
    throw std::invalid_argument("s_psi cannot exceed n when sampling without replacement");
  }

  Vector theta = cfg.theta_init.size() > 0 ? cfg.theta_init : default_start(model, data);
  check_theta(model, theta, data);
  const Index p = theta.size();

  RngStream rng(cfg.seed, 0);
  Vector grad(p);
  std::int64_t step = 0;

  SegmentRun run;
  if (cfg.trace) run.trace.emplace();

  auto advance = [&] {
    ++step;
    try {
      if (modified) {
        grad = modified_logistic_stochastic_gradient(theta, data, cfg.batch, model.c, *model.psi_mode, rng);
      } else {
        stochastic_gradient_into(model, theta, data, cfg.batch, rng, grad);
      }
    } catch (const std::domain_error& e) {
      throw DivergenceError(std::string("SGD left the model domain at step ") + std::to_string(step) + ": " +
                                e.what(),
                            step);
    }
    theta.noalias() -= cfg.eta * grad;
    if (!theta.allFinite()) {
      throw DivergenceError("SGD produced a non-finite iterate at step " + std::to_string(step) +
                                " (step size too large?)",
                            step);
    }
    if (run.trace) run.trace->push_back(theta);
  };

  for (std::int64_t k = 0; k < cfg.b; ++k) advance();

  run.segment_averages.reserve(static_cast<std::size_t>(cfg.r));
  Vector sum(p);
  Vector total = Vector::Zero(p);
  for (std::int64_t seg = 0; seg < cfg.r; ++seg) {
    sum.setZero();
    for (std::int64_t j = 0; j < cfg.t; ++j) {
      advance();
      sum += theta;
    }
    for (std::int64_t j = 0; j < cfg.d; ++j) advance();
    run.segment_averages.push_back(sum / static_cast<double>(cfg.t));
    total += run.segment_averages.back();
  }
  run.point_estimate = total / static_cast<double>(cfg.r);
  run.gradient_evaluations = step;
  return run;
}

InferenceSamples rescale_samples(const SegmentRun& run, const Vector& theta_hat, double k_s, std::int64_t t,
                                 std::int64_t n) {
  if (!(k_s > 0.0)) throw std::invalid_argument("scaling factor K_s must be positive");
  if (t < 1 || n < 1) throw std::invalid_argument("t and n must be >= 1");
  InferenceSamples out;
  out.theta_hat = theta_hat;
  out.k_s = k_s;
  out.t = t;
  out.n = n;
  const double scale = out.scale();
  out.samples.reserve(run.segment_averages.size());
  for (const auto& avg : run.segment_averages) {
    if (avg.size() != theta_hat.size()) throw std::invalid_argument("rescale_samples: dimension mismatch");
    out.samples.push_back(theta_hat + scale * (avg - theta_hat));
  }
  return out;
}

std::vector<Vector> unscale_samples(const InferenceSamples& samples) {
  const double inv = 1.0 / samples.scale();
  std::vector<Vector> out;
  out.reserve(samples.samples.size());
  for (const auto& s : samples.samples) out.push_back(samples.theta_hat + inv * (s - samples.theta_hat));
  return out;
}

CiTable confidence_intervals(const InferenceSamples& samples, double level) {
  if (samples.samples.size() < 2) throw std::invalid_argument("confidence intervals need R >= 2 samples");
  return quantile_intervals(samples.samples, level);
}

Matrix inference_covariance(const InferenceSamples& samples) {
  if (samples.samples.size() < 2) throw std::invalid_argument("inference covariance needs R >= 2 samples");
  return sample_covariance(samples.samples);
}

Interval prediction_interval(const InferenceSamples& samples, const Vector& x, double level) {
  if (samples.samples.size() < 2) throw std::invalid_argument("prediction interval needs R >= 2 samples");
  if (!(level > 0.0 && level < 1.0)) throw std::invalid_argument("confidence level must lie in (0, 1)");
  std::vector<double> scores;
  scores.reserve(samples.samples.size());
  for (const auto& s : samples.samples) {
    if (s.size() != x.size()) throw std::invalid_argument("prediction_interval: dimension mismatch");
    scores.push_back(s.dot(x));
  }
  const double alpha = 1.0 - level;
  std::sort(scores.begin(), scores.end());
  return {sorted_quantile(scores, alpha / 2.0), sorted_quantile(scores, 1.0 - alpha / 2.0)};
}

Autocorrelation segment_autocorrelation(const SegmentRun& run) {
  const auto& avgs = run.segment_averages;
  if (avgs.size() < 3) throw std::invalid_argument("autocorrelation needs at least 3 segments");
  const Matrix cov = sample_covariance(avgs);
  Index coord = 0;
  cov.diagonal().maxCoeff(&coord);
  if (!(cov(coord, coord) > 0.0)) return {0.0, true};

  const auto m = avgs.size();
  double cross = 0.0, left = 0.0, right = 0.0, left_mean = 0.0, right_mean = 0.0;
  for (std::size_t i = 0; i + 1 < m; ++i) {
    left_mean += avgs[i](coord);
    right_mean += avgs[i + 1](coord);
  }
  left_mean /= static_cast<double>(m - 1);
  right_mean /= static_cast<double>(m - 1);
  for (std::size_t i = 0; i + 1 < m; ++i) {
    const double a = avgs[i](coord) - left_mean;
    const double b = avgs[i + 1](coord) - right_mean;
    cross += a * b;
    left += a * a;
    right += b * b;
  }
  if (!(left > 0.0) || !(right > 0.0)) return {0.0, true};
  return {cross / std::sqrt(left * right), false};
}

InferenceSamples sgd_inference(const ModelSpec& model, const Dataset& data, const SgdConfig& cfg,
                               ThetaHatSource source) {
  const SegmentRun run = run_sgd_segments(model, data, cfg);
  Vector theta_hat = run.point_estimate;
  if (source == ThetaHatSource::Newton) theta_hat = fit_erm(model, data).theta_hat;
  const double k_s = scaling_factor(model, theta_hat, data, cfg.batch);
  return rescale_samples(run, theta_hat, k_s, cfg.t, data.n());
}

void write_trace_csv(std::ostream& os, const SegmentRun& run) {
  if (!run.trace) throw std::invalid_argument("run was not traced");
  os << "step";
  const Index p = run.trace->empty() ? 0 : run.trace->front().size();
  for (Index j = 0; j < p; ++j) os << ",coord_" << j;
  os << '\n';
  for (std::size_t k = 0; k < run.trace->size(); ++k) {
    os << (k + 1);
    for (Index j = 0; j < p; ++j) os << ',' << format_double((*run.trace)[k](j));
    os << '\n';
  }
}

}  // namespace sgdinfer
