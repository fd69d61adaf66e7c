#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "sgdinfer/linalg.hpp"
#include "sgdinfer/models.hpp"
#include "sgdinfer/stats.hpp"

namespace sgdinfer {

/// Knobs of the segment procedure: b burn-in steps, then R segments of t
/// averaged plus d discarded fixed-step SGD iterates.
struct SgdConfig {
  double eta = 0.1;
  std::int64_t t = 100;
  std::int64_t d = 0;
  std::int64_t b = 0;
  std::int64_t r = 1;
  BatchSpec batch;
  /// Empty means the solver's default starting point for the model.
  Vector theta_init;
  std::uint64_t seed = 0;
  /// Keep every iterate (burn-in included) for later export.
  bool trace = false;

  void validate() const;
};

struct SegmentRun {
  /// θ̄_t^(i), one per segment.
  std::vector<Vector> segment_averages;
  /// Mean of the segment averages.
  Vector point_estimate;
  /// Stochastic-gradient evaluations performed: b + R(t + d).
  std::int64_t gradient_evaluations = 0;
  /// Iterates after each step when tracing was requested.
  std::optional<std::vector<Vector>> trace;
};

/// Rescaled samples θ^(i) = θ̂ + √(K_s t / n)(θ̄^(i) - θ̂).
struct InferenceSamples {
  std::vector<Vector> samples;
  Vector theta_hat;
  double k_s = 1.0;
  std::int64_t t = 1;
  std::int64_t n = 1;

  double scale() const;
};

/// The SGD run diverged (non-finite iterate or left the model's domain).
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(const std::string& what, std::int64_t step) : std::runtime_error(what), step_(step) {}
  std::int64_t step() const { return step_; }

 private:
  std::int64_t step_;
};

SegmentRun run_sgd_segments(const ModelSpec& model, const Dataset& data, const SgdConfig& cfg);

InferenceSamples rescale_samples(const SegmentRun& run, const Vector& theta_hat, double k_s, std::int64_t t,
                                 std::int64_t n);

/// Inverse of the rescaling: recovers the segment averages.
std::vector<Vector> unscale_samples(const InferenceSamples& samples);

CiTable confidence_intervals(const InferenceSamples& samples, double level);

/// Sample covariance of the rescaled samples (estimates Cov(θ̂)).
Matrix inference_covariance(const InferenceSamples& samples);

/// Quantile interval of the linear score θᵀx over the samples.
Interval prediction_interval(const InferenceSamples& samples, const Vector& x, double level);

struct Autocorrelation {
  double value = 0.0;
  bool degenerate = false;
};

/// Lag-1 correlation of consecutive segment averages along the coordinate
/// with the largest variance.
Autocorrelation segment_autocorrelation(const SegmentRun& run);

enum class ThetaHatSource { SegmentMean, Newton };

/// Runs the segments, picks θ̂ (segment mean or Newton fit), evaluates K_s at
/// θ̂ and rescales.
InferenceSamples sgd_inference(const ModelSpec& model, const Dataset& data, const SgdConfig& cfg,
                               ThetaHatSource source = ThetaHatSource::SegmentMean);

/// CSV with columns step,coord_0..coord_{p-1}.
void write_trace_csv(std::ostream& os, const SegmentRun& run);

}  // namespace sgdinfer
