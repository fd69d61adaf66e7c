#pragma once

#include <cstdint>
#include <vector>

#include "sgdinfer/linalg.hpp"
#include "sgdinfer/models.hpp"
#include "sgdinfer/stats.hpp"

namespace sgdinfer {

struct BootstrapConfig {
  int replicates = 200;
  double solver_tol = 1e-10;
  std::uint64_t seed = 0;
  int threads = 1;
};

struct BootstrapResult {
  Vector theta_hat;
  /// Refitted θ̂* of every replicate that converged, in replicate order.
  std::vector<Vector> samples;
  std::vector<int> failed_replicates;
  /// Σ Newton iterations × n over all replicates.
  std::int64_t operation_count = 0;
};

/// Nonparametric bootstrap with replacement. Replicate r draws from
/// RngStream(seed, r) and is refitted by Newton warm-started at the
/// full-data θ̂. Replicates whose fit fails are skipped and recorded; more
/// than 10% failures is an error.
BootstrapResult bootstrap_samples(const ModelSpec& model, const Dataset& data, const BootstrapConfig& cfg);

/// θ̂_i ± z·√(cov_ii / n) with z the standard normal (1+level)/2 quantile.
CiTable normal_approx_cis(const Vector& theta_hat, const Matrix& covariance, std::int64_t n, double level);

}  // namespace sgdinfer
