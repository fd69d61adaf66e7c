#include "sgdinfer/baselines.hpp"

#include <cmath>
#include <optional>
#include <stdexcept>

#include "sgdinfer/parallel.hpp"
#include "sgdinfer/solver.hpp"

namespace sgdinfer {

BootstrapResult bootstrap_samples(const ModelSpec& model, const Dataset& data, const BootstrapConfig& cfg) {
  if (cfg.replicates < 1) throw std::invalid_argument("bootstrap needs at least one replicate");
  const FitResult full = fit_erm(model, data, cfg.solver_tol);

  struct Slot {
    std::optional<Vector> theta;
    int iterations = 0;
  };
  std::vector<Slot> slots(static_cast<std::size_t>(cfg.replicates));
  const Index n = data.n();

  parallel_for(cfg.replicates, cfg.threads, [&](std::int64_t r) {
    RngStream rng(cfg.seed, static_cast<std::uint64_t>(r));
    const auto indices = draw_with_replacement(n, n, rng);
    const Dataset resampled = data.subset(indices);
    auto& slot = slots[static_cast<std::size_t>(r)];
    try {
      const FitResult fit = fit_erm(model, resampled, cfg.solver_tol, 100, full.theta_hat);
      slot.theta = fit.theta_hat;
      slot.iterations = fit.iterations;
    } catch (const FitError& e) {
      slot.iterations = e.iterations();
    }
  });

  BootstrapResult out;
  out.theta_hat = full.theta_hat;
  for (std::size_t r = 0; r < slots.size(); ++r) {
    out.operation_count += static_cast<std::int64_t>(slots[r].iterations) * n;
    if (slots[r].theta) {
      out.samples.push_back(std::move(*slots[r].theta));
    } else {
      out.failed_replicates.push_back(static_cast<int>(r));
    }
  }
  if (out.failed_replicates.size() * 10 > slots.size()) {
    throw std::runtime_error("bootstrap: " + std::to_string(out.failed_replicates.size()) + " of " +
                             std::to_string(slots.size()) + " replicate fits failed");
  }
  return out;
}

CiTable normal_approx_cis(const Vector& theta_hat, const Matrix& covariance, std::int64_t n, double level) {
  if (!(level > 0.0 && level < 1.0)) throw std::invalid_argument("confidence level must lie in (0, 1)");
  if (n < 1) throw std::invalid_argument("n must be >= 1");
  if (covariance.rows() != theta_hat.size() || covariance.cols() != theta_hat.size()) {
    throw std::invalid_argument("normal_approx_cis: covariance dimension mismatch");
  }
  const double z = normal_quantile(0.5 * (1.0 + level));
  CiTable table;
  table.level = level;
  for (Index i = 0; i < theta_hat.size(); ++i) {
    const double var = covariance(i, i);
    if (var < 0.0 || !std::isfinite(var)) {
      throw std::invalid_argument("normal_approx_cis: negative variance at coordinate " + std::to_string(i));
    }
    const double half = z * std::sqrt(var / static_cast<double>(n));
    table.intervals.push_back({theta_hat(i) - half, theta_hat(i) + half});
  }
  return table;
}

}  // namespace sgdinfer
