#include "catch_amalgamated.hpp"

#include <sstream>

#include "sgdinfer/sgd_inference.hpp"
#include "sgdinfer/solver.hpp"
#include "test_helpers.hpp"

using namespace sgdinfer;

namespace {

SgdConfig small_config() {
  SgdConfig cfg;
  cfg.eta = 0.1;
  cfg.t = 20;
  cfg.d = 5;
  cfg.b = 30;
  cfg.r = 15;
  cfg.batch.size = 2;
  cfg.seed = 123;
  return cfg;
}

}  // namespace

TEST_CASE("gradient evaluation count follows b + R(t + d)") {
  const auto [data, theta] = test::make_problem(Family::LinearRegression, 30, 3, 1);
  const SgdConfig cfg = small_config();
  const SegmentRun run = run_sgd_segments(ModelSpec::linear_regression(), data, cfg);
  CHECK(run.gradient_evaluations == cfg.b + cfg.r * (cfg.t + cfg.d));
  CHECK(run.segment_averages.size() == static_cast<std::size_t>(cfg.r));
}

TEST_CASE("segment averages and the point estimate are consistent with the trace") {
  const auto [data, theta] = test::make_problem(Family::MeanEstimation, 10, 2, 2);
  SgdConfig cfg = small_config();
  cfg.trace = true;
  const SegmentRun run = run_sgd_segments(ModelSpec::mean_estimation(), data, cfg);
  REQUIRE(run.trace);
  REQUIRE(static_cast<std::int64_t>(run.trace->size()) == run.gradient_evaluations);
  const std::size_t first = static_cast<std::size_t>(cfg.b);
  Vector avg = Vector::Zero(2);
  for (std::int64_t k = 0; k < cfg.t; ++k) avg += (*run.trace)[first + static_cast<std::size_t>(k)];
  avg /= static_cast<double>(cfg.t);
  CHECK((avg - run.segment_averages.front()).norm() < 1e-12);
  Vector mean = Vector::Zero(2);
  for (const auto& s : run.segment_averages) mean += s / static_cast<double>(cfg.r);
  CHECK((mean - run.point_estimate).norm() < 1e-12);

  std::ostringstream csv;
  write_trace_csv(csv, run);
  CHECK(csv.str().rfind("step,coord_0,coord_1\n1,", 0) == 0);
}

TEST_CASE("rescaling is invertible") {
  const auto [data, theta] = test::make_problem(Family::LinearRegression, 40, 3, 3);
  const SgdConfig cfg = small_config();
  const SegmentRun run = run_sgd_segments(ModelSpec::linear_regression(), data, cfg);
  const InferenceSamples s = rescale_samples(run, run.point_estimate, 2.0, cfg.t, data.n());
  CHECK(s.scale() == Catch::Approx(std::sqrt(2.0 * 20 / 40)));
  const auto back = unscale_samples(s);
  for (std::size_t i = 0; i < back.size(); ++i) {
    CHECK((back[i] - run.segment_averages[i]).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("identical configurations give identical samples") {
  const auto [data, theta] = test::make_problem(Family::LogisticModified, 50, 2, 4);
  const ModelSpec model = ModelSpec::logistic_modified(1.0, Sampling::WithoutReplacement);
  SgdConfig cfg = small_config();
  cfg.batch.s_psi = 3;
  cfg.batch.s_upsilon = 2;
  const InferenceSamples a = sgd_inference(model, data, cfg);
  const InferenceSamples b = sgd_inference(model, data, cfg);
  for (std::size_t i = 0; i < a.samples.size(); ++i) CHECK(a.samples[i] == b.samples[i]);
  cfg.seed = 124;
  const InferenceSamples c = sgd_inference(model, data, cfg);
  CHECK(c.samples.front() != a.samples.front());
}

TEST_CASE("Newton centering uses the exact minimizer") {
  const auto [data, theta] = test::make_problem(Family::LinearRegression, 40, 2, 5);
  const ModelSpec model = ModelSpec::linear_regression();
  const InferenceSamples s = sgd_inference(model, data, small_config(), ThetaHatSource::Newton);
  CHECK((s.theta_hat - fit_erm(model, data).theta_hat).norm() < 1e-12);
}

TEST_CASE("divergent runs report the step") {
  const auto [data, theta] = test::make_problem(Family::LinearRegression, 30, 3, 6);
  SgdConfig cfg = small_config();
  cfg.eta = 50.0;
  CHECK_THROWS_AS(run_sgd_segments(ModelSpec::linear_regression(), data, cfg), DivergenceError);

  const auto [edata, etheta] = test::make_problem(Family::ExponentialMLE, 30, 1, 6);
  cfg.eta = 20.0;
  cfg.theta_init = Vector::Constant(1, 0.1);
  try {
    (void)run_sgd_segments(ModelSpec::exponential_mle(), edata, cfg);
    FAIL("expected DivergenceError");
  } catch (const DivergenceError& e) {
    CHECK(e.step() >= 1);
  }
}

TEST_CASE("invalid configurations are rejected") {
  const auto [data, theta] = test::make_problem(Family::LinearRegression, 10, 2, 7);
  SgdConfig cfg = small_config();
  cfg.t = 0;
  CHECK_THROWS_AS(run_sgd_segments(ModelSpec::linear_regression(), data, cfg), std::invalid_argument);
  cfg = small_config();
  cfg.eta = -1;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("lag-one autocorrelation diagnostics") {
  SegmentRun constant;
  for (int i = 0; i < 6; ++i) constant.segment_averages.push_back(Vector::Constant(2, 3.0));
  const Autocorrelation c = segment_autocorrelation(constant);
  CHECK(c.degenerate);
  CHECK(c.value == 0.0);

  SegmentRun alternating;
  for (int i = 0; i < 8; ++i) {
    Vector v(2);
    v << (i % 2 ? -1.0 : 1.0), 0.01 * (i % 2 ? 1.0 : -1.0);
    alternating.segment_averages.push_back(v);
  }
  const Autocorrelation a = segment_autocorrelation(alternating);
  CHECK_FALSE(a.degenerate);
  CHECK(a.value == Catch::Approx(-1.0).epsilon(1e-12));
}

TEST_CASE("prediction interval brackets the linear score") {
  const auto [data, theta] = test::make_problem(Family::LinearRegression, 60, 2, 8);
  SgdConfig cfg = small_config();
  cfg.r = 50;
  const InferenceSamples s = sgd_inference(ModelSpec::linear_regression(), data, cfg);
  const Vector x = Vector::Ones(2);
  const Interval iv = prediction_interval(s, x, 0.9);
  CHECK(iv.lower < iv.upper);
  CHECK(iv.contains(s.theta_hat.dot(x)));
}
