#include "catch_amalgamated.hpp"

#include <limits>
#include <random>

#include "sgdinfer/experiments.hpp"
#include "sgdinfer/solver.hpp"
#include "test_helpers.hpp"

using namespace sgdinfer;

TEST_CASE("generator presets") {
  RngStream rng(1, 0);
  const Generated normal = generate(GeneratorSpec::preset(GeneratorKind::NormalMean), rng);
  CHECK(normal.data.n() == 20);
  CHECK(normal.data.p() == 1);
  CHECK(normal.true_theta == Vector::Zero(1));

  const Generated linear = generate(GeneratorSpec::preset(GeneratorKind::LinearExp1), rng);
  CHECK(linear.data.n() == 100);
  CHECK(linear.data.p() == 10);
  CHECK((linear.true_theta - Vector::Constant(10, 1.0 / std::sqrt(10.0))).norm() < 1e-15);

  const Generated logistic = generate(GeneratorSpec::preset(GeneratorKind::LogisticExp2), rng);
  CHECK(logistic.data.n() == 1000);
  for (Index i = 0; i < logistic.data.n(); ++i) REQUIRE(std::abs(logistic.data.y(i)) == 1.0);

  const Generated pois = generate(GeneratorSpec::preset(GeneratorKind::PoissonData), rng);
  CHECK(pois.true_theta(0) == 1.0);
  CHECK(pois.data.features().minCoeff() >= 0.0);
}

TEST_CASE("a fixed seed gives identical datasets") {
  for (auto kind : {GeneratorKind::LinearExp2, GeneratorKind::LogisticExp1, GeneratorKind::ExponentialData}) {
    RngStream a(77, 4);
    RngStream b(77, 4);
    const GeneratorSpec spec = GeneratorSpec::preset(kind);
    CHECK(generate(spec, a).data.features() == generate(spec, b).data.features());
  }
}

TEST_CASE("correlated designs have the Toeplitz covariance") {
  GeneratorSpec spec = GeneratorSpec::preset(GeneratorKind::LinearExp2);
  spec.n = 200000;
  spec.p = 3;
  RngStream rng(5, 0);
  const Generated g = generate(spec, rng);
  const Matrix& x = g.data.features();
  const Matrix cov = x.transpose() * x / static_cast<double>(spec.n);
  CHECK(cov(0, 1) == Catch::Approx(0.3).margin(0.01));
  CHECK(cov(0, 2) == Catch::Approx(0.09).margin(0.01));
  CHECK(cov(1, 1) == Catch::Approx(1.0).margin(0.02));
}

TEST_CASE("logistic population minimizer agrees with a large-sample fit") {
  for (auto kind : {GeneratorKind::LogisticExp1, GeneratorKind::LogisticExp2}) {
    GeneratorSpec spec = GeneratorSpec::preset(kind);
    spec.n = 1000000;
    RngStream rng(2024, 0);
    const Generated g = generate(spec, rng);
    const Vector fitted = fit_erm(ModelSpec::logistic_vanilla(), g.data).theta_hat;
    CHECK((fitted - g.true_theta).cwiseAbs().maxCoeff() < 0.01);
  }
}

TEST_CASE("a method returning unbounded intervals covers everything") {
  const double inf = std::numeric_limits<double>::infinity();
  CustomMethod everything{"everything", [inf](const Generated& g, const ModelSpec&, double level, RngStream&) {
                            CiTable t;
                            t.level = level;
                            t.intervals.assign(static_cast<std::size_t>(g.true_theta.size()), Interval{-inf, inf});
                            return std::make_pair(t, std::int64_t{0});
                          }};
  const ExperimentReport r =
      coverage_simulation(GeneratorSpec::preset(GeneratorKind::LinearExp1), everything, 20, 0.95, 1);
  CHECK(r.coverage == 1.0);
  CHECK(r.method == "everything");
}

TEST_CASE("known-variance normal intervals calibrate the harness") {
  CustomMethod known{"known_sigma", [](const Generated& g, const ModelSpec&, double level, RngStream&) {
                       const double half = normal_quantile(0.5 * (1 + level)) / std::sqrt(g.data.n());
                       const double m = g.data.features().mean();
                       CiTable t;
                       t.intervals = {Interval{m - half, m + half}};
                       return std::make_pair(t, std::int64_t{0});
                     }};
  const ExperimentReport r =
      coverage_simulation(GeneratorSpec::preset(GeneratorKind::NormalMean), known, 2000, 0.95, 8);
  CHECK(std::abs(r.coverage - 0.95) <= 0.02);
}

TEST_CASE("failing simulations are recorded, and too many abort") {
  auto failing_every = [](int k) {
    return CustomMethod{"flaky", [k](const Generated&, const ModelSpec&, double, RngStream& rng) {
                          if (rng() % static_cast<std::uint64_t>(k) == 0) throw std::runtime_error("boom");
                          CiTable t;
                          t.intervals = {Interval{-1, 1}};
                          return std::make_pair(t, std::int64_t{1});
                        }};
  };
  const auto spec = GeneratorSpec::preset(GeneratorKind::NormalMean);
  CHECK_THROWS_AS(coverage_simulation(spec, failing_every(2), 100, 0.95, 3), ExperimentError);
  const ExperimentReport r = coverage_simulation(spec, failing_every(1000000), 100, 0.95, 3);
  CHECK(r.failed == 0);
  CHECK(r.operation_count == 100);
}

TEST_CASE("reports do not depend on the thread count") {
  GeneratorSpec spec = GeneratorSpec::preset(GeneratorKind::LinearExp1);
  SgdConfig sgd = multivariate_sgd_config(0.1, 50);
  sgd.r = 20;
  sgd.b = 100;
  BootstrapConfig boot;
  boot.replicates = 30;
  const std::vector<Method> methods = {SgdMethod{sgd}, BootstrapMethod{boot},
                                       NormalApproxMethod{CovarianceSource::Sandwich}};
  const auto one = compare_methods(spec, methods, 12, 0.95, 99, 1);
  const auto four = compare_methods(spec, methods, 12, 0.95, 99, 4);
  REQUIRE(one.size() == 3);
  for (std::size_t m = 0; m < one.size(); ++m) {
    CHECK(one[m].coverage == four[m].coverage);
    CHECK(one[m].avg_width == four[m].avg_width);
    CHECK(one[m].operation_count == four[m].operation_count);
  }
  CHECK(one[0].operation_count == 12 * (sgd.b + sgd.r * (sgd.t + sgd.d)));
}

TEST_CASE("covariance comparison on degenerate and mean-estimation data") {
  SgdConfig sgd;
  sgd.eta = 0.2;
  sgd.t = 200;
  sgd.d = 20;
  sgd.b = 100;
  sgd.r = 400;
  sgd.seed = 5;
  BootstrapConfig boot;
  boot.replicates = 400;
  boot.seed = 6;

  const Dataset same(Matrix::Constant(30, 2, 0.7));
  const CovarianceComparison zero = covariance_comparison(ModelSpec::mean_estimation(), same, sgd, boot);
  CHECK(zero.sgd.cwiseAbs().maxCoeff() < 1e-20);
  CHECK(zero.bootstrap->cwiseAbs().maxCoeff() < 1e-20);
  CHECK(zero.sandwich.cwiseAbs().maxCoeff() < 1e-20);

  const auto [data, theta] = test::make_problem(Family::MeanEstimation, 300, 2, 9);
  const CovarianceComparison cmp = covariance_comparison(ModelSpec::mean_estimation(), data, sgd, boot);
  const Vector mean = data.features().colwise().mean().transpose();
  const Matrix centered = data.features().rowwise() - mean.transpose();
  const Matrix sigma_n = centered.transpose() * centered / (300.0 * 300.0);
  CHECK((cmp.sandwich - sigma_n).norm() < 1e-15);
  const Matrix table = diagonal_table(cmp);
  REQUIRE(table.cols() == 4);
  for (Index i = 0; i < 2; ++i) {
    CHECK(std::abs(table(i, 0) / sigma_n(i, i) - 1.0) < 0.3);
    CHECK(std::abs(table(i, 1) / sigma_n(i, i) - 1.0) < 0.3);
  }
}

TEST_CASE("Q-Q export") {
  std::vector<double> exact;
  for (int k = 0; k < 20; ++k) exact.push_back(2.0 + 3.0 * normal_quantile((k + 0.5) / 20.0));
  for (const auto& q : qq_export(exact, {2.0, 9.0})) CHECK(q.sample == Catch::Approx(q.theoretical).epsilon(1e-12));

  const std::vector<double> flat(12, 4.0);
  const auto pairs = qq_export(flat, {0.0, 1.0});
  for (const auto& q : pairs) CHECK(q.sample == 4.0);
  CHECK(pairs.front().theoretical < pairs.back().theoretical);

  RngStream rng(10, 0);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> draws(10000);
  for (auto& d : draws) d = normal(rng);
  const auto qq = qq_export(draws, {0.0, 1.0});
  double worst = 0.0;
  for (std::size_t k = 500; k < 9500; ++k) worst = std::max(worst, std::abs(qq[k].sample - qq[k].theoretical));
  CHECK(worst < 0.1);

  CHECK_THROWS(qq_export(std::vector<double>(9, 0.0), {0.0, 1.0}));
}

TEST_CASE("trend on zero-variance data is exactly zero") {
  const Dataset data(Matrix::Constant(10, 2, -1.0));
  TrendConfig cfg;
  cfg.etas = {0.4, 0.2};
  cfg.ts = {25, 50};
  cfg.runs_per_cell = 20;
  cfg.burn_in = 200;
  const auto cells = covariance_error_trend(data, cfg);
  REQUIRE(cells.size() == 2);
  for (const auto& c : cells) CHECK(c.error < 1e-20);
}
