#include "catch_amalgamated.hpp"

#include <cmath>
#include <vector>

#include "sgdinfer/rng.hpp"
#include "sgdinfer/stats.hpp"
#include "test_helpers.hpp"

using namespace sgdinfer;

TEST_CASE("empirical quantile interpolates between order statistics") {
  const std::vector<double> x = {4.0, 1.0, 3.0, 2.0, 5.0};
  CHECK(empirical_quantile(x, 0.0) == 1.0);
  CHECK(empirical_quantile(x, 1.0) == 5.0);
  CHECK(empirical_quantile(x, 0.5) == 3.0);
  CHECK(empirical_quantile(x, 0.1) == Catch::Approx(1.4));
  CHECK(empirical_quantile(x, 0.975) == Catch::Approx(4.9));
  const std::vector<double> one = {2.5};
  CHECK(empirical_quantile(one, 0.3) == 2.5);
  CHECK_THROWS(empirical_quantile(std::vector<double>{}, 0.5));
  CHECK_THROWS(empirical_quantile(x, 1.5));
}

TEST_CASE("sample covariance matches a double-loop oracle") {
  RngStream rng(3, 0);
  std::vector<Vector> xs;
  for (int i = 0; i < 30; ++i) xs.push_back(test::normal_vector(4, rng));
  Vector mean = Vector::Zero(4);
  for (const auto& x : xs) mean += x / 30.0;
  Matrix oracle = Matrix::Zero(4, 4);
  for (int a = 0; a < 4; ++a) {
    for (int b = 0; b < 4; ++b) {
      double s = 0.0;
      for (const auto& x : xs) s += (x(a) - mean(a)) * (x(b) - mean(b));
      oracle(a, b) = s / 29.0;
    }
  }
  const Matrix cov = sample_covariance(xs);
  CHECK((cov - oracle).cwiseAbs().maxCoeff() < 1e-13);
  CHECK(cov == cov.transpose());
}

TEST_CASE("normal quantile agrees with reference values") {
  CHECK(normal_quantile(0.975) == Catch::Approx(1.959963984540054).epsilon(1e-14));
  CHECK(normal_quantile(0.5) == Catch::Approx(0.0).margin(1e-15));
  CHECK(normal_quantile(0.025) == Catch::Approx(-1.959963984540054).epsilon(1e-14));
  CHECK(normal_quantile(0.8413447460685429) == Catch::Approx(1.0).epsilon(1e-12));
  CHECK(normal_quantile(1e-10) == Catch::Approx(-6.361340902404056).epsilon(1e-12));
  CHECK(std::isinf(normal_quantile(0.0)));
  CHECK(normal_quantile(1.0) > 0.0);
  CHECK_THROWS(normal_quantile(1.5));
}

TEST_CASE("quantile intervals are per coordinate") {
  std::vector<Vector> xs;
  for (int i = 0; i <= 100; ++i) {
    Vector v(2);
    v << i, -2.0 * i;
    xs.push_back(v);
  }
  const CiTable t = quantile_intervals(xs, 0.9);
  REQUIRE(t.size() == 2);
  CHECK(t[0].lower == Catch::Approx(5.0));
  CHECK(t[0].upper == Catch::Approx(95.0));
  CHECK(t[1].lower == Catch::Approx(-190.0));
  CHECK(t[1].width() == Catch::Approx(180.0));
}
