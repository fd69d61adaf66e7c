#include "catch_amalgamated.hpp"

#include <sstream>

#include "sgdinfer/io.hpp"

using namespace sgdinfer;

TEST_CASE("format_double round-trips") {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 123456789.123456789}) {
    CHECK(std::stod(format_double(v)) == v);
  }
}

TEST_CASE("CSV datasets take the response from column y") {
  std::istringstream in("a,y,b\n1,2,3\n# comment\n4,5,6\n");
  const Dataset d = read_csv_dataset(in, Family::LinearRegression);
  REQUIRE(d.n() == 2);
  REQUIRE(d.p() == 2);
  CHECK(d.row(1)(1) == 6.0);
  CHECK(d.y(0) == 2.0);
}

TEST_CASE("zero-one logistic labels are remapped with a warning") {
  std::istringstream in("x,y\n0.5,0\n-1,1\n");
  std::ostringstream warn;
  const Dataset d = read_csv_dataset(in, Family::LogisticVanilla, &warn);
  CHECK(d.y(0) == -1.0);
  CHECK(d.y(1) == 1.0);
  CHECK_FALSE(warn.str().empty());
}

TEST_CASE("CSV errors carry row and column") {
  std::istringstream bad("x,y\n1,2\n3,oops\n");
  try {
    (void)read_csv_dataset(bad, Family::LinearRegression);
    FAIL("expected CsvError");
  } catch (const CsvError& e) {
    CHECK(e.row() == 3);
    CHECK(e.column() == 2);
  }
  std::istringstream ragged("x,y\n1,2,3\n");
  CHECK_THROWS_AS(read_csv_dataset(ragged, Family::LinearRegression), CsvError);
  std::istringstream missing("x\n1\n");
  CHECK_THROWS(read_csv_dataset(missing, Family::LinearRegression));
}

TEST_CASE("matrix CSV round trip") {
  Matrix m(2, 3);
  m << 1, 2, 3, 4.25, -5, 1e-9;
  std::ostringstream out;
  write_matrix_csv(out, m);
  std::istringstream in(out.str());
  CHECK(read_csv_matrix(in) == m);
}
