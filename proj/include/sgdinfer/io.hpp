#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>

#include "sgdinfer/linalg.hpp"
#include "sgdinfer/models.hpp"

namespace sgdinfer {

/// `%.17g` formatting used for every floating-point output.
std::string format_double(double value);

class CsvError : public std::runtime_error {
 public:
  CsvError(const std::string& what, std::size_t row, std::size_t column)
      : std::runtime_error(what), row_(row), column_(column) {}
  std::size_t row() const { return row_; }
  std::size_t column() const { return column_; }

 private:
  std::size_t row_;
  std::size_t column_;
};

/// Reads a header-first CSV. A column named `y` becomes the response; the
/// rest are features in file order. For logistic families 0/1 labels are
/// remapped to -1/+1 (a warning goes to `warnings` if non-null).
Dataset read_csv_dataset(std::istream& is, Family family, std::ostream* warnings = nullptr);
Dataset read_csv_dataset(const std::string& path, Family family, std::ostream* warnings = nullptr);

/// Reads a header-first CSV of plain numbers into a matrix.
Matrix read_csv_matrix(std::istream& is);

void write_matrix_csv(std::ostream& os, const Matrix& m);

}  // namespace sgdinfer
