#include "sgdinfer/io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <vector>

namespace sgdinfer {

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    const auto first = cell.find_first_not_of(" \t\r");
    const auto last = cell.find_last_not_of(" \t\r");
    out.push_back(first == std::string::npos ? std::string{} : cell.substr(first, last - first + 1));
  }
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_cell(const std::string& cell, std::size_t row, std::size_t col) {
  double value = 0.0;
  const auto* begin = cell.data();
  const auto* end = cell.data() + cell.size();
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (cell.empty() || ec != std::errc() || ptr != end) {
    throw CsvError("cannot parse '" + cell + "' as a number at row " + std::to_string(row) + ", column " +
                       std::to_string(col),
                   row, col);
  }
  return value;
}

struct RawTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

RawTable read_table(std::istream& is) {
  RawTable table;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty() || line == "\r" || line[0] == '#') continue;
    if (table.header.empty()) {
      table.header = split_line(line);
      continue;
    }
    const auto cells = split_line(line);
    if (cells.size() != table.header.size()) {
      throw CsvError("row " + std::to_string(line_no) + " has " + std::to_string(cells.size()) +
                         " columns, header has " + std::to_string(table.header.size()),
                     line_no, cells.size());
    }
    std::vector<double> values;
    values.reserve(cells.size());
    for (std::size_t c = 0; c < cells.size(); ++c) values.push_back(parse_cell(cells[c], line_no, c + 1));
    table.rows.push_back(std::move(values));
  }
  if (table.header.empty()) throw CsvError("CSV input has no header", 0, 0);
  if (table.rows.empty()) throw CsvError("CSV input has no data rows", 1, 0);
  return table;
}

}  // namespace

std::string format_double(double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

Dataset read_csv_dataset(std::istream& is, Family family, std::ostream* warnings) {
  const RawTable table = read_table(is);
  std::optional<std::size_t> y_col;
  for (std::size_t c = 0; c < table.header.size(); ++c) {
    if (table.header[c] == "y") y_col = c;
  }
  const bool needs_response =
      family == Family::LinearRegression || family == Family::LogisticVanilla || family == Family::LogisticModified;
  if (needs_response && !y_col) throw CsvError("CSV has no response column named 'y'", 1, 0);

  const auto n = static_cast<Index>(table.rows.size());
  const auto p = static_cast<Index>(table.header.size() - (y_col ? 1 : 0));
  if (p < 1) throw CsvError("CSV has no feature columns", 1, 0);
  Matrix x(n, p);
  std::optional<Vector> y;
  if (y_col) y = Vector(n);
  for (Index i = 0; i < n; ++i) {
    Index j = 0;
    for (std::size_t c = 0; c < table.header.size(); ++c) {
      if (y_col && c == *y_col) {
        (*y)(i) = table.rows[static_cast<std::size_t>(i)][c];
      } else {
        x(i, j++) = table.rows[static_cast<std::size_t>(i)][c];
      }
    }
  }

  if (y && (family == Family::LogisticVanilla || family == Family::LogisticModified)) {
    bool remapped = false;
    for (Index i = 0; i < n; ++i) {
      double& label = (*y)(i);
      if (label == 0.0) {
        label = -1.0;
        remapped = true;
      } else if (label != 1.0 && label != -1.0) {
        throw CsvError("logistic label must be +1/-1 or 0/1 at data row " + std::to_string(i + 1),
                       static_cast<std::size_t>(i + 2), *y_col + 1);
      }
    }
    if (remapped && warnings) *warnings << "warning: remapped 0/1 labels to -1/+1\n";
  }
  if (!needs_response) y.reset();
  return Dataset(std::move(x), std::move(y));
}

Dataset read_csv_dataset(const std::string& path, Family family, std::ostream* warnings) {
  std::ifstream in(path);
  if (!in) throw CsvError("cannot open CSV file '" + path + "'", 0, 0);
  return read_csv_dataset(in, family, warnings);
}

Matrix read_csv_matrix(std::istream& is) {
  const RawTable table = read_table(is);
  Matrix m(static_cast<Index>(table.rows.size()), static_cast<Index>(table.header.size()));
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) m(i, j) = table.rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  }
  return m;
}

void write_matrix_csv(std::ostream& os, const Matrix& m) {
  for (Index j = 0; j < m.cols(); ++j) os << (j ? "," : "") << "c" << j;
  os << '\n';
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) os << (j ? "," : "") << format_double(m(i, j));
    os << '\n';
  }
}

}  // namespace sgdinfer
