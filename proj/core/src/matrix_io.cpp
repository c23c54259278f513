#include "covalign/matrix_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <vector>

#include "covalign/error.hpp"

namespace covalign {

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) throw Error(ErrorKind::InvalidArgument, "cannot format double");
  return std::string(buf, ptr);
}

void write_matrix_csv(std::ostream& out, const SymMatrix& m) {
  const std::size_t d = m.dim();
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      if (j) out << ',';
      out << format_double(m(i, j));
    }
    out << '\n';
  }
}

void write_matrix_csv(const std::filesystem::path& path, const SymMatrix& m) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::FileFormat, "cannot open " + path.string() + " for writing");
  write_matrix_csv(out, m);
  if (!out) throw Error(ErrorKind::FileFormat, "write failed for " + path.string());
}

namespace {

double parse_field(std::string_view field, std::size_t row, std::size_t col) {
  while (!field.empty() && (field.front() == ' ' || field.front() == '\t')) field.remove_prefix(1);
  while (!field.empty() && (field.back() == ' ' || field.back() == '\t' || field.back() == '\r')) {
    field.remove_suffix(1);
  }
  if (!field.empty() && field.front() == '+') field.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (field.empty() || ec != std::errc() || ptr != field.data() + field.size() || !std::isfinite(value)) {
    throw Error(ErrorKind::FileFormat, "row " + std::to_string(row + 1) + ", column " +
                                           std::to_string(col + 1) + ": not a finite number '" +
                                           std::string(field) + "'");
  }
  return value;
}

}  // namespace

SymMatrix read_matrix_csv(std::istream& in) {
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    std::vector<double> row;
    std::string_view rest(line);
    while (true) {
      const auto comma = rest.find(',');
      row.push_back(parse_field(rest.substr(0, comma), rows.size(), row.size()));
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    rows.push_back(std::move(row));
  }
  const std::size_t d = rows.size();
  if (d == 0) throw Error(ErrorKind::FileFormat, "matrix file is empty");
  Matrix m(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
  for (std::size_t i = 0; i < d; ++i) {
    if (rows[i].size() != d) {
      throw Error(ErrorKind::FileFormat, "row " + std::to_string(i + 1) + " has " +
                                             std::to_string(rows[i].size()) + " fields, expected " +
                                             std::to_string(d));
    }
    for (std::size_t j = 0; j < d; ++j) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
  }
  try {
    return SymMatrix(std::move(m));
  } catch (const Error& e) {
    throw Error(ErrorKind::FileFormat, e.what());
  }
}

SymMatrix read_matrix_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::FileFormat, "cannot open " + path.string());
  return read_matrix_csv(in);
}

}  // namespace covalign
