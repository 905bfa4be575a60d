#include "talearn/matrix.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

#include "talearn/errors.hpp"

namespace talearn {

bool is_row_stochastic(const Matrix& m, double tol) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    double sum = 0.0;
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (!(m(i, j) >= 0.0)) return false;
      sum += m(i, j);
    }
    if (std::abs(sum - 1.0) > tol) return false;
  }
  return true;
}

double max_abs_row_sum_diff(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw PreconditionError("matrix shapes differ");
  }
  return (a - b).cwiseAbs().rowwise().sum().maxCoeff();
}

void normalize_rows(Matrix& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    double sum = m.row(i).sum();
    if (sum > 0.0) m.row(i) /= sum;
  }
}

Matrix kronecker(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

void write_matrix_csv(std::ostream& out, const Matrix& m, const std::vector<std::string>& names) {
  if (names.size() != static_cast<std::size_t>(m.rows()) || m.rows() != m.cols()) {
    throw PreconditionError("CSV export expects a square matrix with one name per state");
  }
  out << "state";
  for (const auto& n : names) out << ',' << n;
  out << '\n';
  char buf[32];
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    out << names[i];
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", m(i, j));
      out << ',' << buf;
    }
    out << '\n';
  }
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) {
    if (!field.empty() && field.back() == '\r') field.pop_back();
    fields.push_back(field);
  }
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

}  // namespace

NamedMatrix read_matrix_csv(std::istream& in) {
  std::string line;
  std::size_t lineno = 0;
  NamedMatrix result;
  if (!std::getline(in, line)) throw ParseError("empty matrix file", 0);
  ++lineno;
  auto header = split_csv(line);
  if (header.size() < 2) throw ParseError("matrix header needs at least one state", lineno);
  result.names.assign(header.begin() + 1, header.end());
  const auto n = static_cast<Eigen::Index>(result.names.size());
  result.values = Matrix::Zero(n, n);
  Eigen::Index row = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    if (row >= n) throw ParseError("more rows than states", lineno);
    auto fields = split_csv(line);
    if (static_cast<Eigen::Index>(fields.size()) != n + 1) {
      throw ParseError("expected " + std::to_string(n + 1) + " fields", lineno);
    }
    if (fields[0] != result.names[row]) {
      throw ParseError("row name '" + fields[0] + "' does not match header", lineno);
    }
    for (Eigen::Index j = 0; j < n; ++j) {
      const std::string& f = fields[j + 1];
      char* end = nullptr;
      double v = std::strtod(f.c_str(), &end);
      if (f.empty() || *end != '\0' || !std::isfinite(v)) {
        throw ParseError("bad number '" + f + "'", lineno);
      }
      result.values(row, j) = v;
    }
    ++row;
  }
  if (row != n) throw ParseError("expected " + std::to_string(n) + " rows, got " + std::to_string(row), lineno);
  return result;
}

}  // namespace talearn
