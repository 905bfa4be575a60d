#pragma once

#include <Eigen/Dense>

#include <iosfwd>
#include <string>
#include <vector>

namespace talearn {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

bool is_row_stochastic(const Matrix& m, double tol);

/// Maximum absolute row sum of `a - b` (the induced infinity norm of the difference).
double max_abs_row_sum_diff(const Matrix& a, const Matrix& b);

/// Rescales every row to sum to one. Rows summing to zero are left untouched.
void normalize_rows(Matrix& m);

Matrix kronecker(const Matrix& a, const Matrix& b);

/// CSV with a header row of column names and one row per source state, the first field
/// of each row being the row name. Values are written with round-trip precision.
void write_matrix_csv(std::ostream& out, const Matrix& m, const std::vector<std::string>& names);

struct NamedMatrix {
  Matrix values;
  std::vector<std::string> names;
};

/// Reads the format written by write_matrix_csv. Throws ParseError.
NamedMatrix read_matrix_csv(std::istream& in);

}  // namespace talearn
