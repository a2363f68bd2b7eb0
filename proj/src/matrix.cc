#include "markovrng/matrix.h"

#include <algorithm>
#include <stdexcept>

#include "markovrng/errors.h"

namespace markovrng {

const char* error_kind_name(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kMalformedDocument: return "MalformedDocument";
    case ErrorKind::kNotStochastic: return "NotStochastic";
    case ErrorKind::kNotIrreducible: return "NotIrreducible";
    case ErrorKind::kConvergenceFailure: return "ConvergenceFailure";
    case ErrorKind::kAssumptionViolated: return "AssumptionViolated";
    case ErrorKind::kSupportViolation: return "SupportViolation";
    case ErrorKind::kStateSpaceTooLarge: return "StateSpaceTooLarge";
    case ErrorKind::kDegenerateVariance: return "DegenerateVariance";
    case ErrorKind::kNoFeasiblePoint: return "NoFeasiblePoint";
    case ErrorKind::kOutOfWindow: return "OutOfWindow";
    case ErrorKind::kInfeasible: return "Infeasible";
    case ErrorKind::kLengthMismatch: return "LengthMismatch";
    case ErrorKind::kBudgetExceeded: return "BudgetExceeded";
  }
  return "Error";
}

Matrix Matrix::from_rows(const std::vector<std::vector<double>>& rows) {
  const int r = static_cast<int>(rows.size());
  const int c = r == 0 ? 0 : static_cast<int>(rows[0].size());
  Matrix m(r, c);
  for (int i = 0; i < r; ++i) {
    if (static_cast<int>(rows[i].size()) != c) {
      throw std::invalid_argument("ragged matrix rows");
    }
    std::copy(rows[i].begin(), rows[i].end(), m.row(i));
  }
  return m;
}

Matrix Matrix::identity(int n) {
  Matrix m(n, n);
  for (int i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::transposed() const {
  Matrix t(cols_, rows_);
  for (int i = 0; i < rows_; ++i)
    for (int j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
  return t;
}

std::vector<double> Matrix::apply(const std::vector<double>& x) const {
  std::vector<double> y(rows_, 0.0);
  for (int i = 0; i < rows_; ++i) {
    const double* r = row(i);
    double acc = 0.0;
    for (int j = 0; j < cols_; ++j) acc += r[j] * x[j];
    y[i] = acc;
  }
  return y;
}

std::vector<double> Matrix::apply_transposed(const std::vector<double>& x) const {
  std::vector<double> y(cols_, 0.0);
  for (int i = 0; i < rows_; ++i) {
    const double* r = row(i);
    const double xi = x[i];
    for (int j = 0; j < cols_; ++j) y[j] += r[j] * xi;
  }
  return y;
}

double Matrix::max_entry() const {
  double m = 0.0;
  for (double v : data_) m = std::max(m, v);
  return m;
}

std::vector<std::vector<double>> Matrix::to_rows() const {
  std::vector<std::vector<double>> out(rows_, std::vector<double>(cols_));
  for (int i = 0; i < rows_; ++i) std::copy(row(i), row(i) + cols_, out[i].begin());
  return out;
}

}  // namespace markovrng
