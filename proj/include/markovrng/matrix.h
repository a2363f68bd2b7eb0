#ifndef MARKOVRNG_MATRIX_H_
#define MARKOVRNG_MATRIX_H_

#include <vector>

namespace markovrng {

// Dense row-major matrix of doubles. Kernels are stored as (to, from).
class Matrix {
 public:
  Matrix() = default;
  Matrix(int rows, int cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(static_cast<size_t>(rows) * cols, fill) {}

  static Matrix from_rows(const std::vector<std::vector<double>>& rows);
  static Matrix identity(int n);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  bool empty() const { return data_.empty(); }

  double& operator()(int r, int c) { return data_[static_cast<size_t>(r) * cols_ + c]; }
  double operator()(int r, int c) const { return data_[static_cast<size_t>(r) * cols_ + c]; }

  const double* row(int r) const { return data_.data() + static_cast<size_t>(r) * cols_; }
  double* row(int r) { return data_.data() + static_cast<size_t>(r) * cols_; }

  Matrix transposed() const;
  // y = M x
  std::vector<double> apply(const std::vector<double>& x) const;
  // y = M^T x
  std::vector<double> apply_transposed(const std::vector<double>& x) const;
  double max_entry() const;
  std::vector<std::vector<double>> to_rows() const;

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<double> data_;
};

}  // namespace markovrng

#endif  // MARKOVRNG_MATRIX_H_
