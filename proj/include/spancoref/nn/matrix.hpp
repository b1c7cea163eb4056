#ifndef SPANCOREF_NN_MATRIX_HPP
#define SPANCOREF_NN_MATRIX_HPP

#include <cassert>
#include <cstddef>
#include <vector>

namespace coref::nn {

// Dense row-major double matrix. Small and predictable; everything the
// training path needs and nothing more.
struct Matrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(int r, int c) : rows(r), cols(c), data(static_cast<size_t>(r) * c) {}

  static Matrix zeros(int r, int c) { return Matrix(r, c); }

  double& at(int r, int c) {
    assert(r >= 0 && r < rows && c >= 0 && c < cols);
    return data[static_cast<size_t>(r) * cols + c];
  }
  double at(int r, int c) const {
    assert(r >= 0 && r < rows && c >= 0 && c < cols);
    return data[static_cast<size_t>(r) * cols + c];
  }
  double* row_ptr(int r) { return data.data() + static_cast<size_t>(r) * cols; }
  const double* row_ptr(int r) const {
    return data.data() + static_cast<size_t>(r) * cols;
  }

  bool same_shape(const Matrix& o) const {
    return rows == o.rows && cols == o.cols;
  }
  size_t size() const { return data.size(); }
  void fill(double v) { std::fill(data.begin(), data.end(), v); }
};

// out += a * b
void matmul_acc(const Matrix& a, const Matrix& b, Matrix& out);
// out += a^T * b
void matmul_at_b_acc(const Matrix& a, const Matrix& b, Matrix& out);
// out += a * b^T
void matmul_a_bt_acc(const Matrix& a, const Matrix& b, Matrix& out);

Matrix matmul(const Matrix& a, const Matrix& b);

}  // namespace coref::nn

#endif
