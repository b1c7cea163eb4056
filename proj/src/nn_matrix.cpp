#include "spancoref/nn/matrix.hpp"

#include <stdexcept>

namespace coref::nn {

// i-k-j loop order keeps the inner loop contiguous in both b and out.
void matmul_acc(const Matrix& a, const Matrix& b, Matrix& out) {
  if (a.cols != b.rows || out.rows != a.rows || out.cols != b.cols)
    throw std::logic_error("matmul_acc: shape mismatch");
  const int n = a.rows, k = a.cols, m = b.cols;
  for (int i = 0; i < n; ++i) {
    const double* arow = a.row_ptr(i);
    double* orow = out.row_ptr(i);
    for (int p = 0; p < k; ++p) {
      const double av = arow[p];
      if (av == 0.0) continue;
      const double* brow = b.row_ptr(p);
      for (int j = 0; j < m; ++j) orow[j] += av * brow[j];
    }
  }
}

void matmul_at_b_acc(const Matrix& a, const Matrix& b, Matrix& out) {
  if (a.rows != b.rows || out.rows != a.cols || out.cols != b.cols)
    throw std::logic_error("matmul_at_b_acc: shape mismatch");
  const int n = a.rows, k = a.cols, m = b.cols;
  for (int i = 0; i < n; ++i) {
    const double* arow = a.row_ptr(i);
    const double* brow = b.row_ptr(i);
    for (int p = 0; p < k; ++p) {
      const double av = arow[p];
      if (av == 0.0) continue;
      double* orow = out.row_ptr(p);
      for (int j = 0; j < m; ++j) orow[j] += av * brow[j];
    }
  }
}

void matmul_a_bt_acc(const Matrix& a, const Matrix& b, Matrix& out) {
  if (a.cols != b.cols || out.rows != a.rows || out.cols != b.rows)
    throw std::logic_error("matmul_a_bt_acc: shape mismatch");
  const int n = a.rows, k = a.cols, m = b.rows;
  for (int i = 0; i < n; ++i) {
    const double* arow = a.row_ptr(i);
    double* orow = out.row_ptr(i);
    for (int j = 0; j < m; ++j) {
      const double* brow = b.row_ptr(j);
      double acc = 0.0;
      for (int p = 0; p < k; ++p) acc += arow[p] * brow[p];
      orow[j] += acc;
    }
  }
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows, b.cols);
  matmul_acc(a, b, out);
  return out;
}

}  // namespace coref::nn
