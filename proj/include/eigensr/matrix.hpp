#ifndef EIGENSR_MATRIX_HPP_
#define EIGENSR_MATRIX_HPP_

#include <cmath>
#include <cstddef>
#include <vector>

namespace eigensr {

/// Dense row-major matrix of doubles.
struct Matrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> a;

  Matrix() = default;
  Matrix(int r, int c) : rows(r), cols(c), a(static_cast<size_t>(r) * c, 0.0) {}

  double &at(int r, int c) { return a[static_cast<size_t>(r) * cols + c]; }
  double at(int r, int c) const { return a[static_cast<size_t>(r) * cols + c]; }
  double *row(int r) { return a.data() + static_cast<size_t>(r) * cols; }
  const double *row(int r) const { return a.data() + static_cast<size_t>(r) * cols; }
  size_t size() const { return a.size(); }

  bool same_shape(const Matrix &o) const { return rows == o.rows && cols == o.cols; }
};

inline Matrix matmul(const Matrix &x, const Matrix &y) {
  Matrix out(x.rows, y.cols);
  for (int i = 0; i < x.rows; ++i) {
    const double *xi = x.row(i);
    double *oi = out.row(i);
    for (int k = 0; k < x.cols; ++k) {
      const double v = xi[k];
      const double *yk = y.row(k);
      for (int j = 0; j < y.cols; ++j) oi[j] += v * yk[j];
    }
  }
  return out;
}

inline Matrix transpose(const Matrix &x) {
  Matrix out(x.cols, x.rows);
  for (int i = 0; i < x.rows; ++i)
    for (int j = 0; j < x.cols; ++j) out.at(j, i) = x.at(i, j);
  return out;
}

inline double frobenius_norm(const Matrix &x) {
  double s = 0.0;
  for (double v : x.a) s += v * v;
  return std::sqrt(s);
}

inline double max_abs(const Matrix &x) {
  double m = 0.0;
  for (double v : x.a) m = std::max(m, std::fabs(v));
  return m;
}

}  // namespace eigensr

#endif
