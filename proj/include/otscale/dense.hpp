#pragma once

#include <cassert>
#include <cmath>
#include <cstdint>
#include <vector>

namespace otscale {

// Dense row-major matrix of doubles. Small and value-like on purpose:
// everything in this library runs at desk scale (n*m <= ~1e4).
struct Matrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(int r, int c, double fill = 0.0)
      : rows(r), cols(c), data(static_cast<size_t>(r) * c, fill) {}
  Matrix(int r, int c, std::vector<double> d) : rows(r), cols(c), data(std::move(d)) {
    assert(data.size() == static_cast<size_t>(r) * c);
  }

  double& operator()(int i, int j) {
    assert(i >= 0 && i < rows && j >= 0 && j < cols);
    return data[static_cast<size_t>(i) * cols + j];
  }
  double operator()(int i, int j) const {
    assert(i >= 0 && i < rows && j >= 0 && j < cols);
    return data[static_cast<size_t>(i) * cols + j];
  }

  bool same_shape(const Matrix& o) const { return rows == o.rows && cols == o.cols; }
};

inline bool operator==(const Matrix& a, const Matrix& b) {
  return a.rows == b.rows && a.cols == b.cols && a.data == b.data;
}

inline std::vector<double> row_sums_dense(const Matrix& x) {
  std::vector<double> s(x.rows, 0.0);
  for (int i = 0; i < x.rows; ++i)
    for (int j = 0; j < x.cols; ++j) s[i] += x(i, j);
  return s;
}

inline std::vector<double> col_sums_dense(const Matrix& x) {
  std::vector<double> s(x.cols, 0.0);
  for (int i = 0; i < x.rows; ++i)
    for (int j = 0; j < x.cols; ++j) s[j] += x(i, j);
  return s;
}

inline double total_sum(const Matrix& x) {
  double t = 0.0;
  for (double v : x.data) t += v;
  return t;
}

// <A, B> entrywise inner product.
inline double inner(const Matrix& a, const Matrix& b) {
  assert(a.same_shape(b));
  double t = 0.0;
  for (size_t k = 0; k < a.data.size(); ++k) t += a.data[k] * b.data[k];
  return t;
}

inline double max_abs(const Matrix& x) {
  double t = 0.0;
  for (double v : x.data) t = std::max(t, std::fabs(v));
  return t;
}

inline double l1_diff(const std::vector<double>& a, const std::vector<double>& b) {
  assert(a.size() == b.size());
  double t = 0.0;
  for (size_t k = 0; k < a.size(); ++k) t += std::fabs(a[k] - b[k]);
  return t;
}

inline double l1_norm(const std::vector<double>& a) {
  double t = 0.0;
  for (double v : a) t += std::fabs(v);
  return t;
}

}  // namespace otscale
