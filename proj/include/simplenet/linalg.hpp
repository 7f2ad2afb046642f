#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <vector>

#include "simplenet/error.hpp"

namespace simplenet {

/// Row-major dense matrix.
template <typename T>
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<T> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, T fill = T(0)) : rows(r), cols(c), data(r * c, fill) {}
  Matrix(std::size_t r, std::size_t c, std::vector<T> values)
      : rows(r), cols(c), data(std::move(values)) {
    require(data.size() == rows * cols, ErrorCode::shape_mismatch, "matrix data length mismatch");
  }

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = T(1);
    return m;
  }

  T& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  T operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

  std::span<T> row(std::size_t r) { return {data.data() + r * cols, cols}; }
  std::span<const T> row(std::size_t r) const { return {data.data() + r * cols, cols}; }

  friend bool operator==(const Matrix&, const Matrix&) = default;
};

template <typename U, typename T>
Matrix<U> matrix_cast(const Matrix<T>& m) {
  Matrix<U> out(m.rows, m.cols);
  std::transform(m.data.begin(), m.data.end(), out.data.begin(),
                 [](T v) { return static_cast<U>(v); });
  return out;
}

template <typename T>
Matrix<T> transpose(const Matrix<T>& m);

/// a * b. Every output row is reduced over k in ascending order with the same
/// instruction sequence, so a row's result is independent of the other rows.
template <typename T>
Matrix<T> matmul(const Matrix<T>& a, const Matrix<T>& b);

/// a^T * b, reducing over the shared row index in ascending order.
template <typename T>
Matrix<T> matmul_tn(const Matrix<T>& a, const Matrix<T>& b);

/// a * b^T.
template <typename T>
Matrix<T> matmul_nt(const Matrix<T>& a, const Matrix<T>& b);

/// Row-wise stack [top; bottom].
template <typename T>
Matrix<T> vstack(const Matrix<T>& top, const Matrix<T>& bottom);

extern template struct Matrix<float>;
extern template struct Matrix<double>;

}  // namespace simplenet
