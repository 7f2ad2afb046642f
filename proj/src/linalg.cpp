#include "simplenet/linalg.hpp"

#include <string>

namespace simplenet {

template struct Matrix<float>;
template struct Matrix<double>;

namespace {

constexpr std::size_t kTileRows = 4;
constexpr std::size_t kTileCols = 8;
constexpr std::size_t kBlockK = 256;
constexpr std::size_t kBlockRows = 64;

// acc[r][j] += a[p][r] * b[p][j] for p ascending, on zero-padded packed
// panels. Every output element sees the same operation sequence regardless of
// tile position, so a row's result never depends on its neighbors.
template <typename T>
void micro_kernel(const T* a_pack, const T* b_pack, std::size_t kc, T (&acc)[kTileRows][kTileCols]) {
  // Local copy so the accumulators stay in registers.
  T c[kTileRows][kTileCols];
  for (std::size_t r = 0; r < kTileRows; ++r) {
    for (std::size_t j = 0; j < kTileCols; ++j) c[r][j] = acc[r][j];
  }
  for (std::size_t p = 0; p < kc; ++p) {
    const T* ap = a_pack + p * kTileRows;
    const T* bp = b_pack + p * kTileCols;
    for (std::size_t r = 0; r < kTileRows; ++r) {
      const T av = ap[r];
      for (std::size_t j = 0; j < kTileCols; ++j) c[r][j] += av * bp[j];
    }
  }
  for (std::size_t r = 0; r < kTileRows; ++r) {
    for (std::size_t j = 0; j < kTileCols; ++j) acc[r][j] = c[r][j];
  }
}

}  // namespace

template <typename T>
Matrix<T> transpose(const Matrix<T>& m) {
  Matrix<T> out(m.cols, m.rows);
  for (std::size_t r = 0; r < m.rows; ++r) {
    for (std::size_t c = 0; c < m.cols; ++c) out(c, r) = m(r, c);
  }
  return out;
}

template <typename T>
Matrix<T> matmul(const Matrix<T>& a, const Matrix<T>& b) {
  require(a.cols == b.rows, ErrorCode::shape_mismatch,
          "matmul: " + std::to_string(a.rows) + "x" + std::to_string(a.cols) + " * " +
              std::to_string(b.rows) + "x" + std::to_string(b.cols));
  const std::size_t n = a.rows, k = a.cols, m = b.cols;
  Matrix<T> out(n, m);
  if (n == 0 || m == 0 || k == 0) return out;

  const std::size_t col_panels = (m + kTileCols - 1) / kTileCols;
  std::vector<T> b_pack(std::min(k, kBlockK) * col_panels * kTileCols);
  std::vector<T> a_pack(std::min(k, kBlockK) * kBlockRows);

  for (std::size_t p0 = 0; p0 < k; p0 += kBlockK) {
    const std::size_t kc = std::min(kBlockK, k - p0);
    // Partial sums from earlier k blocks are resumed from `out`; the stored
    // value is exactly the accumulator, so blocking does not change results.
    const bool resume = p0 > 0;
    for (std::size_t jp = 0; jp < col_panels; ++jp) {
      T* dst = b_pack.data() + jp * kc * kTileCols;
      for (std::size_t p = 0; p < kc; ++p) {
        for (std::size_t j = 0; j < kTileCols; ++j) {
          const std::size_t col = jp * kTileCols + j;
          dst[p * kTileCols + j] = col < m ? b(p0 + p, col) : T(0);
        }
      }
    }
    for (std::size_t i0 = 0; i0 < n; i0 += kBlockRows) {
      const std::size_t mc = std::min(kBlockRows, n - i0);
      const std::size_t row_panels = (mc + kTileRows - 1) / kTileRows;
      for (std::size_t ip = 0; ip < row_panels; ++ip) {
        T* dst = a_pack.data() + ip * kc * kTileRows;
        for (std::size_t r = 0; r < kTileRows; ++r) {
          const std::size_t row = i0 + ip * kTileRows + r;
          if (row < n) {
            const T* src = a.data.data() + row * k + p0;
            for (std::size_t p = 0; p < kc; ++p) dst[p * kTileRows + r] = src[p];
          } else {
            for (std::size_t p = 0; p < kc; ++p) dst[p * kTileRows + r] = T(0);
          }
        }
      }
      for (std::size_t jp = 0; jp < col_panels; ++jp) {
        const std::size_t j0 = jp * kTileCols;
        const std::size_t cols = std::min(kTileCols, m - j0);
        for (std::size_t ip = 0; ip < row_panels; ++ip) {
          const std::size_t r0 = i0 + ip * kTileRows;
          const std::size_t rows = std::min(kTileRows, n - r0);
          T acc[kTileRows][kTileCols] = {};
          if (resume) {
            for (std::size_t r = 0; r < rows; ++r) {
              for (std::size_t j = 0; j < cols; ++j) acc[r][j] = out(r0 + r, j0 + j);
            }
          }
          micro_kernel(a_pack.data() + ip * kc * kTileRows, b_pack.data() + jp * kc * kTileCols, kc, acc);
          for (std::size_t r = 0; r < rows; ++r) {
            for (std::size_t j = 0; j < cols; ++j) out(r0 + r, j0 + j) = acc[r][j];
          }
        }
      }
    }
  }
  return out;
}

template <typename T>
Matrix<T> matmul_tn(const Matrix<T>& a, const Matrix<T>& b) {
  require(a.rows == b.rows, ErrorCode::shape_mismatch, "matmul_tn: row counts differ");
  return matmul(transpose(a), b);
}

template <typename T>
Matrix<T> matmul_nt(const Matrix<T>& a, const Matrix<T>& b) {
  require(a.cols == b.cols, ErrorCode::shape_mismatch, "matmul_nt: column counts differ");
  return matmul(a, transpose(b));
}

template <typename T>
Matrix<T> vstack(const Matrix<T>& top, const Matrix<T>& bottom) {
  require(top.cols == bottom.cols, ErrorCode::shape_mismatch, "vstack: column counts differ");
  Matrix<T> out(top.rows + bottom.rows, top.cols);
  std::copy(top.data.begin(), top.data.end(), out.data.begin());
  std::copy(bottom.data.begin(), bottom.data.end(),
            out.data.begin() + static_cast<std::ptrdiff_t>(top.data.size()));
  return out;
}

#define SIMPLENET_INSTANTIATE(T)                                   \
  template Matrix<T> transpose(const Matrix<T>&);                  \
  template Matrix<T> matmul(const Matrix<T>&, const Matrix<T>&);    \
  template Matrix<T> matmul_tn(const Matrix<T>&, const Matrix<T>&); \
  template Matrix<T> matmul_nt(const Matrix<T>&, const Matrix<T>&); \
  template Matrix<T> vstack(const Matrix<T>&, const Matrix<T>&);

SIMPLENET_INSTANTIATE(float)
SIMPLENET_INSTANTIATE(double)

#undef SIMPLENET_INSTANTIATE

}  // namespace simplenet
