#include "mgccf/matrix.hpp"

#include <cmath>
#include <cstddef>
#include <stdexcept>

#include "mgccf/errors.hpp"

namespace mgccf {

Matrix::Matrix(int r, int c, std::vector<double> d) : rows(r), cols(c), data(std::move(d)) {
  if (data.size() != static_cast<std::size_t>(r) * c) {
    throw DimensionError("matrix data length " + std::to_string(data.size()) +
                         " does not match shape " + shape_str());
  }
}

std::string Matrix::shape_str() const {
  return std::to_string(rows) + "x" + std::to_string(cols);
}

void check_same_shape(const Matrix& a, const Matrix& b, const char* op) {
  if (a.rows != b.rows || a.cols != b.cols) {
    throw DimensionError(std::string(op) + ": shape mismatch " + a.shape_str() + " vs " +
                         b.shape_str());
  }
}

bool has_nonfinite(const Matrix& m) {
  for (double v : m.data) {
    if (!std::isfinite(v)) return true;
  }
  return false;
}

namespace {

// Shared inner loop: C[i,:] += A[i,k] * B[k,:], fixed k-then-j order.
inline void matmul_row(const Matrix& a, const Matrix& b, Matrix& c, int i) {
  const double* arow = a.row(i);
  double* crow = c.row(i);
  for (int k = 0; k < a.cols; ++k) {
    const double aik = arow[k];
    if (aik == 0.0) continue;
    const double* brow = b.row(k);
    for (int j = 0; j < b.cols; ++j) crow[j] += aik * brow[j];
  }
}

void check_matmul_shapes(const Matrix& a, const Matrix& b) {
  if (a.cols != b.rows) {
    throw DimensionError("matmul: inner dims differ, " + a.shape_str() + " vs " + b.shape_str());
  }
}

}  // namespace

Matrix matmul_serial(const Matrix& a, const Matrix& b) {
  check_matmul_shapes(a, b);
  Matrix c(a.rows, b.cols);
  for (int i = 0; i < a.rows; ++i) matmul_row(a, b, c, i);
  return c;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  check_matmul_shapes(a, b);
  Matrix c(a.rows, b.cols);
  const std::size_t work = a.size() * static_cast<std::size_t>(b.cols);
#pragma omp parallel for schedule(static) if (work > 1u << 16)
  for (int i = 0; i < a.rows; ++i) matmul_row(a, b, c, i);
  return c;
}

Matrix transpose(const Matrix& a) {
  Matrix t(a.cols, a.rows);
  for (int i = 0; i < a.rows; ++i)
    for (int j = 0; j < a.cols; ++j) t.at(j, i) = a.at(i, j);
  return t;
}

Matrix concat_cols(const Matrix& a, const Matrix& b) {
  if (a.rows != b.rows) {
    throw DimensionError("concat_cols: row counts differ, " + a.shape_str() + " vs " +
                         b.shape_str());
  }
  Matrix c(a.rows, a.cols + b.cols);
  for (int i = 0; i < a.rows; ++i) {
    double* crow = c.row(i);
    const double* arow = a.row(i);
    const double* brow = b.row(i);
    for (int j = 0; j < a.cols; ++j) crow[j] = arow[j];
    for (int j = 0; j < b.cols; ++j) crow[a.cols + j] = brow[j];
  }
  return c;
}

Matrix add(const Matrix& a, const Matrix& b) {
  check_same_shape(a, b, "add");
  Matrix c = a;
  for (std::size_t i = 0; i < c.size(); ++i) c.data[i] += b.data[i];
  return c;
}

Matrix sub(const Matrix& a, const Matrix& b) {
  check_same_shape(a, b, "sub");
  Matrix c = a;
  for (std::size_t i = 0; i < c.size(); ++i) c.data[i] -= b.data[i];
  return c;
}

Matrix scale(const Matrix& a, double c) {
  Matrix out = a;
  for (double& v : out.data) v *= c;
  return out;
}

Matrix mul_elem(const Matrix& a, const Matrix& b) {
  check_same_shape(a, b, "mul_elem");
  Matrix c = a;
  for (std::size_t i = 0; i < c.size(); ++i) c.data[i] *= b.data[i];
  return c;
}

Matrix tanh_mat(const Matrix& a) {
  Matrix c = a;
  for (double& v : c.data) v = std::tanh(v);
  return c;
}

Matrix sigmoid_mat(const Matrix& a) {
  Matrix c = a;
  for (double& v : c.data) {
    v = v >= 0.0 ? 1.0 / (1.0 + std::exp(-v)) : std::exp(v) / (1.0 + std::exp(v));
  }
  return c;
}

Matrix softplus_mat(const Matrix& a) {
  Matrix c = a;
  for (double& v : c.data) {
    // max(x,0) + log1p(exp(-|x|)) avoids overflow for large |x|
    v = (v > 0.0 ? v : 0.0) + std::log1p(std::exp(-std::abs(v)));
  }
  return c;
}

Matrix softmax_rows(const Matrix& a) {
  Matrix c(a.rows, a.cols);
  for (int i = 0; i < a.rows; ++i) {
    const double* arow = a.row(i);
    double* crow = c.row(i);
    double mx = arow[0];
    for (int j = 1; j < a.cols; ++j) mx = std::max(mx, arow[j]);
    double denom = 0.0;
    for (int j = 0; j < a.cols; ++j) {
      crow[j] = std::exp(arow[j] - mx);
      denom += crow[j];
    }
    for (int j = 0; j < a.cols; ++j) crow[j] /= denom;
  }
  return c;
}

Matrix row_mean(const Matrix& a) {
  Matrix c = row_sum(a);
  if (a.rows > 0) {
    const double inv = 1.0 / a.rows;
    for (double& v : c.data) v *= inv;
  }
  return c;
}

Matrix row_sum(const Matrix& a) {
  Matrix c(1, a.cols);
  for (int i = 0; i < a.rows; ++i) {
    const double* arow = a.row(i);
    for (int j = 0; j < a.cols; ++j) c.data[j] += arow[j];
  }
  return c;
}

Matrix gather_rows(const Matrix& a, const std::vector<int>& idx) {
  Matrix c(static_cast<int>(idx.size()), a.cols);
  for (std::size_t i = 0; i < idx.size(); ++i) {
    const int r = idx[i];
    if (r < 0 || r >= a.rows) {
      throw DimensionError("gather_rows: index " + std::to_string(r) + " out of range for " +
                           a.shape_str());
    }
    const double* src = a.row(r);
    double* dst = c.row(static_cast<int>(i));
    for (int j = 0; j < a.cols; ++j) dst[j] = src[j];
  }
  return c;
}

namespace {
void check_offsets(const Matrix& a, const std::vector<int>& offsets) {
  if (offsets.empty() || offsets.front() != 0 || offsets.back() != a.rows) {
    throw DimensionError("segment offsets must start at 0 and end at " +
                         std::to_string(a.rows));
  }
}
}  // namespace

Matrix segment_sum(const Matrix& a, const std::vector<int>& offsets) {
  check_offsets(a, offsets);
  const int n_seg = static_cast<int>(offsets.size()) - 1;
  Matrix c(n_seg, a.cols);
  for (int s = 0; s < n_seg; ++s) {
    double* crow = c.row(s);
    for (int r = offsets[s]; r < offsets[s + 1]; ++r) {
      const double* arow = a.row(r);
      for (int j = 0; j < a.cols; ++j) crow[j] += arow[j];
    }
  }
  return c;
}

Matrix segment_mean(const Matrix& a, const std::vector<int>& offsets) {
  Matrix c = segment_sum(a, offsets);
  for (int s = 0; s < c.rows; ++s) {
    const int len = offsets[s + 1] - offsets[s];
    if (len > 1) {
      const double inv = 1.0 / len;
      double* crow = c.row(s);
      for (int j = 0; j < c.cols; ++j) crow[j] *= inv;
    }
  }
  return c;
}

Matrix rows_dot(const Matrix& a, const Matrix& b) {
  check_same_shape(a, b, "rows_dot");
  Matrix c(a.rows, 1);
  for (int i = 0; i < a.rows; ++i) {
    const double* arow = a.row(i);
    const double* brow = b.row(i);
    double acc = 0.0;
    for (int j = 0; j < a.cols; ++j) acc += arow[j] * brow[j];
    c.data[i] = acc;
  }
  return c;
}

Matrix rowwise_scale(const Matrix& a, const Matrix& w) {
  if (w.rows != a.rows || w.cols != 1) {
    throw DimensionError("rowwise_scale: weights must be " + std::to_string(a.rows) +
                         "x1, got " + w.shape_str());
  }
  Matrix c = a;
  for (int i = 0; i < a.rows; ++i) {
    double* crow = c.row(i);
    const double wi = w.data[i];
    for (int j = 0; j < a.cols; ++j) crow[j] *= wi;
  }
  return c;
}

Matrix slice_cols(const Matrix& a, int begin, int end) {
  if (begin < 0 || end > a.cols || begin >= end) {
    throw DimensionError("slice_cols: [" + std::to_string(begin) + ", " + std::to_string(end) +
                         ") invalid for " + a.shape_str());
  }
  Matrix c(a.rows, end - begin);
  for (int i = 0; i < a.rows; ++i) {
    const double* arow = a.row(i);
    double* crow = c.row(i);
    for (int j = begin; j < end; ++j) crow[j - begin] = arow[j];
  }
  return c;
}

double sum_all(const Matrix& a) {
  double acc = 0.0;
  for (double v : a.data) acc += v;
  return acc;
}

double sum_sq(const Matrix& a) {
  double acc = 0.0;
  for (double v : a.data) acc += v * v;
  return acc;
}

Matrix xavier_init(int rows, int cols, Rng& rng) {
  if (rows < 1 || cols < 1) {
    throw DimensionError("xavier_init: shape must be positive, got " + std::to_string(rows) +
                         "x" + std::to_string(cols));
  }
  const double bound = std::sqrt(6.0 / (rows + cols));
  Matrix m(rows, cols);
  for (double& v : m.data) v = rng.uniform(-bound, bound);
  return m;
}

Matrix dropout(const Matrix& a, double rate, Rng& rng, bool training, Matrix* mask_out) {
  if (rate < 0.0 || rate >= 1.0) {
    throw ConfigError("dropout rate must be in [0,1), got " + std::to_string(rate));
  }
  if (!training || rate == 0.0) {
    if (mask_out) *mask_out = Matrix();
    return a;
  }
  const double keep_scale = 1.0 / (1.0 - rate);
  Matrix c(a.rows, a.cols);
  Matrix mask(a.rows, a.cols);
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double m = rng.uniform() < rate ? 0.0 : keep_scale;
    mask.data[i] = m;
    c.data[i] = a.data[i] * m;
  }
  if (mask_out) *mask_out = std::move(mask);
  return c;
}

}  // namespace mgccf
