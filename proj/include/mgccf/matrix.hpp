#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mgccf/rng.hpp"

namespace mgccf {

// Dense row-major matrix of 64-bit floats. Row vectors are 1 x cols matrices.
struct Matrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(int r, int c) : rows(r), cols(c), data(static_cast<std::size_t>(r) * c, 0.0) {}
  Matrix(int r, int c, std::vector<double> d);

  double& at(int r, int c) { return data[static_cast<std::size_t>(r) * cols + c]; }
  double at(int r, int c) const { return data[static_cast<std::size_t>(r) * cols + c]; }
  double* row(int r) { return data.data() + static_cast<std::size_t>(r) * cols; }
  const double* row(int r) const { return data.data() + static_cast<std::size_t>(r) * cols; }
  std::size_t size() const { return data.size(); }

  static Matrix zeros(int r, int c) { return Matrix(r, c); }
  std::string shape_str() const;
};

void check_same_shape(const Matrix& a, const Matrix& b, const char* op);
bool has_nonfinite(const Matrix& m);

// --- kernels -----------------------------------------------------------------
//
// The hot kernels come in OpenMP and serial flavors. The parallel versions
// partition output rows; every output element is accumulated in the same
// serial order in both, so results are bitwise identical regardless of the
// thread count. Tests and the bench tool compare the two.

Matrix matmul_serial(const Matrix& a, const Matrix& b);
Matrix matmul(const Matrix& a, const Matrix& b);

Matrix transpose(const Matrix& a);
Matrix concat_cols(const Matrix& a, const Matrix& b);
Matrix add(const Matrix& a, const Matrix& b);
Matrix sub(const Matrix& a, const Matrix& b);
Matrix scale(const Matrix& a, double c);
Matrix mul_elem(const Matrix& a, const Matrix& b);
Matrix tanh_mat(const Matrix& a);
Matrix sigmoid_mat(const Matrix& a);
Matrix softplus_mat(const Matrix& a);  // log(1 + exp(x)), overflow-safe
Matrix softmax_rows(const Matrix& a);

// Reductions across rows: both produce a 1 x cols row vector.
Matrix row_mean(const Matrix& a);
Matrix row_sum(const Matrix& a);

// Rows of `a` selected by index, duplicates allowed.
Matrix gather_rows(const Matrix& a, const std::vector<int>& idx);

// Per-segment reductions over consecutive row ranges. offsets has n_seg + 1
// entries; segment s covers rows [offsets[s], offsets[s+1]). Empty segments
// produce a zero row.
Matrix segment_sum(const Matrix& a, const std::vector<int>& offsets);
Matrix segment_mean(const Matrix& a, const std::vector<int>& offsets);

Matrix rows_dot(const Matrix& a, const Matrix& b);            // n x 1
Matrix rowwise_scale(const Matrix& a, const Matrix& w);       // scale row i by w(i,0)
Matrix slice_cols(const Matrix& a, int begin, int end);       // columns [begin, end)

double sum_all(const Matrix& a);
double sum_sq(const Matrix& a);  // squared Frobenius norm

// Entries i.i.d. uniform on [-sqrt(6/(rows+cols)), +sqrt(6/(rows+cols))].
Matrix xavier_init(int rows, int cols, Rng& rng);

// Inverted dropout: each entry zeroed with probability `rate`, survivors scaled
// by 1/(1-rate); identity when not training. The survivor mask is written to
// `mask_out` (1/(1-rate) or 0 per entry) when non-null.
Matrix dropout(const Matrix& a, double rate, Rng& rng, bool training,
               Matrix* mask_out = nullptr);

}  // namespace mgccf
