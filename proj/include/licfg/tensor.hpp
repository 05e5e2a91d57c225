#pragma once

#include <cstddef>
#include <initializer_list>
#include <string>
#include <vector>

namespace licfg {

// Dense row-major 2-D array of doubles. Vectors are {1,d} or {n,1},
// scalars {1,1}. All numeric state in the project flows through this type.
struct Tensor {
  int nrows = 0;
  int ncols = 0;
  std::vector<double> data;

  Tensor() = default;
  Tensor(int r, int c) : nrows(r), ncols(c), data(static_cast<size_t>(r) * c, 0.0) {}
  Tensor(int r, int c, std::initializer_list<double> v);

  static Tensor zeros(int r, int c) { return Tensor(r, c); }
  static Tensor full(int r, int c, double v);
  static Tensor scalar(double v);

  int rows() const { return nrows; }
  int cols() const { return ncols; }
  size_t size() const { return data.size(); }
  bool is_scalar() const { return nrows == 1 && ncols == 1; }

  double& at(int r, int c) { return data[static_cast<size_t>(r) * ncols + c]; }
  double at(int r, int c) const { return data[static_cast<size_t>(r) * ncols + c]; }
  double& operator[](size_t i) { return data[i]; }
  double operator[](size_t i) const { return data[i]; }

  bool same_shape(const Tensor& o) const { return nrows == o.nrows && ncols == o.ncols; }
  std::string shape_str() const;
  bool all_finite() const;
};

// Core kernels. The omp variants are the production path; the _serial
// twins are the reference implementations the tests compare against.
// Parallel loops write disjoint output rows, so results are bit-identical.
Tensor matmul(const Tensor& a, const Tensor& b);
Tensor matmul_serial(const Tensor& a, const Tensor& b);
Tensor transpose(const Tensor& a);

// In-place variants reusing the output buffer (reallocated on shape change).
void matmul_into(const Tensor& a, const Tensor& b, Tensor& out);
void transpose_into(const Tensor& a, Tensor& out);

// Resize only when the shape differs; contents are unspecified after a resize.
Tensor& fit_shape(Tensor& t, int r, int c);

// Pairwise squared Euclidean distances between rows of a [n,d] and b [m,d].
Tensor pairwise_sq_dists(const Tensor& a, const Tensor& b);
Tensor pairwise_sq_dists_serial(const Tensor& a, const Tensor& b);

double row_norm(const Tensor& a, int r);

// Vectorized tanh (libmvec when available). Every tanh evaluation in the
// project goes through this so independent code paths agree bitwise.
void vtanh(const double* in, double* out, size_t n);

}  // namespace licfg
