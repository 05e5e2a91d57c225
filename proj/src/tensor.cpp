#include "licfg/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace licfg {

Tensor::Tensor(int r, int c, std::initializer_list<double> v) : nrows(r), ncols(c), data(v) {
  if (data.size() != static_cast<size_t>(r) * c)
    throw std::invalid_argument("Tensor: initializer size does not match shape");
}

Tensor Tensor::full(int r, int c, double v) {
  Tensor t(r, c);
  std::fill(t.data.begin(), t.data.end(), v);
  return t;
}

Tensor Tensor::scalar(double v) {
  Tensor t(1, 1);
  t.data[0] = v;
  return t;
}

std::string Tensor::shape_str() const {
  return "[" + std::to_string(nrows) + "," + std::to_string(ncols) + "]";
}

bool Tensor::all_finite() const {
  for (double v : data)
    if (!std::isfinite(v)) return false;
  return true;
}

namespace {

void matmul_row(const Tensor& a, const Tensor& b, Tensor& out, int i) {
  const int n = b.ncols, k = a.ncols;
  const double* arow = a.data.data() + static_cast<size_t>(i) * k;
  double* orow = out.data.data() + static_cast<size_t>(i) * n;
  for (int p = 0; p < k; ++p) {
    const double av = arow[p];
    const double* brow = b.data.data() + static_cast<size_t>(p) * n;
    for (int j = 0; j < n; ++j) orow[j] += av * brow[j];
  }
}

}  // namespace

Tensor& fit_shape(Tensor& t, int r, int c) {
  if (t.nrows != r || t.ncols != c) {
    t.nrows = r;
    t.ncols = c;
    t.data.assign(static_cast<size_t>(r) * c, 0.0);
  }
  return t;
}

void matmul_into(const Tensor& a, const Tensor& b, Tensor& out) {
  if (a.ncols != b.nrows)
    throw std::invalid_argument("matmul: shape mismatch " + a.shape_str() + " x " + b.shape_str());
  fit_shape(out, a.nrows, b.ncols);
  std::fill(out.data.begin(), out.data.end(), 0.0);
  const long work = static_cast<long>(a.nrows) * a.ncols * b.ncols;
#ifdef _OPENMP
  if (work > 262144) {
#pragma omp parallel for schedule(static)
    for (int i = 0; i < a.nrows; ++i) matmul_row(a, b, out, i);
    return;
  }
#endif
  (void)work;
  for (int i = 0; i < a.nrows; ++i) matmul_row(a, b, out, i);
}

Tensor matmul_serial(const Tensor& a, const Tensor& b) {
  if (a.ncols != b.nrows)
    throw std::invalid_argument("matmul: shape mismatch " + a.shape_str() + " x " + b.shape_str());
  Tensor out(a.nrows, b.ncols);
  for (int i = 0; i < a.nrows; ++i) matmul_row(a, b, out, i);
  return out;
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  Tensor out;
  matmul_into(a, b, out);
  return out;
}

void transpose_into(const Tensor& a, Tensor& out) {
  fit_shape(out, a.ncols, a.nrows);
  for (int i = 0; i < a.nrows; ++i)
    for (int j = 0; j < a.ncols; ++j) out.at(j, i) = a.at(i, j);
}

Tensor transpose(const Tensor& a) {
  Tensor out;
  transpose_into(a, out);
  return out;
}

namespace {

void sq_dists_row(const Tensor& a, const Tensor& b, Tensor& out, int i) {
  const int d = a.ncols;
  const double* ar = a.data.data() + static_cast<size_t>(i) * d;
  double* orow = out.data.data() + static_cast<size_t>(i) * b.nrows;
  for (int j = 0; j < b.nrows; ++j) {
    const double* br = b.data.data() + static_cast<size_t>(j) * d;
    double s = 0.0;
    for (int p = 0; p < d; ++p) {
      const double diff = ar[p] - br[p];
      s += diff * diff;
    }
    orow[j] = s;
  }
}

}  // namespace

Tensor pairwise_sq_dists_serial(const Tensor& a, const Tensor& b) {
  if (a.ncols != b.ncols)
    throw std::invalid_argument("pairwise_sq_dists: dimension mismatch");
  Tensor out(a.nrows, b.nrows);
  for (int i = 0; i < a.nrows; ++i) sq_dists_row(a, b, out, i);
  return out;
}

Tensor pairwise_sq_dists(const Tensor& a, const Tensor& b) {
  if (a.ncols != b.ncols)
    throw std::invalid_argument("pairwise_sq_dists: dimension mismatch");
  Tensor out(a.nrows, b.nrows);
#ifdef _OPENMP
  if (static_cast<long>(a.nrows) * b.nrows > 16384) {
#pragma omp parallel for schedule(static)
    for (int i = 0; i < a.nrows; ++i) sq_dists_row(a, b, out, i);
    return out;
  }
#endif
  for (int i = 0; i < a.nrows; ++i) sq_dists_row(a, b, out, i);
  return out;
}

double row_norm(const Tensor& a, int r) {
  double s = 0.0;
  for (int j = 0; j < a.ncols; ++j) s += a.at(r, j) * a.at(r, j);
  return std::sqrt(s);
}

}  // namespace licfg

#if defined(__GNUC__) && defined(__linux__) && defined(__x86_64__)
// libmvec vector variants of tanh (max error ~2 ulp)
__attribute__((simd("notinbranch"))) double tanh(double) noexcept;
#define LICFG_HAVE_VEC_TANH 1
#endif

namespace licfg {

void vtanh(const double* in, double* out, size_t n) {
#ifdef LICFG_HAVE_VEC_TANH
#pragma omp simd
  for (size_t i = 0; i < n; ++i) out[i] = tanh(in[i]);
#else
  for (size_t i = 0; i < n; ++i) out[i] = std::tanh(in[i]);
#endif
}

}  // namespace licfg
