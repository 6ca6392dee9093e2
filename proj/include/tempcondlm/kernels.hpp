/**
 * @file kernels.hpp
 * @brief Dense linear-algebra kernels for the transformer.
 *
 * Two implementations per kernel: a naive serial reference in kernels::ref
 * (used by tests and as the deterministic fallback) and an optimized path in
 * kernels:: backed by Eigen with OpenMP row partitioning for large shapes.
 * TEMPCONDLM_DETERMINISTIC=1 routes everything through the serial reference.
 */

#ifndef TEMPCONDLM_KERNELS_HPP
#define TEMPCONDLM_KERNELS_HPP

#include <Eigen/Dense>
#include <cmath>

#include "tempcondlm/common.hpp"
#include "tempcondlm/mat.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace tempcondlm::kernels {

namespace ref {

/// C = A * B, naive triple loop. A: m x k, B: k x n, C: m x n.
template <typename Real>
void matmul(const Real* a, const Real* b, Real* c, int m, int k, int n) {
  for (int i = 0; i < m; ++i) {
    Real* crow = c + static_cast<std::size_t>(i) * n;
    for (int j = 0; j < n; ++j) crow[j] = Real(0);
    for (int p = 0; p < k; ++p) {
      const Real av = a[static_cast<std::size_t>(i) * k + p];
      const Real* brow = b + static_cast<std::size_t>(p) * n;
      for (int j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

/// C = A * B^T. A: m x k, B: n x k, C: m x n.
template <typename Real>
void matmul_nt(const Real* a, const Real* b, Real* c, int m, int k, int n) {
  for (int i = 0; i < m; ++i) {
    const Real* arow = a + static_cast<std::size_t>(i) * k;
    for (int j = 0; j < n; ++j) {
      const Real* brow = b + static_cast<std::size_t>(j) * k;
      Real s = 0;
      for (int p = 0; p < k; ++p) s += arow[p] * brow[p];
      c[static_cast<std::size_t>(i) * n + j] = s;
    }
  }
}

/// C = A^T * B. A: k x m, B: k x n, C: m x n.
template <typename Real>
void matmul_tn(const Real* a, const Real* b, Real* c, int m, int k, int n) {
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) c[static_cast<std::size_t>(i) * n + j] = Real(0);
  for (int p = 0; p < k; ++p) {
    const Real* arow = a + static_cast<std::size_t>(p) * m;
    const Real* brow = b + static_cast<std::size_t>(p) * n;
    for (int i = 0; i < m; ++i) {
      const Real av = arow[i];
      Real* crow = c + static_cast<std::size_t>(i) * n;
      for (int j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

}  // namespace ref

namespace detail {

template <typename Real>
using EMap = Eigen::Map<
    Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
template <typename Real>
using CEMap = Eigen::Map<
    const Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;

inline bool use_fast_path() { return !deterministic_mode(); }

}  // namespace detail

/// C = A * B.
template <typename Real>
void matmul(const Real* a, const Real* b, Real* c, int m, int k, int n) {
  if (!detail::use_fast_path()) {
    ref::matmul(a, b, c, m, k, n);
    return;
  }
  detail::CEMap<Real> ma(a, m, k);
  detail::CEMap<Real> mb(b, k, n);
  detail::EMap<Real> mc(c, m, n);
#ifdef _OPENMP
  const int nthreads = omp_get_max_threads();
  if (nthreads > 1 && m >= 4 * nthreads) {
#pragma omp parallel for schedule(static)
    for (int t = 0; t < nthreads; ++t) {
      const int lo = static_cast<int>(static_cast<long>(m) * t / nthreads);
      const int hi = static_cast<int>(static_cast<long>(m) * (t + 1) / nthreads);
      if (hi > lo) mc.middleRows(lo, hi - lo).noalias() = ma.middleRows(lo, hi - lo) * mb;
    }
    return;
  }
#endif
  mc.noalias() = ma * mb;
}

/// C = A * B^T.
template <typename Real>
void matmul_nt(const Real* a, const Real* b, Real* c, int m, int k, int n) {
  if (!detail::use_fast_path()) {
    ref::matmul_nt(a, b, c, m, k, n);
    return;
  }
  detail::CEMap<Real> ma(a, m, k);
  detail::CEMap<Real> mb(b, n, k);
  detail::EMap<Real> mc(c, m, n);
  mc.noalias() = ma * mb.transpose();
}

/// C = A^T * B.
template <typename Real>
void matmul_tn(const Real* a, const Real* b, Real* c, int m, int k, int n) {
  if (!detail::use_fast_path()) {
    ref::matmul_tn(a, b, c, m, k, n);
    return;
  }
  detail::CEMap<Real> ma(a, k, m);
  detail::CEMap<Real> mb(b, k, n);
  detail::EMap<Real> mc(c, m, n);
  mc.noalias() = ma.transpose() * mb;
}

/// C += A^T * B (gradient accumulation form).
template <typename Real>
void matmul_tn_acc(const Real* a, const Real* b, Real* c, int m, int k, int n) {
  if (!detail::use_fast_path()) {
    std::vector<Real> tmp(static_cast<std::size_t>(m) * n);
    ref::matmul_tn(a, b, tmp.data(), m, k, n);
    for (std::size_t i = 0; i < tmp.size(); ++i) c[i] += tmp[i];
    return;
  }
  detail::CEMap<Real> ma(a, k, m);
  detail::CEMap<Real> mb(b, k, n);
  detail::EMap<Real> mc(c, m, n);
  mc.noalias() += ma.transpose() * mb;
}

namespace ref {

/// General strided C = alpha * op(A) * op(B) + beta * C (BLAS-style).
/// op(A) is m x k, op(B) is k x n; lda/ldb/ldc are row strides of the
/// underlying (untransposed) buffers.
template <typename Real>
void gemm(bool ta, bool tb, int m, int n, int k, Real alpha, const Real* a,
          int lda, const Real* b, int ldb, Real beta, Real* c, int ldc) {
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) {
      Real s = 0;
      for (int p = 0; p < k; ++p) {
        const Real av = ta ? a[static_cast<std::size_t>(p) * lda + i]
                           : a[static_cast<std::size_t>(i) * lda + p];
        const Real bv = tb ? b[static_cast<std::size_t>(j) * ldb + p]
                           : b[static_cast<std::size_t>(p) * ldb + j];
        s += av * bv;
      }
      Real& out = c[static_cast<std::size_t>(i) * ldc + j];
      out = alpha * s + (beta == Real(0) ? Real(0) : beta * out);
    }
  }
}

}  // namespace ref

/// Strided GEMM, Eigen-backed unless deterministic mode forces the reference.
template <typename Real>
void gemm(bool ta, bool tb, int m, int n, int k, Real alpha, const Real* a,
          int lda, const Real* b, int ldb, Real beta, Real* c, int ldc) {
  if (!detail::use_fast_path()) {
    ref::gemm(ta, tb, m, n, k, alpha, a, lda, b, ldb, beta, c, ldc);
    return;
  }
  using Stride = Eigen::OuterStride<>;
  using M = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  Eigen::Map<const M, 0, Stride> ma(a, ta ? k : m, ta ? m : k, Stride(lda));
  Eigen::Map<const M, 0, Stride> mb(b, tb ? n : k, tb ? k : n, Stride(ldb));
  Eigen::Map<M, 0, Stride> mc(c, m, n, Stride(ldc));
  if (beta == Real(0)) mc.setZero();
  else if (beta != Real(1)) mc *= beta;
  if (!ta && !tb) mc.noalias() += alpha * (ma * mb);
  else if (!ta && tb) mc.noalias() += alpha * (ma * mb.transpose());
  else if (ta && !tb) mc.noalias() += alpha * (ma.transpose() * mb);
  else mc.noalias() += alpha * (ma.transpose() * mb.transpose());
}

/// Row-wise y = x * W + b over a whole matrix. W: in x out.
template <typename Real>
void linear(const Mat<Real>& x, const Mat<Real>& w, const Mat<Real>& b,
            Mat<Real>& y) {
  y.resize(x.rows, w.cols);
  matmul(x.data.data(), w.data.data(), y.data.data(), x.rows, x.cols, w.cols);
  for (int r = 0; r < y.rows; ++r) {
    Real* yr = y.row(r);
    const Real* br = b.data.data();
    for (int c = 0; c < y.cols; ++c) yr[c] += br[c];
  }
}

/// Numerically stable in-place softmax of row prefix [0, len).
template <typename Real>
void softmax_row(Real* x, int len) {
  Real mx = x[0];
  for (int i = 1; i < len; ++i) mx = x[i] > mx ? x[i] : mx;
  Real sum = 0;
  for (int i = 0; i < len; ++i) {
    x[i] = std::exp(x[i] - mx);
    sum += x[i];
  }
  const Real inv = Real(1) / sum;
  for (int i = 0; i < len; ++i) x[i] *= inv;
}

}  // namespace tempcondlm::kernels

#endif  // TEMPCONDLM_KERNELS_HPP
