#pragma once

/// Small dense vector/matrix helpers shared by the solvers. Problems here
/// are tiny (tens to a few hundred dimensions), so everything is plain
/// contiguous storage and O(n^2)/O(n^3) loops.

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace rcg {

using Vec = std::vector<double>;

namespace detail {

inline double dot(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm2(const Vec& a) { return std::sqrt(dot(a, a)); }

inline double max_abs_diff(const Vec& a, const Vec& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

inline double dist2(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return std::sqrt(s);
}

inline bool all_finite(const Vec& a) {
  for (double v : a)
    if (!std::isfinite(v)) return false;
  return true;
}

/// Row-major dense matrix.
struct Mat {
  std::size_t rows = 0, cols = 0;
  Vec a;

  Mat() = default;
  Mat(std::size_t r, std::size_t c) : rows(r), cols(c), a(r * c, 0.0) {}

  double& operator()(std::size_t r, std::size_t c) { return a[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return a[r * cols + c]; }
  double* row(std::size_t r) { return a.data() + r * cols; }
  const double* row(std::size_t r) const { return a.data() + r * cols; }
};

/// Solves A x = b by Gaussian elimination with partial pivoting.
/// Returns false when A is singular to working precision.
inline bool gauss_solve(Mat A, Vec b, Vec& x, double pivot_tol = 1e-12) {
  const std::size_t n = A.rows;
  if (A.cols != n || b.size() != n) throw std::invalid_argument("gauss_solve: shape mismatch");
  std::vector<std::size_t> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = i;
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t p = k;
    double best = std::abs(A(k, k));
    for (std::size_t r = k + 1; r < n; ++r) {
      const double v = std::abs(A(r, k));
      if (v > best) {
        best = v;
        p = r;
      }
    }
    if (best <= pivot_tol) return false;
    if (p != k) {
      for (std::size_t c = 0; c < n; ++c) std::swap(A(k, c), A(p, c));
      std::swap(b[k], b[p]);
    }
    const double piv = A(k, k);
    for (std::size_t r = k + 1; r < n; ++r) {
      const double f = A(r, k) / piv;
      if (f == 0.0) continue;
      for (std::size_t c = k; c < n; ++c) A(r, c) -= f * A(k, c);
      b[r] -= f * b[k];
    }
  }
  x.assign(n, 0.0);
  for (std::size_t ri = n; ri-- > 0;) {
    double s = b[ri];
    for (std::size_t c = ri + 1; c < n; ++c) s -= A(ri, c) * x[c];
    x[ri] = s / A(ri, ri);
  }
  return true;
}

/// Inverts A in place into `inv` by Gauss-Jordan with partial pivoting.
inline bool invert(Mat A, Mat& inv, double pivot_tol = 1e-12) {
  const std::size_t n = A.rows;
  if (A.cols != n) throw std::invalid_argument("invert: matrix not square");
  inv = Mat(n, n);
  for (std::size_t i = 0; i < n; ++i) inv(i, i) = 1.0;
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t p = k;
    double best = std::abs(A(k, k));
    for (std::size_t r = k + 1; r < n; ++r) {
      const double v = std::abs(A(r, k));
      if (v > best) {
        best = v;
        p = r;
      }
    }
    if (best <= pivot_tol) return false;
    if (p != k) {
      for (std::size_t c = 0; c < n; ++c) {
        std::swap(A(k, c), A(p, c));
        std::swap(inv(k, c), inv(p, c));
      }
    }
    const double piv = A(k, k);
    for (std::size_t c = 0; c < n; ++c) {
      A(k, c) /= piv;
      inv(k, c) /= piv;
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (r == k) continue;
      const double f = A(r, k);
      if (f == 0.0) continue;
      for (std::size_t c = 0; c < n; ++c) {
        A(r, c) -= f * A(k, c);
        inv(r, c) -= f * inv(k, c);
      }
    }
  }
  return true;
}

}  // namespace detail
}  // namespace rcg
