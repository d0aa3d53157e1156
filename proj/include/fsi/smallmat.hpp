#pragma once
#include <array>
#include <cassert>
#include <cmath>
#include <cstddef>

// Small dense algebra for d in {2,3}, runtime dimension, fixed storage.
// Matrices are row-major with stride 3 regardless of d; row index = vector
// component ("i" in v^i,_k), column index = derivative direction.

namespace fsi {

struct Vec {
  std::array<double, 3> x{0.0, 0.0, 0.0};
  double& operator[](int i) { return x[size_t(i)]; }
  double operator[](int i) const { return x[size_t(i)]; }
};

inline Vec operator+(Vec a, const Vec& b) {
  for (int i = 0; i < 3; ++i) a.x[size_t(i)] += b.x[size_t(i)];
  return a;
}
inline Vec operator-(Vec a, const Vec& b) {
  for (int i = 0; i < 3; ++i) a.x[size_t(i)] -= b.x[size_t(i)];
  return a;
}
inline Vec operator*(double s, Vec a) {
  for (int i = 0; i < 3; ++i) a.x[size_t(i)] *= s;
  return a;
}
inline double dot(const Vec& a, const Vec& b, int d) {
  double s = 0;
  for (int i = 0; i < d; ++i) s += a[i] * b[i];
  return s;
}
inline double norm2(const Vec& a, int d) { return std::sqrt(dot(a, a, d)); }

struct Mat {
  std::array<double, 9> m{};
  double& operator()(int r, int c) { return m[size_t(3 * r + c)]; }
  double operator()(int r, int c) const { return m[size_t(3 * r + c)]; }
  static Mat identity(int d) {
    Mat I;
    for (int i = 0; i < d; ++i) I(i, i) = 1.0;
    return I;
  }
  static Mat zero() { return Mat{}; }
};

inline Mat operator+(Mat a, const Mat& b) {
  for (size_t i = 0; i < 9; ++i) a.m[i] += b.m[i];
  return a;
}
inline Mat operator-(Mat a, const Mat& b) {
  for (size_t i = 0; i < 9; ++i) a.m[i] -= b.m[i];
  return a;
}
inline Mat operator*(double s, Mat a) {
  for (size_t i = 0; i < 9; ++i) a.m[i] *= s;
  return a;
}

inline Mat matmul(const Mat& a, const Mat& b, int d) {
  Mat c;
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      double s = 0;
      for (int k = 0; k < d; ++k) s += a(i, k) * b(k, j);
      c(i, j) = s;
    }
  return c;
}

inline Vec matvec(const Mat& a, const Vec& v, int d) {
  Vec r;
  for (int i = 0; i < d; ++i) {
    double s = 0;
    for (int k = 0; k < d; ++k) s += a(i, k) * v[k];
    r[i] = s;
  }
  return r;
}

inline Mat transpose(const Mat& a, int d) {
  Mat t;
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) t(i, j) = a(j, i);
  return t;
}

inline double trace(const Mat& a, int d) {
  double s = 0;
  for (int i = 0; i < d; ++i) s += a(i, i);
  return s;
}

// tr(A B): contraction a^k_i b^i_k with row = upper index.
inline double trace_prod(const Mat& a, const Mat& b, int d) {
  double s = 0;
  for (int i = 0; i < d; ++i)
    for (int k = 0; k < d; ++k) s += a(i, k) * b(k, i);
  return s;
}

inline double det(const Mat& f, int d) {
  if (d == 2) return f(0, 0) * f(1, 1) - f(0, 1) * f(1, 0);
  return f(0, 0) * (f(1, 1) * f(2, 2) - f(1, 2) * f(2, 1)) -
         f(0, 1) * (f(1, 0) * f(2, 2) - f(1, 2) * f(2, 0)) +
         f(0, 2) * (f(1, 0) * f(2, 1) - f(1, 1) * f(2, 0));
}

// Adjugate: adj(F) F = det(F) I. This is the transposed cofactor matrix,
// i.e. the matrix "a" built from a configuration gradient F = grad(eta).
inline Mat adjugate(const Mat& f, int d) {
  Mat a;
  if (d == 2) {
    a(0, 0) = f(1, 1);
    a(0, 1) = -f(0, 1);
    a(1, 0) = -f(1, 0);
    a(1, 1) = f(0, 0);
    return a;
  }
  a(0, 0) = f(1, 1) * f(2, 2) - f(1, 2) * f(2, 1);
  a(0, 1) = f(0, 2) * f(2, 1) - f(0, 1) * f(2, 2);
  a(0, 2) = f(0, 1) * f(1, 2) - f(0, 2) * f(1, 1);
  a(1, 0) = f(1, 2) * f(2, 0) - f(1, 0) * f(2, 2);
  a(1, 1) = f(0, 0) * f(2, 2) - f(0, 2) * f(2, 0);
  a(1, 2) = f(0, 2) * f(1, 0) - f(0, 0) * f(1, 2);
  a(2, 0) = f(1, 0) * f(2, 1) - f(1, 1) * f(2, 0);
  a(2, 1) = f(0, 1) * f(2, 0) - f(0, 0) * f(2, 1);
  a(2, 2) = f(0, 0) * f(1, 1) - f(0, 1) * f(1, 0);
  return a;
}

// Directional derivative of the adjugate at F in direction E.
// d=2: adj is linear, d adj[E] = tr(E) I - E.
// d=3: from adj(F) = F^2 - tr(F) F + c2(F) I, c2 = ((trF)^2 - tr(F^2))/2.
inline Mat dadjugate(const Mat& f, const Mat& e, int d) {
  if (d == 2) {
    Mat r = (-1.0) * e;
    double t = trace(e, 2);
    r(0, 0) += t;
    r(1, 1) += t;
    return r;
  }
  Mat fe = matmul(f, e, 3), ef = matmul(e, f, 3);
  double trf = trace(f, 3), tre = trace(e, 3);
  double trfe = trace(fe, 3);
  Mat r = fe + ef - tre * f - trf * e;
  double c = trf * tre - trfe;
  r(0, 0) += c;
  r(1, 1) += c;
  r(2, 2) += c;
  return r;
}

inline double max_abs(const Mat& a, int d) {
  double m = 0;
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) m = std::max(m, std::fabs(a(i, j)));
  return m;
}

// ---------------------------------------------------------------------------
// Degree-3 truncated Taylor polynomials in t, scalar and matrix valued.
// Coefficient k stores the plain polynomial coefficient of t^k; the n-th
// derivative at t=0 is n! * c[n].

struct TaylorScalar {
  std::array<double, 4> c{};
};

inline TaylorScalar tmul(const TaylorScalar& a, const TaylorScalar& b) {
  TaylorScalar r;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; i + j < 4; ++j) r.c[size_t(i + j)] += a.c[size_t(i)] * b.c[size_t(j)];
  return r;
}
inline TaylorScalar tadd(TaylorScalar a, const TaylorScalar& b) {
  for (int i = 0; i < 4; ++i) a.c[size_t(i)] += b.c[size_t(i)];
  return a;
}

struct TaylorMat {
  std::array<Mat, 4> c{};
  Mat deriv(int n) const {  // n-th t-derivative at 0
    double f = 1;
    for (int k = 2; k <= n; ++k) f *= k;
    return f * c[size_t(n)];
  }
};

inline TaylorMat tmul(const TaylorMat& a, const TaylorMat& b, int d) {
  TaylorMat r;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; i + j < 4; ++j)
      r.c[size_t(i + j)] = r.c[size_t(i + j)] + matmul(a.c[size_t(i)], b.c[size_t(j)], d);
  return r;
}
inline TaylorMat tadd(TaylorMat a, const TaylorMat& b) {
  for (int i = 0; i < 4; ++i) a.c[size_t(i)] = a.c[size_t(i)] + b.c[size_t(i)];
  return a;
}
inline TaylorMat tscale(double s, TaylorMat a) {
  for (int i = 0; i < 4; ++i) a.c[size_t(i)] = s * a.c[size_t(i)];
  return a;
}
inline TaylorMat ttranspose(const TaylorMat& a, int d) {
  TaylorMat r;
  for (int i = 0; i < 4; ++i) r.c[size_t(i)] = transpose(a.c[size_t(i)], d);
  return r;
}
inline TaylorScalar ttrace(const TaylorMat& a, int d) {
  TaylorScalar r;
  for (int i = 0; i < 4; ++i) r.c[size_t(i)] = trace(a.c[size_t(i)], d);
  return r;
}
// tr(A(t) B(t)) truncated
inline TaylorScalar ttrace_prod(const TaylorMat& a, const TaylorMat& b, int d) {
  TaylorScalar r;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; i + j < 4; ++j)
      r.c[size_t(i + j)] += trace_prod(a.c[size_t(i)], b.c[size_t(j)], d);
  return r;
}

// adjugate of a matrix Taylor polynomial, truncated at degree 3
inline TaylorMat tadjugate(const TaylorMat& f, int d) {
  TaylorMat r;
  if (d == 2) {  // linear in F: apply entrywise
    for (int i = 0; i < 4; ++i) r.c[size_t(i)] = adjugate(f.c[size_t(i)], 2);
    return r;
  }
  // adj(F) = F^2 - tr(F) F + ((trF)^2 - tr(F^2))/2 I
  TaylorMat f2 = tmul(f, f, 3);
  TaylorScalar trf = ttrace(f, 3), trf2 = ttrace(f2, 3);
  TaylorScalar trf_sq = tmul(trf, trf);
  for (int k = 0; k < 4; ++k) {
    Mat m = f2.c[size_t(k)];
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        double s = 0;
        for (int q = 0; q <= k; ++q) s += trf.c[size_t(q)] * f.c[size_t(k - q)](i, j);
        m(i, j) -= s;
      }
    double c2k = 0.5 * (trf_sq.c[size_t(k)] - trf2.c[size_t(k)]);
    for (int i = 0; i < 3; ++i) m(i, i) += c2k;
    r.c[size_t(k)] = m;
  }
  return r;
}

// ---------------------------------------------------------------------------
// Fornberg weights: coefficients of the m-th derivative at x0 from samples at
// the given grid points; exact for polynomials up to degree npts-1.
// B. Fornberg, "Generation of finite difference formulas on arbitrarily
// spaced grids", Math. Comp. 51 (1988).
inline void fornberg_weights(double x0, const double* grid, int npts, int m,
                             double* w /* npts*(m+1), row k = k-th deriv */) {
  const int n = npts - 1;
  for (int i = 0; i < npts * (m + 1); ++i) w[i] = 0;
  auto W = [&](int k, int j) -> double& { return w[k * npts + j]; };
  double c1 = 1, c4 = grid[0] - x0;
  W(0, 0) = 1;
  for (int i = 1; i <= n; ++i) {
    int mn = std::min(i, m);
    double c2 = 1, c5 = c4;
    c4 = grid[i] - x0;
    for (int j = 0; j < i; ++j) {
      double c3 = grid[i] - grid[j];
      c2 *= c3;
      if (j == i - 1) {
        for (int k = mn; k >= 1; --k)
          W(k, i) = c1 * (k * W(k - 1, i - 1) - c5 * W(k, i - 1)) / c2;
        W(0, i) = -c1 * c5 * W(0, i - 1) / c2;
      }
      for (int k = mn; k >= 1; --k)
        W(k, j) = (c4 * W(k, j) - k * W(k - 1, j)) / c3;
      W(0, j) = c4 * W(0, j) / c3;
    }
    c1 = c2;
  }
}

}  // namespace fsi
