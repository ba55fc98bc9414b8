#pragma once

// Small dense symmetric matrices (size <= 6) and the generalized symmetric
// eigenproblem A x = lambda G x, solved by whitening with G^{-1/2} followed by
// cyclic Jacobi rotations. Deterministic: no pivoting heuristics depend on
// anything but the input values.

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "formflow/errors.hpp"

namespace formflow {

inline constexpr int kMaxSmall = 6;

struct SmallMatrix {
  int n = 0;
  std::array<double, kMaxSmall * kMaxSmall> a{};

  SmallMatrix() = default;
  explicit SmallMatrix(int size) : n(size) {
    if (size < 1 || size > kMaxSmall) throw ArgumentError("SmallMatrix: unsupported size");
  }
  static SmallMatrix identity(int size) {
    SmallMatrix m(size);
    for (int i = 0; i < size; ++i) m(i, i) = 1.0;
    return m;
  }

  double& operator()(int i, int j) { return a[i * kMaxSmall + j]; }
  double operator()(int i, int j) const { return a[i * kMaxSmall + j]; }

  double frobenius() const {
    double s = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) s += (*this)(i, j) * (*this)(i, j);
    return std::sqrt(s);
  }
};

inline SmallMatrix multiply(const SmallMatrix& x, const SmallMatrix& y) {
  SmallMatrix r(x.n);
  for (int i = 0; i < x.n; ++i)
    for (int j = 0; j < x.n; ++j) {
      double s = 0.0;
      for (int k = 0; k < x.n; ++k) s += x(i, k) * y(k, j);
      r(i, j) = s;
    }
  return r;
}

struct EigenDecomposition {
  int n = 0;
  std::array<double, kMaxSmall> values{};  // ascending
  SmallMatrix vectors;                     // column j pairs with values[j]
  int sweeps = 0;
};

inline constexpr double kJacobiTolerance = 1e-12;
inline constexpr int kJacobiMaxSweeps = 50;

/// Cyclic Jacobi eigensolver for a symmetric matrix (upper triangle is
/// mirrored first). Throws NumericalError if the off-diagonal mass does not
/// fall below tolerance * ||A||_F within the sweep limit.
inline EigenDecomposition jacobi_eigen(SmallMatrix m) {
  const int n = m.n;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) m(j, i) = m(i, j);
  SmallMatrix v = SmallMatrix::identity(n);
  const double scale = m.frobenius();
  const double target = kJacobiTolerance * (scale > 0.0 ? scale : 1.0);

  auto off_norm = [&] {
    double s = 0.0;
    for (int p = 0; p < n; ++p)
      for (int q = p + 1; q < n; ++q) s += 2.0 * m(p, q) * m(p, q);
    return std::sqrt(s);
  };

  int sweep = 0;
  for (; sweep <= kJacobiMaxSweeps; ++sweep) {
    if (off_norm() <= target) break;
    if (sweep == kJacobiMaxSweeps) {
      throw NumericalError("jacobi_eigen: no convergence after " +
                           std::to_string(kJacobiMaxSweeps) + " sweeps");
    }
    for (int p = 0; p < n; ++p) {
      for (int q = p + 1; q < n; ++q) {
        const double apq = m(p, q);
        if (apq == 0.0) continue;
        const double theta = (m(q, q) - m(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        const double tau = s / (1.0 + c);
        m(p, p) -= t * apq;
        m(q, q) += t * apq;
        m(p, q) = m(q, p) = 0.0;
        for (int r = 0; r < n; ++r) {
          if (r == p || r == q) continue;
          const double g = m(r, p);
          const double h = m(r, q);
          m(r, p) = m(p, r) = g - s * (h + g * tau);
          m(r, q) = m(q, r) = h + s * (g - h * tau);
        }
        for (int r = 0; r < n; ++r) {
          const double g = v(r, p);
          const double h = v(r, q);
          v(r, p) = g - s * (h + g * tau);
          v(r, q) = h + s * (g - h * tau);
        }
      }
    }
  }

  EigenDecomposition out;
  out.n = n;
  out.sweeps = sweep;
  std::array<int, kMaxSmall> order{};
  for (int i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.begin() + n, [&](int x, int y) { return m(x, x) < m(y, y); });
  out.vectors = SmallMatrix(n);
  for (int j = 0; j < n; ++j) {
    out.values[j] = m(order[j], order[j]);
    for (int r = 0; r < n; ++r) out.vectors(r, j) = v(r, order[j]);
  }
  return out;
}

/// Generalized symmetric eigenproblem A x = lambda G x with G SPD.
/// Eigenvectors are G-orthonormal.
inline EigenDecomposition sym_eigensolve(const SmallMatrix& A, const SmallMatrix& G) {
  if (A.n != G.n) throw ArgumentError("sym_eigensolve: size mismatch");
  const int n = A.n;
  const EigenDecomposition ge = jacobi_eigen(G);
  const double gmax = std::max(std::abs(ge.values[0]), std::abs(ge.values[n - 1]));
  if (!(ge.values[0] > 1e-14 * gmax) || !(gmax > 0.0)) {
    throw NumericalError("sym_eigensolve: Gram matrix is not positive definite");
  }
  SmallMatrix w(n);  // G^{-1/2}
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      double s = 0.0;
      for (int k = 0; k < n; ++k) s += ge.vectors(i, k) * ge.vectors(j, k) / std::sqrt(ge.values[k]);
      w(i, j) = w(j, i) = s;
    }
  SmallMatrix c = multiply(multiply(w, A), w);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) c(i, j) = c(j, i) = 0.5 * (c(i, j) + c(j, i));
  EigenDecomposition ce = jacobi_eigen(c);
  ce.vectors = multiply(w, ce.vectors);
  return ce;
}

/// Eigenvalues only, ascending.
inline std::array<double, kMaxSmall> sym_eigenvalues(const SmallMatrix& A, const SmallMatrix& G) {
  return sym_eigensolve(A, G).values;
}

/// Cholesky-based inverse and determinant of a small SPD matrix.
/// Returns false if the factorization breaks down.
inline bool spd_inverse(const SmallMatrix& m, SmallMatrix& inv, double& det) {
  const int n = m.n;
  SmallMatrix l(n);
  for (int j = 0; j < n; ++j) {
    double d = m(j, j);
    for (int k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
    if (!(d > 0.0)) return false;
    l(j, j) = std::sqrt(d);
    for (int i = j + 1; i < n; ++i) {
      double s = m(i, j);
      for (int k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
      l(i, j) = s / l(j, j);
    }
  }
  det = 1.0;
  for (int i = 0; i < n; ++i) det *= l(i, i) * l(i, i);
  // L^{-1}
  SmallMatrix li(n);
  for (int i = 0; i < n; ++i) {
    li(i, i) = 1.0 / l(i, i);
    for (int j = 0; j < i; ++j) {
      double s = 0.0;
      for (int k = j; k < i; ++k) s -= l(i, k) * li(k, j);
      li(i, j) = s / l(i, i);
    }
  }
  inv = SmallMatrix(n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      double s = 0.0;
      for (int k = j; k < n; ++k) s += li(k, i) * li(k, j);
      inv(i, j) = inv(j, i) = s;
    }
  return true;
}

}  // namespace formflow
