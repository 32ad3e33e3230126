// LU-based solve/inverse/determinant on small dense matrices, generic over the
// scalar type so the same code runs on plain doubles and on jets (pivoting
// compares value slots only).

#pragma once

#include <cmath>
#include <vector>

#include "kropina/jet.hpp"
#include "kropina/tensor.hpp"

namespace kropina {

inline double scalar_value(double x) { return x; }
inline double scalar_value(const Jet& x) { return x.val(); }

template <class T>
struct LuFactor {
  Matrix<T> lu;
  std::vector<int> perm;
  int sign = 1;
};

template <class T>
LuFactor<T> lu_factor(Matrix<T> a, double pivot_floor = 1e-12) {
  const int n = a.dim();
  LuFactor<T> f{std::move(a), std::vector<int>(n), 1};
  for (int i = 0; i < n; ++i) f.perm[i] = i;
  for (int col = 0; col < n; ++col) {
    int piv = col;
    double best = std::abs(scalar_value(f.lu(col, col)));
    for (int r = col + 1; r < n; ++r) {
      const double cand = std::abs(scalar_value(f.lu(r, col)));
      if (cand > best) {
        best = cand;
        piv = r;
      }
    }
    if (best < pivot_floor) throw DomainError("singular matrix (pivot below 1e-12)");
    if (piv != col) {
      for (int j = 0; j < n; ++j) std::swap(f.lu(piv, j), f.lu(col, j));
      std::swap(f.perm[piv], f.perm[col]);
      f.sign = -f.sign;
    }
    for (int r = col + 1; r < n; ++r) {
      T factor = f.lu(r, col) / f.lu(col, col);
      f.lu(r, col) = factor;
      for (int j = col + 1; j < n; ++j)
        f.lu(r, j) -= factor * f.lu(col, j);
    }
  }
  return f;
}

template <class T>
std::vector<T> lu_solve(const LuFactor<T>& f, const std::vector<T>& rhs) {
  const int n = f.lu.dim();
  std::vector<T> x(n);
  for (int i = 0; i < n; ++i) x[i] = rhs[f.perm[i]];
  for (int i = 1; i < n; ++i)
    for (int j = 0; j < i; ++j) x[i] -= f.lu(i, j) * x[j];
  for (int i = n - 1; i >= 0; --i) {
    for (int j = i + 1; j < n; ++j) x[i] -= f.lu(i, j) * x[j];
    x[i] = x[i] / f.lu(i, i);
  }
  return x;
}

template <class T>
T lu_det(const LuFactor<T>& f) {
  const int n = f.lu.dim();
  T d = f.lu(0, 0);
  for (int i = 1; i < n; ++i) d = d * f.lu(i, i);
  if (f.sign < 0) d = -d;
  return d;
}

template <class T>
Matrix<T> lu_inverse(const LuFactor<T>& f, const T& zero, const T& one) {
  const int n = f.lu.dim();
  Matrix<T> inv(n, zero);
  std::vector<T> e(n, zero);
  for (int c = 0; c < n; ++c) {
    for (int i = 0; i < n; ++i) e[i] = zero;
    e[c] = one;
    std::vector<T> col = lu_solve(f, e);
    for (int i = 0; i < n; ++i) inv(i, c) = col[i];
  }
  return inv;
}

inline Matrix<double> inverse(const Matrix<double>& a) {
  return lu_inverse(lu_factor(a), 0.0, 1.0);
}

inline Matrix<Jet> inverse(const Matrix<Jet>& a) {
  const Jet& probe = a(0, 0);
  return lu_inverse(lu_factor(a), Jet::constant(probe, 0.0),
                    Jet::constant(probe, 1.0));
}

// Cholesky-style positive definiteness probe; returns false instead of
// throwing so callers can turn it into their own diagnostics.
inline bool is_spd(const Matrix<double>& a, double floor = 1e-12) {
  const int n = a.dim();
  Matrix<double> l(n, 0.0);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j <= i; ++j) {
      double sum = a(i, j);
      for (int k = 0; k < j; ++k) sum -= l(i, k) * l(j, k);
      if (i == j) {
        if (sum < floor) return false;
        l(i, i) = std::sqrt(sum);
      } else {
        l(i, j) = sum / l(j, j);
      }
    }
  }
  return true;
}

}  // namespace kropina
