// Small dense tensor containers for pointwise curvature algebra.
//
// Everything in this project is desk-scale (n <= 6), so tensors are plain
// row-major vectors with index arithmetic. No expression templates, no views.

#pragma once

#include <cassert>
#include <cstddef>
#include <vector>

namespace kropina {

template <class T>
class Matrix {
 public:
  Matrix() : n_(0) {}
  explicit Matrix(int n) : n_(n), v_(static_cast<size_t>(n) * n) {}
  Matrix(int n, const T& fill) : n_(n), v_(static_cast<size_t>(n) * n, fill) {}

  int dim() const { return n_; }
  T& operator()(int i, int j) { return v_[static_cast<size_t>(i) * n_ + j]; }
  const T& operator()(int i, int j) const {
    return v_[static_cast<size_t>(i) * n_ + j];
  }
  std::vector<T>& flat() { return v_; }
  const std::vector<T>& flat() const { return v_; }

 private:
  int n_;
  std::vector<T> v_;
};

template <class T>
class Ten3 {
 public:
  Ten3() : n_(0) {}
  explicit Ten3(int n)
      : n_(n), v_(static_cast<size_t>(n) * n * n) {}
  Ten3(int n, const T& fill)
      : n_(n), v_(static_cast<size_t>(n) * n * n, fill) {}

  int dim() const { return n_; }
  T& operator()(int i, int j, int k) {
    return v_[(static_cast<size_t>(i) * n_ + j) * n_ + k];
  }
  const T& operator()(int i, int j, int k) const {
    return v_[(static_cast<size_t>(i) * n_ + j) * n_ + k];
  }

 private:
  int n_;
  std::vector<T> v_;
};

template <class T>
class Ten4 {
 public:
  Ten4() : n_(0) {}
  explicit Ten4(int n)
      : n_(n), v_(static_cast<size_t>(n) * n * n * n) {}
  Ten4(int n, const T& fill)
      : n_(n), v_(static_cast<size_t>(n) * n * n * n, fill) {}

  int dim() const { return n_; }
  T& operator()(int i, int j, int k, int l) {
    return v_[((static_cast<size_t>(i) * n_ + j) * n_ + k) * n_ + l];
  }
  const T& operator()(int i, int j, int k, int l) const {
    return v_[((static_cast<size_t>(i) * n_ + j) * n_ + k) * n_ + l];
  }

 private:
  int n_;
  std::vector<T> v_;
};

}  // namespace kropina
