// Nested forward-mode differentiation on flat buffers.
//
// A Jet carries a value together with mixed partial derivatives taken along a
// stack of differentiation levels. Each level holds first derivatives with
// respect to a fixed set of slots; stacking levels yields mixed derivatives of
// higher order (two levels seeded with the same variable give its second
// derivative, and so on). This is the classic nested-dual construction, except
// the whole tree is flattened into one contiguous buffer so that arithmetic
// runs as strided loops instead of pointer chasing.
//
// Layout: a jet block at level l consists of its value block followed by one
// derivative block per slot, each block being a full jet of the remaining
// levels. Hence data()[0] is always the plain value, and the mixed partial
// with respect to slot s_l at every level l lives at offset
// sum_l (s_l + 1) * stride(l).
//
// The curvature pipeline composes these through Deriver: an evaluation that
// needs derivatives of a sub-evaluation appends fresh levels, lifts its
// inputs, runs the sub-evaluation on the extended shape, and extracts the
// partials it needs back at its own shape. Appended levels are innermost so
// that deep evaluations keep wide contiguous blocks for the kernels.

#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "kropina/tensor.hpp"

namespace kropina {

// Raised when evaluation leaves the guarded numeric domain (division or
// root with near-zero argument, value outside a declared guard, ...).
class DomainError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Highest mixed-derivative order the runtime dispatch supports. The curvature
// pipeline composes six levels (two for the curvature tensor, two for the
// curvature operator, two for the spray), so the cap sits there; raise it if
// an audit ever needs deeper probes.
inline constexpr int kMaxDeriveOrder = 6;

class JetShape;
using ShapePtr = std::shared_ptr<const JetShape>;

class JetShape {
 public:
  static ShapePtr make(std::vector<int> widths);
  static const ShapePtr& scalar();  // zero levels, size 1

  int levels() const { return static_cast<int>(width_.size()); }
  int width(int level) const { return width_[level]; }
  // Size of one derivative block at `level` (= total size of deeper levels).
  size_t stride(int level) const { return stride_[level]; }
  size_t size() const { return size_; }
  const int* widths_raw() const { return width_.data(); }
  const size_t* strides_raw() const { return stride_.data(); }

 private:
  std::vector<int> width_;
  std::vector<size_t> stride_;
  size_t size_ = 1;
};

class Jet {
 public:
  Jet() : shape_(JetShape::scalar()), data_(1, 0.0) {}
  explicit Jet(ShapePtr shape)
      : shape_(std::move(shape)), data_(shape_->size(), 0.0) {}
  Jet(ShapePtr shape, double value)
      : shape_(std::move(shape)), data_(shape_->size(), 0.0) {
    data_[0] = value;
  }

  static Jet constant(const Jet& like, double value) {
    return Jet(like.shape_, value);
  }

  double val() const { return data_[0]; }
  const ShapePtr& shape() const { return shape_; }
  std::span<const double> data() const { return data_; }
  std::span<double> data_mut() { return data_; }

  // Mixed partial with one slot per level; slot -1 keeps the value path.
  double partial(std::span<const int> slots) const;
  double partial(std::initializer_list<int> slots) const {
    return partial(std::span<const int>(slots.begin(), slots.size()));
  }

  Jet& operator+=(const Jet& rhs);
  Jet& operator-=(const Jet& rhs);
  Jet& operator*=(double s);
  Jet& operator+=(double s) {
    data_[0] += s;
    return *this;
  }
  Jet& operator-=(double s) {
    data_[0] -= s;
    return *this;
  }

  friend Jet operator+(const Jet& a, const Jet& b);
  friend Jet operator-(const Jet& a, const Jet& b);
  friend Jet operator*(const Jet& a, const Jet& b);
  friend Jet operator/(const Jet& a, const Jet& b);
  friend Jet operator-(const Jet& a);
  friend Jet operator+(const Jet& a, double s);
  friend Jet operator+(double s, const Jet& a) { return a + s; }
  friend Jet operator-(const Jet& a, double s) { return a + (-s); }
  friend Jet operator-(double s, const Jet& a);
  friend Jet operator*(const Jet& a, double s);
  friend Jet operator*(double s, const Jet& a) { return a * s; }
  friend Jet operator/(const Jet& a, double s);
  friend Jet operator/(double s, const Jet& a);

  friend Jet sqrt(const Jet& a);
  friend Jet exp(const Jet& a);
  friend Jet sin(const Jet& a);
  friend Jet cos(const Jet& a);
  friend Jet pow_int(const Jet& a, int m);

 private:
  ShapePtr shape_;
  std::vector<double> data_;
};

// Appends `levels` fresh differentiation levels (each with `nvars` slots) to a
// base shape, lifts inputs onto the extended shape, and extracts partials with
// respect to the new levels back as base-shape jets.
class Deriver {
 public:
  Deriver(ShapePtr base, int levels, int nvars);

  const ShapePtr& extended() const { return ext_; }
  int levels() const { return k_; }
  int nvars() const { return nvars_; }

  // var in [0, nvars) seeds that slot on every new level; var -1 lifts a
  // constant (no seeds).
  Jet lift(const Jet& v, int var) const;
  Jet lift(double v, int var) const;

  // Partial of an extended jet with respect to the listed slots, one per new
  // level starting from the first; missing trailing entries mean "no
  // derivative at that level". Returns a base-shape jet.
  Jet extract(const Jet& e, std::span<const int> vars) const;
  Jet extract(const Jet& e, std::initializer_list<int> vars) const {
    return extract(e, std::span<const int>(vars.begin(), vars.size()));
  }
  Jet value(const Jet& e) const { return extract(e, {}); }

 private:
  ShapePtr base_;
  ShapePtr ext_;
  int k_;
  int nvars_;
  size_t new_block_;  // total size of the appended levels
};

// ---------------------------------------------------------------------------
// Point-level API

// Lifts plain values to one-level jets with unit derivative seeds on the
// selected variables and zero seeds elsewhere.
std::vector<Jet> seed(std::span<const double> values, std::span<const int> which);

// Mixed partial derivative of f at x in the order given by multi_index.
// Index order is immaterial for smooth f.
double derive(const std::function<Jet(std::span<const Jet>)>& f,
              std::span<const double> x, std::span<const int> multi_index);

// Second-derivative matrix of f over the block variables, symmetrized by
// averaging the two mixed orders.
Matrix<double> hessian(const std::function<Jet(std::span<const Jet>)>& f,
                       std::span<const double> x, std::span<const int> block);

}  // namespace kropina
