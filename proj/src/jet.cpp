#include "kropina/jet.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstring>

namespace kropina {

namespace {

constexpr double kDivFloor = 1e-14;

// Per-thread bump arena for kernel temporaries. Entry points reserve their
// worst case up front so pointers stay valid across the recursion.
class Scratch {
 public:
  static Scratch& get() {
    thread_local Scratch s;
    return s;
  }
  void ensure(size_t n) {
    if (buf_.size() < top_ + n) buf_.resize(top_ + n);
  }
  double* alloc(size_t n) {
    assert(top_ + n <= buf_.size());
    double* p = buf_.data() + top_;
    top_ += n;
    return p;
  }
  void release(size_t n) { top_ -= n; }

 private:
  std::vector<double> buf_;
  size_t top_ = 0;
};

inline void fill_zero(double* p, size_t n) { std::memset(p, 0, n * sizeof(double)); }

// c += a * b over a jet block with `rem` levels left. The last two levels are
// unrolled flat; the composition order keeps wide levels innermost, so the
// flat case covers most of the work.
void madd_rec(const int* w, const size_t* st, int rem, const double* a,
              const double* b, double* c) {
  if (rem == 0) {
    c[0] += a[0] * b[0];
    return;
  }
  if (rem == 1) {
    const int u = w[0];
    const double a0 = a[0], b0 = b[0];
    c[0] += a0 * b0;
    for (int i = 1; i <= u; ++i) c[i] += a0 * b[i] + a[i] * b0;
    return;
  }
  if (rem == 2) {
    const int u = w[0], v = w[1];
    const size_t sv = st[0];
    const double a0 = a[0], b0 = b[0];
    c[0] += a0 * b0;
    for (int j = 1; j <= v; ++j) c[j] += a0 * b[j] + a[j] * b0;
    for (int i = 1; i <= u; ++i) {
      const double* ai = a + i * sv;
      const double* bi = b + i * sv;
      double* ci = c + i * sv;
      const double ai0 = ai[0], bi0 = bi[0];
      ci[0] += a0 * bi0 + ai0 * b0;
      for (int j = 1; j <= v; ++j)
        ci[j] += a0 * bi[j] + ai[j] * b0 + ai0 * b[j] + a[j] * bi0;
    }
    return;
  }
  const int u = w[0];
  const size_t s = st[0];
  madd_rec(w + 1, st + 1, rem - 1, a, b, c);
  for (int i = 1; i <= u; ++i) {
    madd_rec(w + 1, st + 1, rem - 1, a, b + i * s, c + i * s);
    madd_rec(w + 1, st + 1, rem - 1, a + i * s, b, c + i * s);
  }
}

// c = a * b (c must not alias a or b)
void mul_rec(const int* w, const size_t* st, int rem, const double* a,
             const double* b, double* c) {
  const size_t sz = rem == 0 ? 1 : st[0] * (w[0] + 1);
  fill_zero(c, sz);
  madd_rec(w, st, rem, a, b, c);
}

void recip_rec(const int* w, const size_t* st, int rem, const double* b,
               double* r, Scratch& scratch) {
  if (rem == 0) {
    if (std::abs(b[0]) < kDivFloor)
      throw DomainError("division by value below 1e-14 in magnitude");
    r[0] = 1.0 / b[0];
    return;
  }
  recip_rec(w + 1, st + 1, rem - 1, b, r, scratch);
  const int u = w[0];
  const size_t s = st[0];
  double* t = scratch.alloc(s);
  mul_rec(w + 1, st + 1, rem - 1, r, r, t);
  for (int i = 1; i <= u; ++i) {
    mul_rec(w + 1, st + 1, rem - 1, t, b + i * s, r + i * s);
    for (size_t p = 0; p < s; ++p) r[i * s + p] = -r[i * s + p];
  }
  scratch.release(s);
}

using DerivFamily = double (*)(int, double);

// out = f^{(k)}(b) with the chain rule applied level by level.
void apply_rec(const int* w, const size_t* st, int rem, DerivFamily fam, int k,
               const double* b, double* out, Scratch& scratch) {
  if (rem == 0) {
    out[0] = fam(k, b[0]);
    return;
  }
  apply_rec(w + 1, st + 1, rem - 1, fam, k, b, out, scratch);
  const int u = w[0];
  const size_t s = st[0];
  double* g = scratch.alloc(s);
  apply_rec(w + 1, st + 1, rem - 1, fam, k + 1, b, g, scratch);
  for (int i = 1; i <= u; ++i)
    mul_rec(w + 1, st + 1, rem - 1, g, b + i * s, out + i * s);
  scratch.release(s);
}

double sqrt_family(int k, double x) {
  if (k == 0) return std::sqrt(x);
  double coeff = 1.0;
  for (int j = 0; j < k; ++j) coeff *= 0.5 - j;
  return coeff * std::pow(x, 0.5 - k);
}

double exp_family(int k, double x) {
  (void)k;
  return std::exp(x);
}

double sin_family(int k, double x) {
  switch (k & 3) {
    case 0: return std::sin(x);
    case 1: return std::cos(x);
    case 2: return -std::sin(x);
    default: return -std::cos(x);
  }
}

double cos_family(int k, double x) { return sin_family(k + 1, x); }

void check_same_shape(const Jet& a, const Jet& b) {
  if (a.shape() != b.shape())
    throw std::logic_error("jet arithmetic across different shapes");
}

Jet apply_jet(const Jet& a, DerivFamily fam) {
  const JetShape& s = *a.shape();
  Jet out(a.shape());
  Scratch& scratch = Scratch::get();
  scratch.ensure(2 * s.size() + 16);
  apply_rec(s.widths_raw(), s.strides_raw(), s.levels(), fam, 0,
            a.data().data(), out.data_mut().data(), scratch);
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// JetShape

ShapePtr JetShape::make(std::vector<int> widths) {
  auto s = std::make_shared<JetShape>();
  s->width_ = std::move(widths);
  const int L = static_cast<int>(s->width_.size());
  s->stride_.assign(L, 1);
  size_t sz = 1;
  for (int l = L - 1; l >= 0; --l) {
    s->stride_[l] = sz;
    sz *= static_cast<size_t>(s->width_[l] + 1);
  }
  s->size_ = sz;
  return s;
}

const ShapePtr& JetShape::scalar() {
  static const ShapePtr s = JetShape::make({});
  return s;
}

// ---------------------------------------------------------------------------
// Jet

double Jet::partial(std::span<const int> slots) const {
  const JetShape& s = *shape_;
  if (static_cast<int>(slots.size()) > s.levels())
    throw std::out_of_range("more derivative slots than levels");
  size_t off = 0;
  for (size_t l = 0; l < slots.size(); ++l) {
    if (slots[l] < 0) continue;
    if (slots[l] >= s.width(static_cast<int>(l)))
      throw std::out_of_range("derivative slot out of range");
    off += static_cast<size_t>(slots[l] + 1) * s.stride(static_cast<int>(l));
  }
  return data_[off];
}

Jet& Jet::operator+=(const Jet& rhs) {
  check_same_shape(*this, rhs);
  for (size_t i = 0; i < data_.size(); ++i) data_[i] += rhs.data_[i];
  return *this;
}

Jet& Jet::operator-=(const Jet& rhs) {
  check_same_shape(*this, rhs);
  for (size_t i = 0; i < data_.size(); ++i) data_[i] -= rhs.data_[i];
  return *this;
}

Jet& Jet::operator*=(double s) {
  for (double& v : data_) v *= s;
  return *this;
}

Jet operator+(const Jet& a, const Jet& b) {
  Jet c = a;
  c += b;
  return c;
}

Jet operator-(const Jet& a, const Jet& b) {
  Jet c = a;
  c -= b;
  return c;
}

Jet operator*(const Jet& a, const Jet& b) {
  check_same_shape(a, b);
  const JetShape& s = *a.shape_;
  Jet c(a.shape_);
  madd_rec(s.widths_raw(), s.strides_raw(), s.levels(), a.data_.data(),
           b.data_.data(), c.data_.data());
  return c;
}

Jet operator-(const Jet& a) {
  Jet c = a;
  for (double& v : c.data_) v = -v;
  return c;
}

Jet operator+(const Jet& a, double s) {
  Jet c = a;
  c.data_[0] += s;
  return c;
}

Jet operator-(double s, const Jet& a) {
  Jet c = -a;
  c.data_[0] += s;
  return c;
}

Jet operator*(const Jet& a, double s) {
  Jet c = a;
  c *= s;
  return c;
}

Jet operator/(const Jet& a, double s) {
  if (std::abs(s) < 1e-14)
    throw DomainError("division by value below 1e-14 in magnitude");
  return a * (1.0 / s);
}

Jet operator/(double s, const Jet& a) {
  const JetShape& sh = *a.shape_;
  Jet r(a.shape_);
  Scratch& scratch = Scratch::get();
  scratch.ensure(2 * sh.size() + 16);
  recip_rec(sh.widths_raw(), sh.strides_raw(), sh.levels(), a.data_.data(),
            r.data_.data(), scratch);
  if (s != 1.0) r *= s;
  return r;
}

Jet operator/(const Jet& a, const Jet& b) {
  check_same_shape(a, b);
  return a * (1.0 / b);
}

Jet sqrt(const Jet& a) {
  const double floor = a.shape_->levels() > 0 ? kDivFloor : 0.0;
  if (a.val() < floor)
    throw DomainError("sqrt argument outside the guarded domain");
  return apply_jet(a, &sqrt_family);
}

Jet exp(const Jet& a) { return apply_jet(a, &exp_family); }
Jet sin(const Jet& a) { return apply_jet(a, &sin_family); }
Jet cos(const Jet& a) { return apply_jet(a, &cos_family); }

Jet pow_int(const Jet& a, int m) {
  if (m < 0) return 1.0 / pow_int(a, -m);
  if (m == 0) return Jet(a.shape_, 1.0);
  // binary exponentiation; `result` collects set bits of m
  Jet result(a.shape_, 1.0);
  Jet sq = a;
  bool first = true;
  int mm = m;
  while (mm > 0) {
    if (mm & 1) {
      result = first ? sq : result * sq;
      first = false;
    }
    mm >>= 1;
    if (mm > 0) sq = sq * sq;
  }
  return result;
}

// ---------------------------------------------------------------------------
// Deriver

Deriver::Deriver(ShapePtr base, int levels, int nvars)
    : base_(std::move(base)), k_(levels), nvars_(nvars) {
  if (levels < 1 || nvars < 1)
    throw std::logic_error("Deriver needs at least one level and one slot");
  std::vector<int> widths(base_->levels() + levels);
  for (int l = 0; l < base_->levels(); ++l) widths[l] = base_->width(l);
  for (int t = 0; t < levels; ++t) widths[base_->levels() + t] = nvars;
  ext_ = JetShape::make(std::move(widths));
  new_block_ = 1;
  for (int t = 0; t < levels; ++t) new_block_ *= static_cast<size_t>(nvars + 1);
}

Jet Deriver::lift(const Jet& v, int var) const {
  if (v.shape() != base_)
    throw std::logic_error("lift of a jet with the wrong base shape");
  Jet out(ext_);
  auto dst = out.data_mut();
  auto src = v.data();
  for (size_t i = 0; i < src.size(); ++i) dst[i * new_block_] = src[i];
  if (var >= 0) {
    if (var >= nvars_) throw std::out_of_range("lift slot out of range");
    const int bl = base_->levels();
    for (int t = 0; t < k_; ++t)
      dst[static_cast<size_t>(var + 1) * ext_->stride(bl + t)] = 1.0;
  }
  return out;
}

Jet Deriver::lift(double v, int var) const {
  if (base_->levels() != 0)
    throw std::logic_error("scalar lift onto a non-scalar base shape");
  Jet b(base_, v);
  return lift(b, var);
}

Jet Deriver::extract(const Jet& e, std::span<const int> vars) const {
  if (e.shape() != ext_)
    throw std::logic_error("extract from a jet with the wrong shape");
  if (static_cast<int>(vars.size()) > k_)
    throw std::out_of_range("more derivative slots than appended levels");
  const int bl = base_->levels();
  size_t off = 0;
  for (size_t t = 0; t < vars.size(); ++t) {
    if (vars[t] < 0 || vars[t] >= nvars_)
      throw std::out_of_range("extract slot out of range");
    off += static_cast<size_t>(vars[t] + 1) * ext_->stride(bl + static_cast<int>(t));
  }
  Jet out(base_);
  auto dst = out.data_mut();
  auto src = e.data();
  for (size_t i = 0; i < dst.size(); ++i) dst[i] = src[i * new_block_ + off];
  return out;
}

// ---------------------------------------------------------------------------
// Point-level API

std::vector<Jet> seed(std::span<const double> values, std::span<const int> which) {
  const int n = static_cast<int>(values.size());
  ShapePtr shape = JetShape::make({n});
  std::vector<Jet> out;
  out.reserve(values.size());
  for (int i = 0; i < n; ++i) out.emplace_back(shape, values[i]);
  for (int w : which) {
    if (w < 0 || w >= n) throw std::out_of_range("seed index out of range");
    out[w].data_mut()[w + 1] = 1.0;
  }
  return out;
}

double derive(const std::function<Jet(std::span<const Jet>)>& f,
              std::span<const double> x, std::span<const int> multi_index) {
  const int order = static_cast<int>(multi_index.size());
  if (order > kMaxDeriveOrder)
    throw DomainError("derivative order exceeds the supported nesting depth");
  const int n = static_cast<int>(x.size());
  for (int idx : multi_index)
    if (idx < 0 || idx >= n) throw std::out_of_range("variable index out of range");
  if (order == 0) {
    std::vector<Jet> args;
    args.reserve(x.size());
    for (double v : x) args.emplace_back(JetShape::scalar(), v);
    return f(args).val();
  }
  Deriver d(JetShape::scalar(), order, n);
  std::vector<Jet> args;
  args.reserve(x.size());
  for (int i = 0; i < n; ++i) args.push_back(d.lift(x[i], i));
  Jet r = f(args);
  double value = r.partial(multi_index);
  if (!std::isfinite(value))
    throw DomainError("non-finite derivative value");
  return value;
}

Matrix<double> hessian(const std::function<Jet(std::span<const Jet>)>& f,
                       std::span<const double> x, std::span<const int> block) {
  const int n = static_cast<int>(x.size());
  for (int idx : block)
    if (idx < 0 || idx >= n) throw std::out_of_range("variable index out of range");
  Deriver d(JetShape::scalar(), 2, n);
  std::vector<Jet> args;
  args.reserve(x.size());
  for (int i = 0; i < n; ++i) args.push_back(d.lift(x[i], i));
  Jet r = f(args);
  const int m = static_cast<int>(block.size());
  Matrix<double> h(m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) {
      const double hij = r.partial({block[i], block[j]});
      const double hji = r.partial({block[j], block[i]});
      h(i, j) = 0.5 * (hij + hji);
      if (!std::isfinite(h(i, j)))
        throw DomainError("non-finite second-derivative entry");
    }
  return h;
}

}  // namespace kropina
