#include "lagq/jet.hpp"

#include <cmath>
#include <mutex>
#include <stdexcept>
#include <unordered_map>

namespace lagq {

namespace {

// Per-(dim, order) table of in-range hypercube cells and their total degree.
struct CellTable {
  std::vector<int> degree;      // degree per flat cell; -1 for cells past the order
  std::vector<int> valid;       // flat indices with degree <= order
  int size = 0;
};

const CellTable& cell_table(int dim, int order) {
  static std::mutex mu;
  static std::unordered_map<int, CellTable> cache;
  std::lock_guard<std::mutex> lock(mu);
  const int key = dim * 64 + order;
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;

  CellTable t;
  const int stride = order + 1;
  int size = 1;
  for (int d = 0; d < dim; ++d) size *= stride;
  t.size = size;
  t.degree.assign(size, -1);
  for (int idx = 0; idx < size; ++idx) {
    int rem = idx, total = 0;
    for (int d = 0; d < dim; ++d) {
      total += rem % stride;
      rem /= stride;
    }
    if (total <= order) {
      t.degree[idx] = total;
      t.valid.push_back(idx);
    }
  }
  return cache.emplace(key, std::move(t)).first->second;
}

double factorial(int n) {
  double r = 1.0;
  for (int i = 2; i <= n; ++i) r *= i;
  return r;
}

}  // namespace

int multi_total(const MultiIndex& a) {
  int t = 0;
  for (int ai : a) t += ai;
  return t;
}

double multi_factorial(const MultiIndex& a) {
  double r = 1.0;
  for (int ai : a) r *= factorial(ai);
  return r;
}

Jet::Jet(int dim, int order) : dim_(dim), order_(order), stride_(order + 1) {
  if (dim < 1 || order < 0) throw std::invalid_argument("Jet: bad dim/order");
  c_.assign(cell_table(dim, order).size, Complex(0.0, 0.0));
}

Jet Jet::constant(int dim, int order, Complex value) {
  Jet j(dim, order);
  j.c_[0] = value;
  return j;
}

Jet Jet::variable(int dim, int order, int axis, double base) {
  if (axis < 0 || axis >= dim) throw std::invalid_argument("Jet::variable: bad axis");
  Jet j(dim, order);
  j.c_[0] = base;
  if (order >= 1) {
    int idx = 1;
    for (int d = 0; d < axis; ++d) idx *= j.stride_;
    j.c_[idx] = 1.0;
  }
  return j;
}

int Jet::flat(const MultiIndex& a) const {
  if (static_cast<int>(a.size()) != dim_) throw std::invalid_argument("Jet: multi-index dim mismatch");
  int idx = 0, mul = 1;
  for (int d = 0; d < dim_; ++d) {
    if (a[d] < 0 || a[d] > order_) throw std::out_of_range("Jet: multi-index exceeds order");
    idx += a[d] * mul;
    mul *= stride_;
  }
  return idx;
}

Complex Jet::taylor(const MultiIndex& a) const {
  if (multi_total(a) > order_) throw std::out_of_range("Jet::taylor: |a| exceeds order");
  return c_[flat(a)];
}

Complex Jet::derivative(const MultiIndex& a) const { return taylor(a) * multi_factorial(a); }

Jet& Jet::operator+=(const Jet& o) {
  if (dim_ != o.dim_ || order_ != o.order_) throw std::invalid_argument("Jet: shape mismatch");
  for (size_t i = 0; i < c_.size(); ++i) c_[i] += o.c_[i];
  return *this;
}

Jet& Jet::operator-=(const Jet& o) {
  if (dim_ != o.dim_ || order_ != o.order_) throw std::invalid_argument("Jet: shape mismatch");
  for (size_t i = 0; i < c_.size(); ++i) c_[i] -= o.c_[i];
  return *this;
}

Jet& Jet::operator*=(Complex z) {
  for (auto& v : c_) v *= z;
  return *this;
}

Jet Jet::operator-() const {
  Jet r = *this;
  for (auto& v : r.c_) v = -v;
  return r;
}

Jet Jet::operator*(const Jet& o) const {
  if (dim_ != o.dim_ || order_ != o.order_) throw std::invalid_argument("Jet: shape mismatch");
  const CellTable& t = cell_table(dim_, order_);
  Jet r(dim_, order_);
  for (int ia : t.valid) {
    const Complex a = c_[ia];
    if (a == Complex(0.0, 0.0)) continue;
    const int da = t.degree[ia];
    for (int ib : t.valid) {
      if (da + t.degree[ib] > order_) continue;
      // Digit-wise addition of flat indices never carries: each digit is
      // <= order and their total stays <= order.
      r.c_[ia + ib] += a * o.c_[ib];
    }
  }
  return r;
}

Jet Jet::conjugate() const {
  Jet r = *this;
  for (auto& v : r.c_) v = std::conj(v);
  return r;
}

Jet Jet::analytic(std::span<const Complex> scaled) const {
  if (static_cast<int>(scaled.size()) < order_ + 1)
    throw std::invalid_argument("Jet::analytic: need order+1 scaled derivatives");
  Jet h = *this;
  h.c_[0] = 0.0;  // nilpotent part
  Jet r = Jet::constant(dim_, order_, scaled[0]);
  Jet pw = Jet::constant(dim_, order_, 1.0);
  for (int i = 1; i <= order_; ++i) {
    pw = pw * h;
    r += scaled[i] * pw;
  }
  return r;
}

Jet Jet::exp() const {
  const Complex e0 = std::exp(value());
  std::vector<Complex> s(order_ + 1);
  double f = 1.0;
  for (int i = 0; i <= order_; ++i) {
    if (i > 0) f *= i;
    s[i] = e0 / f;
  }
  return analytic(s);
}

Jet Jet::sin() const {
  const Complex v = value();
  const Complex table[4] = {std::sin(v), std::cos(v), -std::sin(v), -std::cos(v)};
  std::vector<Complex> s(order_ + 1);
  double f = 1.0;
  for (int i = 0; i <= order_; ++i) {
    if (i > 0) f *= i;
    s[i] = table[i % 4] / f;
  }
  return analytic(s);
}

Jet Jet::cos() const {
  const Complex v = value();
  const Complex table[4] = {std::cos(v), -std::sin(v), -std::cos(v), std::sin(v)};
  std::vector<Complex> s(order_ + 1);
  double f = 1.0;
  for (int i = 0; i <= order_; ++i) {
    if (i > 0) f *= i;
    s[i] = table[i % 4] / f;
  }
  return analytic(s);
}

Jet Jet::reciprocal() const {
  const Complex v = value();
  if (v == Complex(0.0, 0.0)) throw std::domain_error("Jet::reciprocal: zero constant term");
  // h(u) = 1/u, h^(i)(v)/i! = (-1)^i / v^(i+1)
  std::vector<Complex> s(order_ + 1);
  Complex p = 1.0 / v;
  for (int i = 0; i <= order_; ++i) {
    s[i] = (i % 2 == 0) ? p : -p;
    p /= v;
  }
  return analytic(s);
}

Jet Jet::derivative_jet(const MultiIndex& a) const {
  const int drop = multi_total(a);
  if (drop > order_) throw std::out_of_range("Jet::derivative_jet: |a| exceeds order");
  Jet r(dim_, order_ - drop);
  const CellTable& t = cell_table(dim_, order_ - drop);
  for (int ib : t.valid) {
    // decode beta, then read taylor(a + beta) * (a+beta)! / beta!
    MultiIndex ab(dim_);
    int rem = ib;
    double scale = 1.0;
    for (int d = 0; d < dim_; ++d) {
      const int bd = rem % r.stride_;
      rem /= r.stride_;
      ab[d] = bd + a[d];
      // (a_d + b_d)! / b_d!
      for (int q = bd + 1; q <= ab[d]; ++q) scale *= q;
    }
    r.c_[ib] = taylor(ab) * scale;
  }
  return r;
}

}  // namespace lagq
