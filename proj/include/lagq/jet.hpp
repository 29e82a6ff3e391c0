#pragma once

#include <complex>
#include <span>
#include <vector>

namespace lagq {

using Complex = std::complex<double>;

/// Multi-index alpha = (alpha_1, ..., alpha_n), alpha_i >= 0.
using MultiIndex = std::vector<int>;

int multi_total(const MultiIndex& a);
double multi_factorial(const MultiIndex& a);

/// Truncated multivariate Taylor polynomial (a "jet"): the value of a
/// function together with all partial derivatives up to a fixed total
/// order, stored as Taylor coefficients d^a f / a!.
///
/// Arithmetic is exact on the truncated algebra, so composing jets of
/// closed-form primitives yields analytic derivatives, not numerical ones.
class Jet {
public:
  Jet(int dim, int order);

  static Jet constant(int dim, int order, Complex value);
  /// The coordinate function x_axis, seeded at base point value `base`.
  static Jet variable(int dim, int order, int axis, double base);

  int dim() const { return dim_; }
  int order() const { return order_; }

  Complex value() const { return c_[0]; }
  /// Taylor coefficient d^a f / a!.
  Complex taylor(const MultiIndex& a) const;
  /// Partial derivative d^a f.
  Complex derivative(const MultiIndex& a) const;

  Jet& operator+=(const Jet& o);
  Jet& operator-=(const Jet& o);
  Jet& operator*=(Complex z);
  Jet operator*(const Jet& o) const;
  Jet operator-() const;

  friend Jet operator+(Jet a, const Jet& b) { return a += b; }
  friend Jet operator-(Jet a, const Jet& b) { return a -= b; }
  friend Jet operator*(Complex z, Jet a) { return a *= z; }
  friend Jet operator*(Jet a, Complex z) { return a *= z; }

  Jet conjugate() const;

  /// h(f) for analytic h, given scaled[i] = h^(i)(f.value()) / i!,
  /// i = 0..order. Exact on the truncated algebra because the
  /// zero-constant part of the jet is nilpotent.
  Jet analytic(std::span<const Complex> scaled) const;

  Jet exp() const;
  Jet sin() const;
  Jet cos() const;
  /// 1/f; requires f.value() != 0.
  Jet reciprocal() const;

  /// The jet of d^a f, of order (this->order() - |a|).
  Jet derivative_jet(const MultiIndex& a) const;

private:
  int flat(const MultiIndex& a) const;

  int dim_;
  int order_;
  int stride_;              // order_ + 1; digits never carry under index addition
  std::vector<Complex> c_;  // dense hypercube, cells with degree > order_ unused
};

}  // namespace lagq
