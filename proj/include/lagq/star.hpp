#pragma once

#include <optional>

#include "lagq/quantizer.hpp"

namespace lagq {

/// j-th coefficient of the standard Moyal-Weyl star product on R^n x T^n:
/// C_j(f,g) = 2^{-j} sum_{|a|+|b|=j} (-1)^{|b|}/(a! b!) (d_x^a d_th^b f)(d_x^b d_th^a g).
/// theta-derivatives act on fiber modes exactly; x-derivatives through
/// coefficient jets.
FiberedFunction moyal_coefficient(const FiberedFunction& f, const FiberedFunction& g, int j);

/// Fully symmetric 3-tensor built from the first derivatives of A:
/// Theta_ijl = (1/6)(d_l A_j^i + d_l A_i^j + d_i A_j^l + d_i A_l^j + d_j A_l^i + d_j A_i^l).
class ThetaTensor {
public:
  explicit ThetaTensor(HorizontalField field);
  int n() const { return field_.n(); }
  double component(int i, int j, int l, const Eigen::VectorXd& x) const;
  CoeffPtr coefficient(int i, int j, int l) const;

private:
  HorizontalField field_;
};

/// Christoffel symbols of the symmetrized symplectic connection: the only
/// nonzero components are Gamma_{x_l x_j}^{theta_i} = -Theta_ijl.
class ChristoffelField {
public:
  explicit ChristoffelField(HorizontalField field) : theta_(std::move(field)) {}
  int n() const { return theta_.n(); }
  double gamma(int i, int j, int l, const Eigen::VectorXd& x) const {
    return -theta_.component(i, j, l, x);
  }

private:
  ThetaTensor theta_;
};

ThetaTensor theta_tensor(const HorizontalField& a);
ChristoffelField christoffel(const HorizontalField& a);

/// Star-product coefficients of the horizontal scheme, closed form up to
/// order 2: C_0 = fg, C_1 = C_1^std, and
/// C_2 = C_2^std + (1/8) sum Theta_ijl (d_th_i f d2_th_jl g + d2_th_jl f d_th_i g).
FiberedFunction star_coefficient_h(const FiberedFunction& f, const FiberedFunction& g, int j,
                                   const HorizontalField& a, bool include_theta = true);

enum class Scheme { Model, General, Torus };

/// Quantization scheme plus the data it needs; used by the residual scans
/// and the experiment runner.
struct SchemeSpec {
  Scheme scheme = Scheme::Model;
  std::optional<HorizontalField> field;
  Cover cover = Cover::plane();
  double lo = -4.0, hi = 4.0;  // plane window
  bool drop_theta = false;     // diagnostic: omit the Theta term of C_2

  static SchemeSpec model(double lo, double hi);
  static SchemeSpec general(HorizontalField a, Cover cover, double lo, double hi);
  static SchemeSpec torus(HorizontalField a);
};

BandOperator quantize(const FiberedFunction& f, const SchemeSpec& spec, int k);

/// || phi(f) phi(g) - sum_{j<=l} (-i/k)^j phi(C_j(f,g)) || on the scheme's
/// lattice. Model scheme supports any l; the general/torus schemes stop at
/// l = 2 (no closed form beyond).
double expansion_residual(const FiberedFunction& f, const FiberedFunction& g, int k, int l,
                          const SchemeSpec& spec);

}  // namespace lagq
