#include "lagq/star.hpp"

#include <cmath>
#include <stdexcept>

namespace lagq {

namespace {

// all multi-indices of dimension n with total exactly t
void indices_with_total(int n, int t, MultiIndex& cur, int axis, std::vector<MultiIndex>& out) {
  if (axis == n - 1) {
    cur[axis] = t;
    out.push_back(cur);
    return;
  }
  for (int v = 0; v <= t; ++v) {
    cur[axis] = v;
    indices_with_total(n, t - v, cur, axis + 1, out);
  }
}

std::vector<MultiIndex> indices_with_total(int n, int t) {
  std::vector<MultiIndex> out;
  MultiIndex cur(n, 0);
  indices_with_total(n, t, cur, 0, out);
  return out;
}

Complex imode_power(const std::vector<int>& m, const MultiIndex& a) {
  // prod_d (i m_d)^{a_d}
  Complex r(1, 0);
  for (size_t d = 0; d < m.size(); ++d)
    for (int q = 0; q < a[d]; ++q) r *= Complex(0.0, m[d]);
  return r;
}

}  // namespace

FiberedFunction moyal_coefficient(const FiberedFunction& f, const FiberedFunction& g, int j) {
  if (f.n() != g.n() || f.base_kind() != g.base_kind())
    throw std::invalid_argument("moyal_coefficient: incompatible functions");
  if (j < 0) throw std::invalid_argument("moyal_coefficient: negative order");
  const int n = f.n();
  const double half_pow = std::pow(0.5, j);

  std::map<std::vector<int>, std::vector<CoeffPtr>> acc;
  for (int s = 0; s <= j; ++s) {
    for (const MultiIndex& alpha : indices_with_total(n, s)) {
      for (const MultiIndex& beta : indices_with_total(n, j - s)) {
        const double base =
            half_pow * ((j - s) % 2 == 0 ? 1.0 : -1.0) / (multi_factorial(alpha) * multi_factorial(beta));
        for (const auto& [mf, cf] : f.modes()) {
          const Complex zf = imode_power(mf, beta);  // d_theta^beta on f
          if (zf == Complex(0, 0)) continue;
          for (const auto& [mg, cg] : g.modes()) {
            const Complex zg = imode_power(mg, alpha);  // d_theta^alpha on g
            if (zg == Complex(0, 0)) continue;
            std::vector<int> p(mf.size());
            for (size_t d = 0; d < p.size(); ++d) p[d] = mf[d] + mg[d];
            acc[p].push_back(coeff::scale(
                base * zf * zg,
                coeff::product({coeff::derivative(alpha, cf), coeff::derivative(beta, cg)})));
          }
        }
      }
    }
  }
  FiberedFunction::ModeMap modes;
  for (auto& [p, terms] : acc) modes[p] = coeff::sum(std::move(terms));
  return FiberedFunction(n, f.base_kind(), f.real_flag() && g.real_flag(), std::move(modes));
}

ThetaTensor::ThetaTensor(HorizontalField field) : field_(std::move(field)) {}

double ThetaTensor::component(int i, int j, int l, const Eigen::VectorXd& x) const {
  // entry (i, j) of partial(l, x) is d_l A_j^i
  const Eigen::MatrixXd dl = field_.partial(l, x);
  const Eigen::MatrixXd di = field_.partial(i, x);
  const Eigen::MatrixXd dj = field_.partial(j, x);
  return (dl(i, j) + dl(j, i) + di(l, j) + di(j, l) + dj(i, l) + dj(l, i)) / 6.0;
}

CoeffPtr ThetaTensor::coefficient(int i, int j, int l) const {
  std::vector<CoeffPtr> terms = {
      field_.partial_coeff(i, j, l), field_.partial_coeff(j, i, l), field_.partial_coeff(l, j, i),
      field_.partial_coeff(j, l, i), field_.partial_coeff(i, l, j), field_.partial_coeff(l, i, j)};
  return coeff::scale(Complex(1.0 / 6.0, 0.0), coeff::sum(std::move(terms)));
}

ThetaTensor theta_tensor(const HorizontalField& a) { return ThetaTensor(a); }
ChristoffelField christoffel(const HorizontalField& a) { return ChristoffelField(a); }

FiberedFunction star_coefficient_h(const FiberedFunction& f, const FiberedFunction& g, int j,
                                   const HorizontalField& a, bool include_theta) {
  if (j < 0 || j > 2)
    throw std::invalid_argument("star_coefficient_h: closed form only up to order 2");
  if (j == 0) return multiply(f, g);
  if (j == 1) return moyal_coefficient(f, g, 1);

  FiberedFunction c2 = moyal_coefficient(f, g, 2);
  if (!include_theta || a.is_constant()) return c2;

  const int n = f.n();
  const ThetaTensor theta(a);
  std::map<std::vector<int>, std::vector<CoeffPtr>> acc;
  for (const auto& [mf, cf] : f.modes()) {
    for (const auto& [mg, cg] : g.modes()) {
      std::vector<int> p(mf.size());
      for (size_t d = 0; d < p.size(); ++d) p[d] = mf[d] + mg[d];
      for (int i = 0; i < n; ++i) {
        for (int jj = 0; jj < n; ++jj) {
          for (int ll = 0; ll < n; ++ll) {
            // (1/8) Theta_ijl (d_th_i f d2_th_jl g + d2_th_jl f d_th_i g);
            // on modes each theta-derivative is a factor i*m.
            const Complex z1 = Complex(0, 1) * Complex(mf[i]) * Complex(0, 1) * Complex(mg[jj]) *
                               Complex(0, 1) * Complex(mg[ll]);
            const Complex z2 = Complex(0, 1) * Complex(mf[jj]) * Complex(0, 1) * Complex(mf[ll]) *
                               Complex(0, 1) * Complex(mg[i]);
            const Complex z = 0.125 * (z1 + z2);
            if (z == Complex(0, 0)) continue;
            acc[p].push_back(coeff::scale(z, coeff::product({theta.coefficient(i, jj, ll), cf, cg})));
          }
        }
      }
    }
  }
  if (acc.empty()) return c2;
  FiberedFunction::ModeMap modes;
  for (auto& [p, terms] : acc) modes[p] = coeff::sum(std::move(terms));
  FiberedFunction corr(n, f.base_kind(), f.real_flag() && g.real_flag(), std::move(modes));
  return add(c2, corr);
}

SchemeSpec SchemeSpec::model(double lo, double hi) {
  SchemeSpec s;
  s.scheme = Scheme::Model;
  s.lo = lo;
  s.hi = hi;
  return s;
}

SchemeSpec SchemeSpec::general(HorizontalField a, Cover cover, double lo, double hi) {
  SchemeSpec s;
  s.scheme = Scheme::General;
  s.field = std::move(a);
  s.cover = cover;
  s.lo = lo;
  s.hi = hi;
  return s;
}

SchemeSpec SchemeSpec::torus(HorizontalField a) {
  SchemeSpec s;
  s.scheme = Scheme::Torus;
  s.field = std::move(a);
  s.cover = Cover::torus();
  return s;
}

BandOperator quantize(const FiberedFunction& f, const SchemeSpec& spec, int k) {
  switch (spec.scheme) {
    case Scheme::Model:
      return quantize_model(f, k, spec.lo, spec.hi);
    case Scheme::General:
      if (!spec.field) throw std::invalid_argument("quantize: general scheme needs a horizontal field");
      return quantize_general(f, *spec.field, spec.cover, k, spec.lo, spec.hi);
    case Scheme::Torus: {
      if (!spec.field) throw std::invalid_argument("quantize: torus scheme needs a horizontal field");
      if (spec.cover.base() != BaseKind::Torus)
        throw std::invalid_argument("quantize: torus scheme needs a torus cover");
      // Admissibility gate only: all admissible covers induce the same
      // shortest-arc lifts, so the assembled operator is cover-independent.
      if (static_cast<double>(f.band_limit()) / k > spec.cover.closeness_radius())
        throw std::invalid_argument("quantize: band exceeds the closeness radius of the cover");
      return quantize_torus(f, *spec.field, k);
    }
  }
  throw std::logic_error("quantize: unknown scheme");
}

double expansion_residual(const FiberedFunction& f, const FiberedFunction& g, int k, int l,
                          const SchemeSpec& spec) {
  if (l < 0) throw std::invalid_argument("expansion_residual: negative order");
  if (spec.scheme != Scheme::Model && l > 2)
    throw std::invalid_argument("expansion_residual: general scheme has coefficients only up to order 2");

  BandOperator residual = compose(quantize(f, spec, k), quantize(g, spec, k));
  Complex factor(1, 0);
  const Complex step(0.0, -1.0 / k);  // -i/k
  for (int j = 0; j <= l; ++j) {
    const FiberedFunction cj = spec.scheme == Scheme::Model
                                   ? moyal_coefficient(f, g, j)
                                   : star_coefficient_h(f, g, j, *spec.field, !spec.drop_theta);
    residual = residual - quantize(cj, spec, k).scaled(factor);
    factor *= step;
  }
  return residual.op_norm();
}

}  // namespace lagq
