#include "lagq/coefficient.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace lagq {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Complex parse_complex(const nlohmann::json& j) {
  if (j.is_number()) return Complex(j.get<double>(), 0.0);
  if (j.is_array() && j.size() == 2) return Complex(j[0].get<double>(), j[1].get<double>());
  throw std::invalid_argument("expected a number or [re, im] pair");
}

nlohmann::json dump_complex(Complex z) { return nlohmann::json::array({z.real(), z.imag()}); }

Eigen::VectorXd parse_vector(const nlohmann::json& j) {
  Eigen::VectorXd v(j.size());
  for (size_t i = 0; i < j.size(); ++i) v[static_cast<int>(i)] = j[i].get<double>();
  return v;
}

nlohmann::json dump_vector(const Eigen::VectorXd& v) {
  nlohmann::json a = nlohmann::json::array();
  for (int i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

// Max of |f| over the boundary of the inf-ball of radius r.
double shell_max(const CoefficientFunction& f, double r) {
  const int n = f.dim();
  const int g = 13;
  double best = 0.0;
  Eigen::VectorXd x(n);
  // walk every face: fix one axis at +-r, grid the rest
  for (int axis = 0; axis < n; ++axis) {
    for (int sgn = -1; sgn <= 1; sgn += 2) {
      int cells = 1;
      for (int d = 0; d < n - 1; ++d) cells *= g;
      for (int c = 0; c < cells; ++c) {
        int rem = c;
        for (int d = 0; d < n; ++d) {
          if (d == axis) {
            x[d] = sgn * r;
          } else {
            x[d] = -r + 2.0 * r * (rem % g) / (g - 1);
            rem /= g;
          }
        }
        best = std::max(best, std::abs(f.value(x)));
      }
    }
  }
  return best;
}

const double kShells[] = {0.5, 1, 1.5, 2, 3, 4, 6, 8, 12, 16, 24, 32, 48, 64};

}  // namespace

Jet CoefficientFunction::jet(const Eigen::VectorXd& x, int order) const {
  if (x.size() != dim_) throw std::invalid_argument("coefficient: point dimension mismatch");
  if (order < 0 || order > kMaxJetOrder) throw std::out_of_range("coefficient: unsupported jet order");
  return eval_jet(x, order);
}

double CoefficientFunction::sup_bound() const {
  // Sampled estimate: grid over the decay box (or one period).
  double r = unit_periodic() ? 0.5 : decay_radius(1e-9);
  if (!std::isfinite(r)) r = 16.0;
  r = std::min(r, 64.0);
  const int g = 65;
  int cells = 1;
  for (int d = 0; d < dim_; ++d) cells *= g;
  double best = 0.0;
  Eigen::VectorXd x(dim_);
  for (int c = 0; c < cells; ++c) {
    int rem = c;
    for (int d = 0; d < dim_; ++d) {
      x[d] = -r + 2.0 * r * (rem % g) / (g - 1);
      rem /= g;
    }
    best = std::max(best, std::abs(value(x)));
  }
  return best * 1.1;
}

double CoefficientFunction::decay_radius(double eps) const {
  const size_t ns = sizeof(kShells) / sizeof(kShells[0]);
  for (size_t i = 0; i + 2 < ns; ++i) {
    if (shell_max(*this, kShells[i]) <= 0.5 * eps && shell_max(*this, kShells[i + 1]) <= 0.5 * eps &&
        shell_max(*this, kShells[i + 2]) <= 0.5 * eps)
      return kShells[i];
  }
  return kInf;
}

namespace coeff {

namespace {

class PolyCoeff final : public CoefficientFunction {
public:
  PolyCoeff(int dim, std::vector<PolyTerm> terms, Eigen::VectorXd shift)
      : CoefficientFunction(dim), terms_(std::move(terms)), shift_(std::move(shift)) {
    for (const auto& t : terms_)
      if (static_cast<int>(t.powers.size()) != dim) throw std::invalid_argument("poly term dim mismatch");
  }

  double sup_bound() const override {
    bool constant = true;
    double c0 = 0.0;
    for (const auto& t : terms_) {
      if (multi_total(t.powers) > 0 && t.c != Complex(0, 0)) constant = false;
      if (multi_total(t.powers) == 0) c0 += std::abs(t.c);
    }
    return constant ? c0 : kInf;
  }
  double decay_radius(double eps) const override {
    for (const auto& t : terms_)
      if (std::abs(t.c) > eps) return kInf;
    return 0.0;
  }

  nlohmann::json to_json() const override {
    nlohmann::json terms = nlohmann::json::array();
    for (const auto& t : terms_) terms.push_back({{"pow", t.powers}, {"c", dump_complex(t.c)}});
    nlohmann::json j{{"kind", "poly"}, {"terms", terms}};
    if (shift_.size() > 0 && shift_.cwiseAbs().maxCoeff() > 0) j["shift"] = dump_vector(shift_);
    return j;
  }

  const std::vector<PolyTerm>& terms() const { return terms_; }

protected:
  Jet eval_jet(const Eigen::VectorXd& x, int order) const override {
    Jet r(dim(), order);
    std::vector<std::vector<Jet>> pw(dim());  // powers of (x_d - shift_d)
    for (const auto& t : terms_) {
      Jet term = Jet::constant(dim(), order, t.c);
      for (int d = 0; d < dim(); ++d) {
        auto& p = pw[d];
        if (p.empty()) p.push_back(Jet::constant(dim(), order, 1.0));
        while (static_cast<int>(p.size()) <= t.powers[d]) {
          const double base = x[d] - (shift_.size() > 0 ? shift_[d] : 0.0);
          p.push_back(p.back() * Jet::variable(dim(), order, d, base));
        }
        if (t.powers[d] > 0) term = term * p[t.powers[d]];
      }
      r += term;
    }
    return r;
  }

private:
  std::vector<PolyTerm> terms_;
  Eigen::VectorXd shift_;
};

class GaussianCoeff final : public CoefficientFunction {
public:
  GaussianCoeff(Eigen::VectorXd center, double decay, Complex amp,
                std::vector<PolyTerm> poly)
      : CoefficientFunction(static_cast<int>(center.size())),
        center_(std::move(center)),
        decay_(decay),
        amp_(amp),
        poly_(std::move(poly)) {
    if (decay_ <= 0) throw std::invalid_argument("gaussian: decay must be positive");
  }

  double sup_bound() const override {
    if (poly_.empty()) return std::abs(amp_);
    return CoefficientFunction::sup_bound();
  }

  double decay_radius(double eps) const override {
    // |p(y)| <= C (1+|y|)^D outside, so solve C(1+rho)^D e^{-s rho^2} <= eps.
    double C = std::abs(amp_);
    int D = 0;
    for (const auto& t : poly_) {
      C += std::abs(t.c);
      D = std::max(D, multi_total(t.powers));
    }
    if (C <= eps) return 0.0;
    auto tail = [&](double rho) { return C * std::pow(1.0 + rho, D) * std::exp(-decay_ * rho * rho); };
    double hi = 1.0;
    while (tail(hi) > eps && hi < 1e6) hi *= 2.0;
    double lo = hi * 0.5;
    for (int it = 0; it < 60; ++it) {
      const double mid = 0.5 * (lo + hi);
      (tail(mid) > eps ? lo : hi) = mid;
    }
    return center_.cwiseAbs().maxCoeff() + hi;
  }

  nlohmann::json to_json() const override {
    nlohmann::json j{{"kind", poly_.empty() ? "gaussian" : "polygauss"},
                     {"center", dump_vector(center_)},
                     {"decay", decay_}};
    if (poly_.empty()) {
      j["amp"] = dump_complex(amp_);
    } else {
      nlohmann::json terms = nlohmann::json::array();
      for (const auto& t : poly_) terms.push_back({{"pow", t.powers}, {"c", dump_complex(t.c)}});
      j["poly"] = terms;
    }
    return j;
  }

protected:
  Jet eval_jet(const Eigen::VectorXd& x, int order) const override {
    Jet q(dim(), order);
    for (int d = 0; d < dim(); ++d) {
      Jet y = Jet::variable(dim(), order, d, x[d] - center_[d]);
      q += y * y;
    }
    Jet g = (Complex(-decay_) * q).exp();
    if (poly_.empty()) return amp_ * g;
    PolyCoeff p(dim(), poly_, center_);
    return p.jet(x, order) * g;
  }

private:
  Eigen::VectorXd center_;
  double decay_;
  Complex amp_;
  std::vector<PolyTerm> poly_;  // empty for the pure envelope
};

class BumpCoeff final : public CoefficientFunction {
public:
  BumpCoeff(Eigen::VectorXd center, double radius, Complex amp)
      : CoefficientFunction(static_cast<int>(center.size())),
        center_(std::move(center)),
        radius_(radius),
        amp_(amp) {
    if (radius_ <= 0) throw std::invalid_argument("bump: radius must be positive");
  }

  double sup_bound() const override { return std::abs(amp_); }
  double decay_radius(double) const override { return center_.cwiseAbs().maxCoeff() + radius_; }
  bool compact_support() const override { return true; }

  nlohmann::json to_json() const override {
    return {{"kind", "bump"},
            {"center", dump_vector(center_)},
            {"radius", radius_},
            {"amp", dump_complex(amp_)}};
  }

protected:
  Jet eval_jet(const Eigen::VectorXd& x, int order) const override {
    // h(u) = exp(1 - 1/(1-u^2)), h(0) = 1, supported on |u| < 1.
    Jet r = Jet::constant(dim(), order, amp_);
    for (int d = 0; d < dim(); ++d) {
      const double u0 = (x[d] - center_[d]) / radius_;
      if (1.0 - u0 * u0 <= 1e-8) return Jet(dim(), order);  // at/beyond the support edge
      Jet u = Complex(1.0 / radius_) * Jet::variable(dim(), order, d, x[d] - center_[d]);
      Jet w = Jet::constant(dim(), order, 1.0) - u * u;
      Jet e = Jet::constant(dim(), order, 1.0) - w.reciprocal();
      r = r * e.exp();
    }
    return r;
  }

private:
  Eigen::VectorXd center_;
  double radius_;
  Complex amp_;
};

class TrigCoeff final : public CoefficientFunction {
public:
  TrigCoeff(int dim, std::vector<TrigTerm> terms) : CoefficientFunction(dim), terms_(std::move(terms)) {
    for (const auto& t : terms_)
      if (static_cast<int>(t.w.size()) != dim) throw std::invalid_argument("trig term dim mismatch");
  }

  double sup_bound() const override {
    double s = 0.0;
    for (const auto& t : terms_) s += std::abs(t.c_cos) + std::abs(t.c_sin);
    return s;
  }
  double decay_radius(double eps) const override { return sup_bound() <= eps ? 0.0 : kInf; }
  bool unit_periodic() const override { return true; }

  nlohmann::json to_json() const override {
    nlohmann::json terms = nlohmann::json::array();
    for (const auto& t : terms_)
      terms.push_back({{"w", t.w}, {"cos", dump_complex(t.c_cos)}, {"sin", dump_complex(t.c_sin)}});
    return {{"kind", "trig"}, {"terms", terms}};
  }

protected:
  Jet eval_jet(const Eigen::VectorXd& x, int order) const override {
    Jet r(dim(), order);
    for (const auto& t : terms_) {
      Jet lin(dim(), order);
      for (int d = 0; d < dim(); ++d)
        if (t.w[d] != 0) lin += Complex(2.0 * M_PI * t.w[d]) * Jet::variable(dim(), order, d, x[d]);
      if (t.c_cos != Complex(0, 0)) r += t.c_cos * lin.cos();
      if (t.c_sin != Complex(0, 0)) r += t.c_sin * lin.sin();
    }
    return r;
  }

private:
  std::vector<TrigTerm> terms_;
};

class PlaneWaveCoeff final : public CoefficientFunction {
public:
  PlaneWaveCoeff(Eigen::VectorXd freq, Complex amp)
      : CoefficientFunction(static_cast<int>(freq.size())), freq_(std::move(freq)), amp_(amp) {}

  double sup_bound() const override { return std::abs(amp_); }
  double decay_radius(double eps) const override { return std::abs(amp_) <= eps ? 0.0 : kInf; }
  bool unit_periodic() const override {
    for (int d = 0; d < freq_.size(); ++d) {
      const double q = freq_[d] / (2.0 * M_PI);
      if (std::abs(q - std::round(q)) > 1e-12) return false;
    }
    return true;
  }

  nlohmann::json to_json() const override {
    return {{"kind", "planewave"}, {"freq", dump_vector(freq_)}, {"amp", dump_complex(amp_)}};
  }

protected:
  Jet eval_jet(const Eigen::VectorXd& x, int order) const override {
    Jet lin(dim(), order);
    for (int d = 0; d < dim(); ++d)
      if (freq_[d] != 0.0) lin += Complex(freq_[d]) * Jet::variable(dim(), order, d, x[d]);
    return amp_ * (Complex(0.0, 1.0) * lin).exp();
  }

private:
  Eigen::VectorXd freq_;
  Complex amp_;
};

class SumCoeff final : public CoefficientFunction {
public:
  SumCoeff(std::vector<CoeffPtr> children) : CoefficientFunction(children.at(0)->dim()), children_(std::move(children)) {
    for (const auto& c : children_)
      if (c->dim() != dim()) throw std::invalid_argument("sum: dimension mismatch");
  }

  double sup_bound() const override {
    double s = 0.0;
    for (const auto& c : children_) s += c->sup_bound();
    return s;
  }
  double decay_radius(double eps) const override {
    double r = 0.0;
    for (const auto& c : children_) r = std::max(r, c->decay_radius(eps / children_.size()));
    return r;
  }
  bool compact_support() const override {
    return std::all_of(children_.begin(), children_.end(), [](const CoeffPtr& c) { return c->compact_support(); });
  }
  bool unit_periodic() const override {
    return std::all_of(children_.begin(), children_.end(), [](const CoeffPtr& c) { return c->unit_periodic(); });
  }

  nlohmann::json to_json() const override {
    nlohmann::json terms = nlohmann::json::array();
    for (const auto& c : children_) terms.push_back(c->to_json());
    return {{"kind", "sum"}, {"terms", terms}};
  }

protected:
  Jet eval_jet(const Eigen::VectorXd& x, int order) const override {
    Jet r(dim(), order);
    for (const auto& c : children_) r += c->jet(x, order);
    return r;
  }

private:
  std::vector<CoeffPtr> children_;
};

class ProductCoeff final : public CoefficientFunction {
public:
  ProductCoeff(std::vector<CoeffPtr> children)
      : CoefficientFunction(children.at(0)->dim()), children_(std::move(children)) {
    for (const auto& c : children_)
      if (c->dim() != dim()) throw std::invalid_argument("product: dimension mismatch");
  }

  double sup_bound() const override {
    double s = 1.0;
    for (const auto& c : children_) s *= c->sup_bound();
    if (std::isfinite(s)) return s;
    return CoefficientFunction::sup_bound();
  }
  double decay_radius(double eps) const override {
    // the product vanishes outside any compact factor's support
    double best = kInf;
    for (const auto& c : children_)
      if (c->compact_support()) best = std::min(best, c->decay_radius(0.0));
    if (std::isfinite(best)) return best;
    // a decaying factor works too, once the rest is bounded
    for (size_t i = 0; i < children_.size(); ++i) {
      double others = 1.0;
      for (size_t j = 0; j < children_.size(); ++j)
        if (j != i) others *= children_[j]->sup_bound();
      if (!std::isfinite(others)) continue;
      best = std::min(best, children_[i]->decay_radius(eps / std::max(others, 1e-300)));
    }
    if (std::isfinite(best)) return best;
    return CoefficientFunction::decay_radius(eps);
  }
  bool compact_support() const override {
    return std::any_of(children_.begin(), children_.end(), [](const CoeffPtr& c) { return c->compact_support(); });
  }
  bool unit_periodic() const override {
    return std::all_of(children_.begin(), children_.end(), [](const CoeffPtr& c) { return c->unit_periodic(); });
  }

  nlohmann::json to_json() const override {
    nlohmann::json factors = nlohmann::json::array();
    for (const auto& c : children_) factors.push_back(c->to_json());
    return {{"kind", "product"}, {"factors", factors}};
  }

protected:
  Jet eval_jet(const Eigen::VectorXd& x, int order) const override {
    Jet r = children_[0]->jet(x, order);
    for (size_t i = 1; i < children_.size(); ++i) r = r * children_[i]->jet(x, order);
    return r;
  }

private:
  std::vector<CoeffPtr> children_;
};

class ScaleCoeff final : public CoefficientFunction {
public:
  ScaleCoeff(Complex z, CoeffPtr f) : CoefficientFunction(f->dim()), z_(z), f_(std::move(f)) {}

  double sup_bound() const override { return std::abs(z_) * f_->sup_bound(); }
  double decay_radius(double eps) const override {
    if (z_ == Complex(0, 0)) return 0.0;
    return f_->decay_radius(eps / std::abs(z_));
  }
  bool compact_support() const override { return f_->compact_support(); }
  bool unit_periodic() const override { return f_->unit_periodic(); }

  nlohmann::json to_json() const override {
    return {{"kind", "scale"}, {"z", dump_complex(z_)}, {"arg", f_->to_json()}};
  }

protected:
  Jet eval_jet(const Eigen::VectorXd& x, int order) const override { return z_ * f_->jet(x, order); }

private:
  Complex z_;
  CoeffPtr f_;
};

class DerivativeCoeff final : public CoefficientFunction {
public:
  DerivativeCoeff(MultiIndex alpha, CoeffPtr f)
      : CoefficientFunction(f->dim()), alpha_(std::move(alpha)), f_(std::move(f)) {
    if (static_cast<int>(alpha_.size()) != dim()) throw std::invalid_argument("derivative: alpha dim mismatch");
  }

  bool compact_support() const override { return f_->compact_support(); }
  bool unit_periodic() const override { return f_->unit_periodic(); }
  double decay_radius(double eps) const override {
    if (f_->compact_support()) return f_->decay_radius(0.0);
    return CoefficientFunction::decay_radius(eps);
  }

  nlohmann::json to_json() const override {
    return {{"kind", "derivative"}, {"alpha", alpha_}, {"arg", f_->to_json()}};
  }

  const MultiIndex& alpha() const { return alpha_; }
  const CoeffPtr& child() const { return f_; }

protected:
  Jet eval_jet(const Eigen::VectorXd& x, int order) const override {
    return f_->jet(x, order + multi_total(alpha_)).derivative_jet(alpha_);
  }

private:
  MultiIndex alpha_;
  CoeffPtr f_;
};

class ConjCoeff final : public CoefficientFunction {
public:
  explicit ConjCoeff(CoeffPtr f) : CoefficientFunction(f->dim()), f_(std::move(f)) {}

  double sup_bound() const override { return f_->sup_bound(); }
  double decay_radius(double eps) const override { return f_->decay_radius(eps); }
  bool compact_support() const override { return f_->compact_support(); }
  bool unit_periodic() const override { return f_->unit_periodic(); }

  nlohmann::json to_json() const override { return {{"kind", "conj"}, {"arg", f_->to_json()}}; }

protected:
  Jet eval_jet(const Eigen::VectorXd& x, int order) const override {
    return f_->jet(x, order).conjugate();
  }

private:
  CoeffPtr f_;
};

std::vector<PolyTerm> parse_poly_terms(const nlohmann::json& j) {
  std::vector<PolyTerm> terms;
  for (const auto& t : j) terms.push_back({t.at("pow").get<MultiIndex>(), parse_complex(t.at("c"))});
  return terms;
}

}  // namespace

CoeffPtr constant(int dim, Complex v) {
  return polynomial(dim, {{MultiIndex(dim, 0), v}});
}

CoeffPtr polynomial(int dim, std::vector<PolyTerm> terms) {
  return std::make_shared<PolyCoeff>(dim, std::move(terms), Eigen::VectorXd());
}

CoeffPtr gaussian(Eigen::VectorXd center, double decay, Complex amp) {
  return std::make_shared<GaussianCoeff>(std::move(center), decay, amp, std::vector<PolyTerm>{});
}

CoeffPtr poly_gaussian(Eigen::VectorXd center, double decay, std::vector<PolyTerm> poly) {
  return std::make_shared<GaussianCoeff>(std::move(center), decay, Complex(0, 0), std::move(poly));
}

CoeffPtr bump(Eigen::VectorXd center, double radius, Complex amp) {
  return std::make_shared<BumpCoeff>(std::move(center), radius, amp);
}

CoeffPtr trig(int dim, std::vector<TrigTerm> terms) {
  return std::make_shared<TrigCoeff>(dim, std::move(terms));
}

CoeffPtr plane_wave(Eigen::VectorXd freq, Complex amp) {
  return std::make_shared<PlaneWaveCoeff>(std::move(freq), amp);
}

CoeffPtr sum(std::vector<CoeffPtr> children) {
  if (children.empty()) throw std::invalid_argument("sum: no children");
  if (children.size() == 1) return children[0];
  return std::make_shared<SumCoeff>(std::move(children));
}

CoeffPtr product(std::vector<CoeffPtr> children) {
  if (children.empty()) throw std::invalid_argument("product: no children");
  if (children.size() == 1) return children[0];
  return std::make_shared<ProductCoeff>(std::move(children));
}

CoeffPtr scale(Complex z, CoeffPtr f) { return std::make_shared<ScaleCoeff>(z, std::move(f)); }

CoeffPtr derivative(MultiIndex alpha, CoeffPtr f) {
  if (multi_total(alpha) == 0) return f;
  // collapse nested derivative nodes
  if (auto d = std::dynamic_pointer_cast<const DerivativeCoeff>(f)) {
    MultiIndex merged = alpha;
    for (size_t i = 0; i < merged.size(); ++i) merged[i] += d->alpha()[i];
    return std::make_shared<DerivativeCoeff>(std::move(merged), d->child());
  }
  return std::make_shared<DerivativeCoeff>(std::move(alpha), std::move(f));
}

CoeffPtr conjugate(CoeffPtr f) { return std::make_shared<ConjCoeff>(std::move(f)); }

CoeffPtr from_json(const nlohmann::json& j, int dim) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "const") return constant(dim, parse_complex(j.at("value")));
  if (kind == "poly") {
    auto node = std::make_shared<PolyCoeff>(
        dim, parse_poly_terms(j.at("terms")),
        j.contains("shift") ? parse_vector(j.at("shift")) : Eigen::VectorXd());
    return node;
  }
  if (kind == "gaussian" || kind == "gaussian-envelope") {
    auto c = parse_vector(j.at("center"));
    Complex amp = j.contains("amp") ? parse_complex(j.at("amp")) : Complex(1, 0);
    return gaussian(c, j.at("decay").get<double>(), amp);
  }
  if (kind == "polygauss" || kind == "polynomial-times-gaussian") {
    return poly_gaussian(parse_vector(j.at("center")), j.at("decay").get<double>(),
                         parse_poly_terms(j.at("poly")));
  }
  if (kind == "bump" || kind == "smooth-bump") {
    Complex amp = j.contains("amp") ? parse_complex(j.at("amp")) : Complex(1, 0);
    return bump(parse_vector(j.at("center")), j.at("radius").get<double>(), amp);
  }
  if (kind == "trig" || kind == "periodic-trigonometric") {
    std::vector<TrigTerm> terms;
    for (const auto& t : j.at("terms")) {
      TrigTerm term;
      term.w = t.at("w").get<std::vector<int>>();
      term.c_cos = t.contains("cos") ? parse_complex(t.at("cos")) : Complex(0, 0);
      term.c_sin = t.contains("sin") ? parse_complex(t.at("sin")) : Complex(0, 0);
      terms.push_back(std::move(term));
    }
    return trig(dim, std::move(terms));
  }
  if (kind == "planewave") return plane_wave(parse_vector(j.at("freq")), parse_complex(j.at("amp")));
  if (kind == "sum") {
    std::vector<CoeffPtr> ch;
    for (const auto& t : j.at("terms")) ch.push_back(from_json(t, dim));
    return sum(std::move(ch));
  }
  if (kind == "product") {
    std::vector<CoeffPtr> ch;
    for (const auto& t : j.at("factors")) ch.push_back(from_json(t, dim));
    return product(std::move(ch));
  }
  if (kind == "scale") return scale(parse_complex(j.at("z")), from_json(j.at("arg"), dim));
  if (kind == "derivative")
    return derivative(j.at("alpha").get<MultiIndex>(), from_json(j.at("arg"), dim));
  if (kind == "conj") return conjugate(from_json(j.at("arg"), dim));
  throw std::invalid_argument("unknown coefficient kind: " + kind);
}

}  // namespace coeff

}  // namespace lagq
