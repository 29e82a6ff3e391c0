#include "lagq/fibered.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

namespace lagq {

namespace {

std::vector<int> negate(const std::vector<int>& m) {
  std::vector<int> r(m.size());
  for (size_t i = 0; i < m.size(); ++i) r[i] = -m[i];
  return r;
}

int inf_norm(const std::vector<int>& m) {
  int r = 0;
  for (int v : m) r = std::max(r, std::abs(v));
  return r;
}

}  // namespace

FiberedFunction::FiberedFunction(int n, BaseKind base, bool real_flag, ModeMap modes)
    : n_(n), base_(base), real_(real_flag), band_limit_(0), modes_(std::move(modes)) {
  if (n < 1) throw std::invalid_argument("FiberedFunction: n must be >= 1");
  for (const auto& [m, c] : modes_) {
    if (static_cast<int>(m.size()) != n) throw std::invalid_argument("FiberedFunction: mode dim mismatch");
    if (!c) throw std::invalid_argument("FiberedFunction: null coefficient");
    if (c->dim() != n) throw std::invalid_argument("FiberedFunction: coefficient dim mismatch");
    if (base_ == BaseKind::Torus && !c->unit_periodic())
      throw std::invalid_argument("FiberedFunction: torus base needs 1-periodic coefficients");
    band_limit_ = std::max(band_limit_, inf_norm(m));
  }
}

CoeffPtr FiberedFunction::mode(const std::vector<int>& m) const {
  auto it = modes_.find(m);
  return it == modes_.end() ? nullptr : it->second;
}

Complex FiberedFunction::evaluate(const Eigen::VectorXd& x, const Eigen::VectorXd& theta) const {
  if (x.size() != n_ || theta.size() != n_)
    throw std::invalid_argument("FiberedFunction::evaluate: dimension mismatch");
  Complex r(0.0, 0.0);
  for (const auto& [m, c] : modes_) {
    double phase = 0.0;
    for (int d = 0; d < n_; ++d) phase += m[d] * theta[d];
    r += c->value(x) * std::exp(Complex(0.0, phase));
  }
  return r;
}

nlohmann::json FiberedFunction::to_json() const {
  nlohmann::json modes = nlohmann::json::array();
  for (const auto& [m, c] : modes_) modes.push_back({{"m", m}, {"coeff", c->to_json()}});
  return {{"n", n_},
          {"base", base_ == BaseKind::Plane ? "plane" : "torus"},
          {"real", real_},
          {"modes", modes}};
}

FiberedFunction FiberedFunction::from_json(const nlohmann::json& j) {
  const int n = j.at("n").get<int>();
  const std::string base_s = j.at("base").get<std::string>();
  BaseKind base;
  if (base_s == "plane")
    base = BaseKind::Plane;
  else if (base_s == "torus")
    base = BaseKind::Torus;
  else
    throw std::invalid_argument("FiberedFunction: base must be \"plane\" or \"torus\"");
  ModeMap modes;
  for (const auto& entry : j.at("modes")) {
    auto m = entry.at("m").get<std::vector<int>>();
    modes[m] = coeff::from_json(entry.at("coeff"), n);
  }
  const bool real = j.value("real", false);
  return FiberedFunction(n, base, real, std::move(modes));
}

FiberedFunction FiberedFunction::from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open function file: " + path);
  nlohmann::json j;
  in >> j;
  return from_json(j);
}

FiberedFunction multiply(const FiberedFunction& f, const FiberedFunction& g) {
  if (f.n() != g.n() || f.base_kind() != g.base_kind())
    throw std::invalid_argument("multiply: incompatible functions");
  // (fg)_p = sum_m f_{p-m} g_m
  std::map<std::vector<int>, std::vector<CoeffPtr>> acc;
  for (const auto& [mf, cf] : f.modes()) {
    for (const auto& [mg, cg] : g.modes()) {
      std::vector<int> p(mf.size());
      for (size_t d = 0; d < p.size(); ++d) p[d] = mf[d] + mg[d];
      acc[p].push_back(coeff::product({cf, cg}));
    }
  }
  FiberedFunction::ModeMap modes;
  for (auto& [p, terms] : acc) modes[p] = coeff::sum(std::move(terms));
  return FiberedFunction(f.n(), f.base_kind(), f.real_flag() && g.real_flag(), std::move(modes));
}

FiberedFunction poisson_bracket(const FiberedFunction& f, const FiberedFunction& g) {
  if (f.n() != g.n() || f.base_kind() != g.base_kind())
    throw std::invalid_argument("poisson_bracket: incompatible functions");
  const int n = f.n();
  // {f,g} = sum_i (d_{x_i} f d_{theta_i} g - d_{theta_i} f d_{x_i} g);
  // theta-derivatives act on modes as multiplication by i*m_i.
  std::map<std::vector<int>, std::vector<CoeffPtr>> acc;
  for (const auto& [mf, cf] : f.modes()) {
    for (const auto& [mg, cg] : g.modes()) {
      std::vector<int> p(mf.size());
      for (size_t d = 0; d < p.size(); ++d) p[d] = mf[d] + mg[d];
      for (int i = 0; i < n; ++i) {
        MultiIndex ei(n, 0);
        ei[i] = 1;
        if (mg[i] != 0)
          acc[p].push_back(coeff::scale(Complex(0.0, mg[i]),
                                        coeff::product({coeff::derivative(ei, cf), cg})));
        if (mf[i] != 0)
          acc[p].push_back(coeff::scale(Complex(0.0, -mf[i]),
                                        coeff::product({cf, coeff::derivative(ei, cg)})));
      }
    }
  }
  FiberedFunction::ModeMap modes;
  for (auto& [p, terms] : acc)
    if (!terms.empty()) modes[p] = coeff::sum(std::move(terms));
  return FiberedFunction(f.n(), f.base_kind(), f.real_flag() && g.real_flag(), std::move(modes));
}

FiberedFunction add(const FiberedFunction& f, const FiberedFunction& g) {
  if (f.n() != g.n() || f.base_kind() != g.base_kind())
    throw std::invalid_argument("add: incompatible functions");
  FiberedFunction::ModeMap modes = f.modes();
  for (const auto& [m, c] : g.modes()) {
    auto it = modes.find(m);
    if (it == modes.end())
      modes[m] = c;
    else
      it->second = coeff::sum({it->second, c});
  }
  return FiberedFunction(f.n(), f.base_kind(), f.real_flag() && g.real_flag(), std::move(modes));
}

FiberedFunction scale(Complex z, const FiberedFunction& f) {
  FiberedFunction::ModeMap modes;
  for (const auto& [m, c] : f.modes()) modes[m] = coeff::scale(z, c);
  return FiberedFunction(f.n(), f.base_kind(), f.real_flag() && z.imag() == 0.0, std::move(modes));
}

FiberedFunction conj(const FiberedFunction& f) {
  // conj(f)(x,theta) = sum_m conj(f_{-m})(x) e^{i<m,theta>}
  FiberedFunction::ModeMap modes;
  for (const auto& [m, c] : f.modes()) modes[negate(m)] = coeff::conjugate(c);
  return FiberedFunction(f.n(), f.base_kind(), f.real_flag(), std::move(modes));
}

double conjugation_defect(const FiberedFunction& f, int samples, double radius) {
  double worst = 0.0;
  Eigen::VectorXd x(f.n());
  for (int s = 0; s < samples; ++s) {
    for (int d = 0; d < f.n(); ++d) {
      // deterministic low-discrepancy-ish sweep
      x[d] = -radius + 2.0 * radius * std::fmod(0.5 + 0.7548776662 * (s * f.n() + d + 1), 1.0);
    }
    for (const auto& [m, c] : f.modes()) {
      CoeffPtr cneg = f.mode(negate(m));
      const Complex a = c->value(x);
      const Complex b = cneg ? cneg->value(x) : Complex(0, 0);
      worst = std::max(worst, std::abs(a - std::conj(b)));
    }
  }
  return worst;
}

double sup_norm(const FiberedFunction& f, double lo, double hi, int grid_per_axis, double refine_tol) {
  const int n = f.n();
  const int gx = grid_per_axis;
  const int gt = grid_per_axis;

  // coarse scan; coefficient values are cached per x-node so the theta sweep is cheap
  double best = 0.0;
  Eigen::VectorXd best_x(n), best_t(n);
  Eigen::VectorXd x(n), theta(n);

  int xcells = 1, tcells = 1;
  for (int d = 0; d < n; ++d) {
    xcells *= gx;
    tcells *= gt;
  }
  std::vector<Complex> cvals(f.modes().size());
  for (int cx = 0; cx < xcells; ++cx) {
    int rem = cx;
    for (int d = 0; d < n; ++d) {
      x[d] = lo + (hi - lo) * (rem % gx) / (gx - 1);
      rem /= gx;
    }
    size_t ci = 0;
    for (const auto& [m, c] : f.modes()) cvals[ci++] = c->value(x);
    for (int ct = 0; ct < tcells; ++ct) {
      rem = ct;
      for (int d = 0; d < n; ++d) {
        theta[d] = 2.0 * M_PI * (rem % gt) / gt;
        rem /= gt;
      }
      Complex v(0, 0);
      ci = 0;
      for (const auto& [m, c] : f.modes()) {
        double ph = 0.0;
        for (int d = 0; d < n; ++d) ph += m[d] * theta[d];
        v += cvals[ci++] * std::exp(Complex(0.0, ph));
      }
      const double av = std::abs(v);
      if (av > best) {
        best = av;
        best_x = x;
        best_t = theta;
      }
    }
  }

  // local refinement: shrink a box around the best point
  double hx = (hi - lo) / (gx - 1);
  double ht = 2.0 * M_PI / gt;
  while (hx > refine_tol || ht > refine_tol) {
    const int g = 5;
    double improved_best = best;
    Eigen::VectorXd bx = best_x, bt = best_t;
    int cells = 1;
    for (int d = 0; d < 2 * n; ++d) cells *= g;
    for (int c = 0; c < cells; ++c) {
      int rem = c;
      for (int d = 0; d < n; ++d) {
        x[d] = best_x[d] + hx * (-1.0 + 2.0 * (rem % g) / (g - 1));
        rem /= g;
      }
      for (int d = 0; d < n; ++d) {
        theta[d] = best_t[d] + ht * (-1.0 + 2.0 * (rem % g) / (g - 1));
        rem /= g;
      }
      const double av = std::abs(f.evaluate(x, theta));
      if (av > improved_best) {
        improved_best = av;
        bx = x;
        bt = theta;
      }
    }
    best = improved_best;
    best_x = bx;
    best_t = bt;
    hx *= 0.5;
    ht *= 0.5;
  }
  return best;
}

}  // namespace lagq
