#include "lagq/quantizer.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>

namespace lagq {

namespace {

Eigen::MatrixXd parse_matrix(const nlohmann::json& j, int n) {
  Eigen::MatrixXd m(n, n);
  if (j.is_number()) {
    if (n != 1) throw std::invalid_argument("matrix: scalar given for n > 1");
    m(0, 0) = j.get<double>();
    return m;
  }
  for (int i = 0; i < n; ++i)
    for (int c = 0; c < n; ++c) m(i, c) = j.at(i).at(c).get<double>();
  return m;
}

}  // namespace

HorizontalField::HorizontalField(int n, Eigen::MatrixXd constant_part, std::vector<SineTerm> sines)
    : n_(n), constant_(std::move(constant_part)), sines_(std::move(sines)) {
  if (constant_.size() == 0) constant_ = Eigen::MatrixXd::Zero(n, n);
  if (constant_.rows() != n || constant_.cols() != n)
    throw std::invalid_argument("HorizontalField: constant part must be n x n");
  for (const auto& s : sines_) {
    if (s.amp.rows() != n || s.amp.cols() != n || s.w.size() != n)
      throw std::invalid_argument("HorizontalField: sine term shape mismatch");
  }
}

HorizontalField HorizontalField::zero(int n) {
  return HorizontalField(n, Eigen::MatrixXd::Zero(n, n), {});
}

HorizontalField HorizontalField::constant(const Eigen::MatrixXd& p) {
  return HorizontalField(static_cast<int>(p.rows()), p, {});
}

HorizontalField HorizontalField::sine_1d(double amp) {
  SineTerm t;
  t.amp = Eigen::MatrixXd::Constant(1, 1, amp);
  t.w = Eigen::VectorXd::Constant(1, 1.0);
  t.phase = 0.0;
  return HorizontalField(1, Eigen::MatrixXd::Zero(1, 1), {t});
}

bool HorizontalField::unit_periodic() const {
  for (const auto& s : sines_)
    for (int d = 0; d < n_; ++d)
      if (std::abs(s.w[d] - std::round(s.w[d])) > 1e-12) return false;
  return true;
}

Eigen::MatrixXd HorizontalField::at(const Eigen::VectorXd& x) const {
  Eigen::MatrixXd m = constant_;
  for (const auto& s : sines_) m += s.amp * std::sin(2.0 * M_PI * s.w.dot(x) + s.phase);
  return m;
}

Eigen::MatrixXd HorizontalField::partial(int l, const Eigen::VectorXd& x) const {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n_, n_);
  for (const auto& s : sines_)
    m += s.amp * (2.0 * M_PI * s.w[l] * std::cos(2.0 * M_PI * s.w.dot(x) + s.phase));
  return m;
}

Eigen::MatrixXd HorizontalField::partial2(int l1, int l2, const Eigen::VectorXd& x) const {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n_, n_);
  for (const auto& s : sines_)
    m += s.amp * (-4.0 * M_PI * M_PI * s.w[l1] * s.w[l2] * std::sin(2.0 * M_PI * s.w.dot(x) + s.phase));
  return m;
}

double HorizontalField::grad_norm_bound() const {
  // |(nabla_u A)(u)| <= sum_s 2 pi |<w_s, u>| |S_s u| <= sum_s 2 pi |w_s| sigma_max(S_s)
  double b = 0.0;
  for (const auto& s : sines_) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(s.amp);
    b += 2.0 * M_PI * s.w.norm() * svd.singularValues()(0);
  }
  return b;
}

CoeffPtr HorizontalField::partial_coeff(int i, int j, int l) const {
  std::vector<coeff::TrigTerm> terms;
  for (const auto& s : sines_) {
    const double c = 2.0 * M_PI * s.w[l] * s.amp(i, j);
    if (c == 0.0) continue;
    // d/dx_l sin(2 pi <w,x> + phi) = 2 pi w_l cos(2 pi <w,x> + phi)
    coeff::TrigTerm t;
    t.w.resize(n_);
    for (int d = 0; d < n_; ++d) t.w[d] = static_cast<int>(std::llround(s.w[d]));
    t.c_cos = c * std::cos(s.phase);
    t.c_sin = -c * std::sin(s.phase);
    terms.push_back(std::move(t));
  }
  if (terms.empty()) return coeff::constant(n_, Complex(0, 0));
  return coeff::trig(n_, std::move(terms));
}

HorizontalField HorizontalField::from_json(const nlohmann::json& j, int n) {
  if (j.is_null()) return zero(n);
  const std::string kind = j.value("kind", std::string("sum"));
  if (kind == "zero") return zero(n);
  if (kind == "const" || kind == "constant") return constant(parse_matrix(j.at("value"), n));
  if (kind == "sin") {
    SineTerm t;
    t.amp = parse_matrix(j.at("amp"), n);
    if (j.contains("w")) {
      t.w = Eigen::VectorXd(n);
      for (int d = 0; d < n; ++d) t.w[d] = j.at("w").at(d).get<double>();
    } else {
      t.w = Eigen::VectorXd::Zero(n);
      t.w[0] = 1.0;
    }
    t.phase = j.value("phase", 0.0);
    Eigen::MatrixXd c = j.contains("const") ? parse_matrix(j.at("const"), n) : Eigen::MatrixXd::Zero(n, n);
    return HorizontalField(n, c, {t});
  }
  if (kind == "sum") {
    Eigen::MatrixXd c =
        j.contains("const") ? parse_matrix(j.at("const"), n) : Eigen::MatrixXd::Zero(n, n);
    std::vector<SineTerm> terms;
    if (j.contains("sines")) {
      for (const auto& tj : j.at("sines")) {
        SineTerm t;
        t.amp = parse_matrix(tj.at("amp"), n);
        t.w = Eigen::VectorXd(n);
        for (int d = 0; d < n; ++d) t.w[d] = tj.at("w").at(d).get<double>();
        t.phase = tj.value("phase", 0.0);
        terms.push_back(std::move(t));
      }
    }
    return HorizontalField(n, c, std::move(terms));
  }
  throw std::invalid_argument("unknown horizontal field kind: " + kind);
}

nlohmann::json HorizontalField::to_json() const {
  nlohmann::json sines = nlohmann::json::array();
  for (const auto& s : sines_) {
    nlohmann::json amp = nlohmann::json::array();
    for (int i = 0; i < n_; ++i) {
      nlohmann::json row = nlohmann::json::array();
      for (int c = 0; c < n_; ++c) row.push_back(s.amp(i, c));
      amp.push_back(row);
    }
    nlohmann::json w = nlohmann::json::array();
    for (int d = 0; d < n_; ++d) w.push_back(s.w[d]);
    sines.push_back({{"amp", amp}, {"w", w}, {"phase", s.phase}});
  }
  nlohmann::json c = nlohmann::json::array();
  for (int i = 0; i < n_; ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (int col = 0; col < n_; ++col) row.push_back(constant_(i, col));
    c.push_back(row);
  }
  return {{"kind", "sum"}, {"const", c}, {"sines", sines}};
}

Cover Cover::plane() { return Cover(BaseKind::Plane, 1, 0.0); }

Cover Cover::torus(int charts_per_axis, double chart_length) {
  if (charts_per_axis < 3) throw std::invalid_argument("Cover: need at least 3 charts per axis");
  if (!(chart_length < 0.5)) throw std::invalid_argument("Cover: chart length must be < 1/2");
  if (!(chart_length > 1.0 / charts_per_axis))
    throw std::invalid_argument("Cover: charts do not overlap");
  return Cover(BaseKind::Torus, charts_per_axis, chart_length);
}

double Cover::closeness_radius() const {
  if (base_ == BaseKind::Plane) return std::numeric_limits<double>::infinity();
  return length_ - 1.0 / charts_;
}

namespace {

struct PhaseState {
  Eigen::VectorXd alpha;  // transport angle
  double moment;          // int_0^t s <u, alpha'(s)> ds
};

// One RK4 sweep of alpha' = A(mid + t u) u from t = 0 to t = t_end.
PhaseState integrate_phase(const HorizontalField& a, const Eigen::VectorXd& mid,
                           const Eigen::VectorXd& u, double t_end, int steps) {
  const int n = a.n();
  PhaseState st{Eigen::VectorXd::Zero(n), 0.0};
  const double h = t_end / steps;
  auto deriv = [&](double t) -> Eigen::VectorXd { return a.at(mid + t * u) * u; };
  for (int i = 0; i < steps; ++i) {
    const double t = i * h;
    const Eigen::VectorXd k1 = deriv(t);
    const Eigen::VectorXd k2 = deriv(t + 0.5 * h);
    const Eigen::VectorXd k4 = deriv(t + h);
    // alpha' does not depend on alpha, so RK4 collapses to Simpson (k2 = k3)
    st.alpha += (h / 6.0) * (k1 + 4.0 * k2 + k4);
    st.moment += (h / 6.0) * (t * u.dot(k1) + 4.0 * (t + 0.5 * h) * u.dot(k2) + (t + h) * u.dot(k4));
  }
  return st;
}

double phase_once(const HorizontalField& a, const Eigen::VectorXd& mid, const Eigen::VectorXd& mvec,
                  const Eigen::VectorXd& u, double big_t, int k, int steps) {
  const PhaseState fwd = integrate_phase(a, mid, u, big_t, steps);
  const PhaseState bwd = integrate_phase(a, mid, u, -big_t, steps);
  const Eigen::VectorXd alpha_sum = fwd.alpha + bwd.alpha;
  const double bracket = -mvec.dot(alpha_sum) / (2.0 * k) + (fwd.moment - bwd.moment);
  return k * bracket;
}

}  // namespace

double horizontal_phase(const HorizontalField& a, const Eigen::VectorXd& x, const std::vector<int>& m,
                        int k, const PhaseOptions& opts) {
  if (static_cast<int>(m.size()) != a.n()) throw std::invalid_argument("horizontal_phase: m dim mismatch");
  Eigen::VectorXd mvec(a.n());
  for (int d = 0; d < a.n(); ++d) mvec[d] = m[d];
  const double mlen = mvec.norm();
  if (mlen == 0.0) return 0.0;
  const Eigen::VectorXd u = mvec / mlen;
  const Eigen::VectorXd mid = x + mvec / (2.0 * k);
  const double big_t = mlen / (2.0 * k);

  int steps = opts.min_steps * opts.refine_factor;
  double phase = phase_once(a, mid, mvec, u, big_t, k, steps);
  for (int halvings = 0; halvings < 12; ++halvings) {
    steps *= 2;
    const double refined = phase_once(a, mid, mvec, u, big_t, k, steps);
    const double change = std::abs(refined - phase);
    phase = refined;
    if (change < opts.tol) break;
  }
  return phase;
}

namespace {

// Window must contain the region where the fiber coefficients are
// non-negligible; quantization must not silently truncate.
void check_window(const FiberedFunction& f, double lo, double hi) {
  double radius = 0.0;
  for (const auto& [m, c] : f.modes()) {
    const double sb = c->sup_bound();
    const double eps = 1e-12 * std::max(1.0, sb);
    radius = std::max(radius, c->decay_radius(eps));
  }
  if (!std::isfinite(radius))
    throw std::invalid_argument("quantize: coefficients do not decay; no finite window is adequate");
  if (lo > -radius || hi < radius)
    throw std::invalid_argument("quantize: window too small for the decay radius of f");
}

using EntryPhase = std::function<double(const Eigen::VectorXd& x, const std::vector<int>& m)>;

BandOperator assemble(const FiberedFunction& f, const Lattice& lat, int k, const EntryPhase& phase) {
  BandOperator op(lat);
  for (const auto& [m, c] : f.modes()) {
    Eigen::VectorXcd& band = op.band(m);
    Eigen::VectorXd mhalf(lat.n());
    for (int d = 0; d < lat.n(); ++d) mhalf[d] = m[d] / (2.0 * k);
    for (std::int64_t i = 0; i < lat.size(); ++i) {
      const std::vector<int> col = lat.unflat(i);
      if (lat.base() == BaseKind::Plane) {
        std::vector<int> row(col.size());
        for (size_t d = 0; d < col.size(); ++d) row[d] = col[d] + m[d];
        if (!lat.contains(row)) continue;
      }
      const Eigen::VectorXd x = lat.point(col);
      const Complex v = c->value(x + mhalf);
      if (phase) {
        const double ph = phase(x, m);
        band[i] = v * std::exp(Complex(0.0, ph));
      } else {
        band[i] = v;
      }
    }
  }
  return op;
}

}  // namespace

BandOperator quantize_model(const FiberedFunction& f, int k, double lo, double hi) {
  if (f.base_kind() != BaseKind::Plane) throw std::invalid_argument("quantize_model: plane base required");
  if (k < 1) throw std::invalid_argument("quantize_model: k must be >= 1");
  check_window(f, lo, hi);
  const Lattice lat = Lattice::plane(f.n(), k, lo, hi);
  return assemble(f, lat, k, nullptr);
}

BandOperator quantize_general(const FiberedFunction& f, const HorizontalField& a, const Cover& cover,
                              int k, double lo, double hi) {
  if (f.base_kind() != BaseKind::Plane)
    throw std::invalid_argument("quantize_general: plane base required (use quantize_torus otherwise)");
  if (a.n() != f.n()) throw std::invalid_argument("quantize_general: field dimension mismatch");
  if (cover.base() != BaseKind::Plane) throw std::invalid_argument("quantize_general: plane cover required");
  if (static_cast<double>(f.band_limit()) / k > cover.closeness_radius())
    throw std::invalid_argument("quantize_general: band exceeds the closeness radius of the cover");
  check_window(f, lo, hi);
  const Lattice lat = Lattice::plane(f.n(), k, lo, hi);
  if (a.is_constant()) return assemble(f, lat, k, nullptr);  // phases vanish by odd symmetry
  return assemble(f, lat, k, [&](const Eigen::VectorXd& x, const std::vector<int>& m) {
    return horizontal_phase(a, x, m, k);
  });
}

BandOperator quantize_torus(const FiberedFunction& f, const HorizontalField& a, int k) {
  if (f.base_kind() != BaseKind::Torus) throw std::invalid_argument("quantize_torus: torus base required");
  if (a.n() != f.n()) throw std::invalid_argument("quantize_torus: field dimension mismatch");
  if (!a.unit_periodic()) throw std::invalid_argument("quantize_torus: field must be 1-periodic");
  if (!(f.band_limit() < 0.25 * k))
    throw std::invalid_argument("quantize_torus: band limit must be < k/4");
  const Lattice lat = Lattice::torus(f.n(), k);
  if (a.is_constant()) return assemble(f, lat, k, nullptr);
  return assemble(f, lat, k, [&](const Eigen::VectorXd& x, const std::vector<int>& m) {
    return horizontal_phase(a, x, m, k);
  });
}

}  // namespace lagq
