#include "lagq/toeplitz.hpp"

#include <cmath>
#include <mutex>
#include <stdexcept>
#include <unordered_map>

namespace lagq {

namespace quad {

namespace {

// Golub-Welsch: nodes are eigenvalues of the Jacobi matrix, weights are
// mu0 * (first eigenvector component)^2.
Rule golub_welsch(const Eigen::VectorXd& offdiag, double mu0) {
  const int q = static_cast<int>(offdiag.size()) + 1;
  Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(q, q);
  for (int i = 0; i + 1 < q; ++i) {
    jac(i, i + 1) = offdiag[i];
    jac(i + 1, i) = offdiag[i];
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jac);
  Rule r;
  r.nodes = es.eigenvalues();
  r.weights.resize(q);
  for (int i = 0; i < q; ++i) {
    const double v0 = es.eigenvectors()(0, i);
    r.weights[i] = mu0 * v0 * v0;
  }
  return r;
}

const Rule& cached(int order, std::unordered_map<int, Rule>& cache, std::mutex& mu,
                   Rule (*make)(int)) {
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(order);
  if (it == cache.end()) it = cache.emplace(order, make(order)).first;
  return it->second;
}

Rule make_hermite(int q) {
  Eigen::VectorXd off(q - 1);
  for (int i = 1; i < q; ++i) off[i - 1] = std::sqrt(i / 2.0);
  return golub_welsch(off, std::sqrt(M_PI));
}

Rule make_legendre(int q) {
  Eigen::VectorXd off(q - 1);
  for (int i = 1; i < q; ++i) off[i - 1] = i / std::sqrt(4.0 * i * i - 1.0);
  return golub_welsch(off, 2.0);
}

}  // namespace

const Rule& gauss_hermite(int order) {
  static std::mutex mu;
  static std::unordered_map<int, Rule> cache;
  return cached(order, cache, mu, make_hermite);
}

const Rule& gauss_legendre(int order) {
  static std::mutex mu;
  static std::unordered_map<int, Rule> cache;
  return cached(order, cache, mu, make_legendre);
}

}  // namespace quad

SiegelForm::SiegelForm(Eigen::MatrixXd p, Eigen::MatrixXd q) : P(std::move(p)), Q(std::move(q)) {
  if (P.rows() != P.cols() || Q.rows() != Q.cols() || P.rows() != Q.rows())
    throw std::invalid_argument("SiegelForm: P and Q must be square of equal size");
  if ((P - P.transpose()).cwiseAbs().maxCoeff() > 1e-12)
    throw std::invalid_argument("SiegelForm: P must be symmetric");
  if ((Q - Q.transpose()).cwiseAbs().maxCoeff() > 1e-12)
    throw std::invalid_argument("SiegelForm: Q must be symmetric");
  Eigen::LLT<Eigen::MatrixXd> llt(Q);
  if (llt.info() != Eigen::Success)
    throw std::invalid_argument("SiegelForm: Q must be positive definite");
}

SiegelForm SiegelForm::standard(int n) {
  return SiegelForm(Eigen::MatrixXd::Zero(n, n), Eigen::MatrixXd::Identity(n, n));
}

CoherentFrame::CoherentFrame(int k, SiegelForm omega, double lo, double hi)
    : k_(k), omega_(std::move(omega)), lattice_(Lattice::plane(omega_.n(), k, lo, hi)) {
  const int n = omega_.n();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(omega_.Q);
  q_basis_ = es.eigenvectors();
  q_eigs_ = es.eigenvalues();
  // a^{-2} = (pi/k)^{n/2} det(Q)^{-1/2}
  a_kq_ = std::pow(k / M_PI, n / 4.0) * std::pow(q_eigs_.prod(), 0.25);
}

namespace {

struct BtIntegrand {
  const CoefficientFunction* coeff;
  Eigen::VectorXd mid;
  Eigen::VectorXd p_phase;  // P * p; the oscillatory factor e^{i <P p, xi>}
};

// Gauss-Hermite evaluation of int f(mid + xi) e^{-k xi^T Q xi} e^{i <Pp, xi>} dxi
// in the Q-diagonalizing frame, at a fixed order per axis.
Complex gh_pass(const BtIntegrand& ig, const CoherentFrame& frame, int order) {
  const int n = frame.omega().n();
  const quad::Rule& rule = quad::gauss_hermite(order);
  double jac = 1.0;
  Eigen::MatrixXd cols(n, n);  // column d = V_d / sqrt(k lambda_d)
  for (int d = 0; d < n; ++d) {
    const double s = 1.0 / std::sqrt(frame.k() * frame.q_eigs()[d]);
    cols.col(d) = frame.q_basis().col(d) * s;
    jac *= s;
  }
  Complex acc(0, 0);
  std::vector<int> idx(n, 0);
  Eigen::VectorXd xi(n);
  while (true) {
    double w = 1.0;
    xi.setZero();
    for (int d = 0; d < n; ++d) {
      w *= rule.weights[idx[d]];
      xi += rule.nodes[idx[d]] * cols.col(d);
    }
    Complex v = ig.coeff->value(ig.mid + xi);
    const double ph = ig.p_phase.dot(xi);
    if (ph != 0.0) v *= std::exp(Complex(0.0, ph));
    acc += w * v;
    int d = 0;
    while (d < n && ++idx[d] == order) idx[d++] = 0;
    if (d == n) break;
  }
  return jac * acc;
}

// Composite Gauss-Legendre fallback for compactly supported (bump)
// coefficients, where Hermite convergence degrades.
Complex legendre_pass(const BtIntegrand& ig, const CoherentFrame& frame, double radius, int order) {
  const int n = frame.omega().n();
  const quad::Rule& rule = quad::gauss_legendre(order);
  const Eigen::MatrixXd& q = frame.omega().Q;
  Complex acc(0, 0);
  std::vector<int> idx(n, 0);
  Eigen::VectorXd x(n), xi(n);
  double jac = 1.0;
  for (int d = 0; d < n; ++d) jac *= radius;
  while (true) {
    double w = 1.0;
    for (int d = 0; d < n; ++d) {
      w *= rule.weights[idx[d]];
      x[d] = radius * rule.nodes[idx[d]];  // support box is centered at the origin
    }
    xi = x - ig.mid;
    Complex v = ig.coeff->value(x);
    if (v != Complex(0, 0)) {
      const double expo = -frame.k() * xi.dot(q * xi);
      const double ph = ig.p_phase.dot(xi);
      v *= std::exp(Complex(expo, ph));
      acc += w * v;
    }
    int d = 0;
    while (d < n && ++idx[d] == order) idx[d++] = 0;
    if (d == n) break;
  }
  return jac * acc;
}

Complex bt_integral(const CoefficientFunction& coeff, const CoherentFrame& frame,
                    const Eigen::VectorXd& mid, const std::vector<int>& p) {
  const int n = frame.omega().n();
  BtIntegrand ig;
  ig.coeff = &coeff;
  ig.mid = mid;
  Eigen::VectorXd pv(n);
  for (int d = 0; d < n; ++d) pv[d] = p[d];
  ig.p_phase = frame.omega().P * pv;

  if (coeff.compact_support()) {
    const double radius = coeff.decay_radius(0.0);
    int order = 64;
    Complex prev = legendre_pass(ig, frame, radius, order);
    for (int pass = 0; pass < 7; ++pass) {
      order *= 2;
      const Complex cur = legendre_pass(ig, frame, radius, order);
      if (std::abs(cur - prev) <= 1e-9 * std::max(1.0, std::abs(cur))) return cur;
      prev = cur;
    }
    throw std::runtime_error("bt_matrix_element: quadrature failed to stabilize (bump path)");
  }

  int order = 40;
  Complex prev = gh_pass(ig, frame, order);
  for (int pass = 0; pass < 5; ++pass) {
    order *= 2;
    const Complex cur = gh_pass(ig, frame, order);
    if (std::abs(cur - prev) <= 1e-9 * std::max(1.0, std::abs(cur))) return cur;
    prev = cur;
  }
  throw std::runtime_error("bt_matrix_element: quadrature failed to stabilize");
}

Complex bt_element_for_mode(const FiberedFunction& f, const CoherentFrame& frame,
                            const std::vector<int>& p, const Eigen::VectorXd& mid) {
  CoeffPtr c = f.mode(p);
  if (!c) return Complex(0, 0);
  const int n = f.n();
  Eigen::VectorXd pv(n);
  for (int d = 0; d < n; ++d) pv[d] = p[d];
  const double gauss_factor = std::exp(-pv.dot(frame.omega().Q * pv) / (4.0 * frame.k()));
  const double a2 = frame.normalization() * frame.normalization();
  return a2 * gauss_factor * bt_integral(*c, frame, mid, p);
}

}  // namespace

Complex bt_matrix_element(const FiberedFunction& f, const CoherentFrame& frame,
                          const std::vector<int>& row, const std::vector<int>& col) {
  if (f.base_kind() != BaseKind::Plane) throw std::invalid_argument("bt_matrix_element: plane base required");
  const int n = f.n();
  std::vector<int> p(n);
  Eigen::VectorXd mid(n);
  for (int d = 0; d < n; ++d) {
    p[d] = row[d] - col[d];
    mid[d] = 0.5 * (row[d] + col[d]) / frame.k();
  }
  return bt_element_for_mode(f, frame, p, mid);
}

BandOperator bt_operator(const FiberedFunction& f, const CoherentFrame& frame) {
  if (f.base_kind() != BaseKind::Plane) throw std::invalid_argument("bt_operator: plane base required");
  const Lattice& lat = frame.lattice();
  BandOperator op(lat);
  for (const auto& [m, c] : f.modes()) {
    Eigen::VectorXcd& band = op.band(m);
    for (std::int64_t i = 0; i < lat.size(); ++i) {
      const std::vector<int> col = lat.unflat(i);
      std::vector<int> rowl(col.size());
      for (size_t d = 0; d < col.size(); ++d) rowl[d] = col[d] + m[d];
      if (!lat.contains(rowl)) continue;
      Eigen::VectorXd mid(lat.n());
      for (int d = 0; d < lat.n(); ++d) mid[d] = 0.5 * (col[d] + rowl[d]) / frame.k();
      band[i] = bt_element_for_mode(f, frame, m, mid);
    }
  }
  return op;
}

BandOperator theta_bt_operator(const FiberedFunction& f, const SiegelForm& omega, int k) {
  if (f.base_kind() != BaseKind::Torus) throw std::invalid_argument("theta_bt_operator: torus base required");
  if (!(f.band_limit() < 0.25 * k))
    throw std::invalid_argument("theta_bt_operator: band limit must be < k/4");
  // Use a window wide enough for the coherent-state quadrature around any
  // lattice midpoint in [0, 1).
  CoherentFrame frame(k, omega, -2.0, 3.0);
  const Lattice lat = Lattice::torus(f.n(), k);
  BandOperator op(lat);
  // Theta elements are lattice sums over shifts p + k l; every l != 0 term
  // vanishes because f has no mode that far out (band limit < k/4).
  for (const auto& [m, c] : f.modes()) {
    Eigen::VectorXcd& band = op.band(m);
    for (std::int64_t i = 0; i < lat.size(); ++i) {
      const std::vector<int> col = lat.unflat(i);
      Eigen::VectorXd mid(lat.n());
      for (int d = 0; d < lat.n(); ++d) mid[d] = (col[d] + 0.5 * m[d]) / k;
      band[i] = bt_element_for_mode(f, frame, m, mid);
    }
  }
  return op;
}

double dq_bt_distance_plane(const FiberedFunction& f, const HorizontalField& a,
                            const CoherentFrame& frame) {
  if (!a.is_constant() || (a.constant_part() - frame.omega().P).cwiseAbs().maxCoeff() > 1e-12)
    throw std::invalid_argument("dq_bt_distance: the field must be the constant field P = Re(Omega)");
  const BandOperator phi =
      quantize_general(f, a, Cover::plane(), frame.k(), frame.lattice().lo(), frame.lattice().hi());
  const BandOperator t = bt_operator(f, frame);
  return (phi - t).op_norm();
}

double dq_bt_distance_torus(const FiberedFunction& f, const HorizontalField& a,
                            const SiegelForm& omega, int k) {
  if (!a.is_constant() || (a.constant_part() - omega.P).cwiseAbs().maxCoeff() > 1e-12)
    throw std::invalid_argument("dq_bt_distance: the field must be the constant field P = Re(Omega)");
  const BandOperator phi = quantize_torus(f, a, k);
  const BandOperator t = theta_bt_operator(f, omega, k);
  return (phi - t).op_norm();
}

FiberedFunction shear(const FiberedFunction& f, const Eigen::MatrixXd& p) {
  if (p.rows() != f.n() || p.cols() != f.n()) throw std::invalid_argument("shear: P dimension mismatch");
  FiberedFunction::ModeMap modes;
  for (const auto& [m, c] : f.modes()) {
    Eigen::VectorXd mv(f.n());
    for (int d = 0; d < f.n(); ++d) mv[d] = m[d];
    const Eigen::VectorXd freq = p * mv;
    if (freq.cwiseAbs().maxCoeff() == 0.0) {
      modes[m] = c;
    } else {
      modes[m] = coeff::product({c, coeff::plane_wave(freq, Complex(1, 0))});
    }
  }
  return FiberedFunction(f.n(), f.base_kind(), f.real_flag(), std::move(modes));
}

}  // namespace lagq
