#include "lagq/band_operator.hpp"

#include <cmath>
#include <ostream>
#include <random>
#include <stdexcept>

namespace lagq {

namespace {

int wrap_mod(int v, int k) {
  int r = v % k;
  return r < 0 ? r + k : r;
}

}  // namespace

Lattice Lattice::plane(int n, int k, double lo, double hi) {
  if (n < 1 || k < 1) throw std::invalid_argument("Lattice: bad n/k");
  if (!(lo < hi)) throw std::invalid_argument("Lattice: window must satisfy lo < hi");
  const double a = lo * k, b = hi * k;
  if (std::abs(a - std::round(a)) > 1e-9 || std::abs(b - std::round(b)) > 1e-9)
    throw std::invalid_argument("Lattice: window endpoints must be lattice points (k*lo, k*hi integral)");
  return Lattice(n, k, BaseKind::Plane, static_cast<int>(std::llround(a)), static_cast<int>(std::llround(b)));
}

Lattice Lattice::torus(int n, int k) {
  if (n < 1 || k < 1) throw std::invalid_argument("Lattice: bad n/k");
  return Lattice(n, k, BaseKind::Torus, 0, k - 1);
}

std::int64_t Lattice::size() const {
  std::int64_t s = 1;
  for (int d = 0; d < n_; ++d) s *= points_per_axis();
  return s;
}

bool Lattice::contains(const std::vector<int>& l) const {
  if (base_ == BaseKind::Torus) return true;
  for (int v : l)
    if (v < lmin_ || v > lmax_) return false;
  return true;
}

std::int64_t Lattice::flat(const std::vector<int>& l) const {
  const int per = points_per_axis();
  std::int64_t idx = 0, mul = 1;
  for (int d = 0; d < n_; ++d) {
    const int v = base_ == BaseKind::Torus ? wrap_mod(l[d], k_) : l[d] - lmin_;
    idx += static_cast<std::int64_t>(v) * mul;
    mul *= per;
  }
  return idx;
}

std::vector<int> Lattice::unflat(std::int64_t idx) const {
  const int per = points_per_axis();
  std::vector<int> l(n_);
  for (int d = 0; d < n_; ++d) {
    l[d] = static_cast<int>(idx % per) + (base_ == BaseKind::Torus ? 0 : lmin_);
    idx /= per;
  }
  return l;
}

Eigen::VectorXd Lattice::point(const std::vector<int>& l) const {
  Eigen::VectorXd x(n_);
  for (int d = 0; d < n_; ++d) x[d] = static_cast<double>(l[d]) / k_;
  return x;
}

bool Lattice::operator==(const Lattice& o) const {
  return n_ == o.n_ && k_ == o.k_ && base_ == o.base_ && lmin_ == o.lmin_ && lmax_ == o.lmax_;
}

BandOperator::BandOperator(Lattice lattice) : lattice_(std::move(lattice)) {}

BandOperator BandOperator::identity(const Lattice& lattice) {
  BandOperator a(lattice);
  a.band(std::vector<int>(lattice.n(), 0)).setOnes();
  return a;
}

int BandOperator::band_width() const {
  int w = 0;
  for (const auto& [p, v] : bands_)
    for (int pd : p) w = std::max(w, std::abs(pd));
  return w;
}

Eigen::VectorXcd& BandOperator::band(const std::vector<int>& p) {
  if (static_cast<int>(p.size()) != lattice_.n()) throw std::invalid_argument("band: offset dim mismatch");
  auto it = bands_.find(p);
  if (it == bands_.end())
    it = bands_.emplace(p, Eigen::VectorXcd::Zero(lattice_.size())).first;
  return it->second;
}

bool BandOperator::row_valid(const std::vector<int>& col, const std::vector<int>& p) const {
  if (lattice_.base() == BaseKind::Torus) return true;
  std::vector<int> row(col.size());
  for (size_t d = 0; d < col.size(); ++d) row[d] = col[d] + p[d];
  return lattice_.contains(row);
}

Complex BandOperator::entry(const std::vector<int>& row, const std::vector<int>& col) const {
  if (!lattice_.contains(row) || !lattice_.contains(col)) return Complex(0, 0);
  Complex r(0, 0);
  for (const auto& [p, v] : bands_) {
    bool match = true;
    for (size_t d = 0; d < p.size(); ++d) {
      const int diff = row[d] - col[d] - p[d];
      if (lattice_.base() == BaseKind::Torus ? wrap_mod(diff, lattice_.k()) != 0 : diff != 0) {
        match = false;
        break;
      }
    }
    if (match) r += v[lattice_.flat(col)];
  }
  return r;
}

BandOperator BandOperator::adjoint() const {
  BandOperator r(lattice_);
  for (const auto& [p, v] : bands_) {
    std::vector<int> q(p.size());
    for (size_t d = 0; d < p.size(); ++d) q[d] = -p[d];
    Eigen::VectorXcd& dst = r.band(q);
    // A*(x + q/k, x) = conj(A(x, x + q/k)) = conj(band_p at column x + q/k)
    for (std::int64_t i = 0; i < lattice_.size(); ++i) {
      std::vector<int> col = lattice_.unflat(i);
      std::vector<int> src(col.size());
      for (size_t d = 0; d < col.size(); ++d) src[d] = col[d] + q[d];
      if (!lattice_.contains(src)) continue;
      dst[i] = std::conj(v[lattice_.flat(src)]);
    }
  }
  return r;
}

BandOperator BandOperator::operator+(const BandOperator& o) const {
  check_same_lattice(o);
  BandOperator r = *this;
  for (const auto& [p, v] : o.bands_) r.band(p) += v;
  return r;
}

BandOperator BandOperator::operator-(const BandOperator& o) const {
  check_same_lattice(o);
  BandOperator r = *this;
  for (const auto& [p, v] : o.bands_) r.band(p) -= v;
  return r;
}

BandOperator BandOperator::scaled(Complex z) const {
  BandOperator r(lattice_);
  for (const auto& [p, v] : bands_) r.band(p) = z * v;
  return r;
}

Eigen::VectorXcd BandOperator::apply(const Eigen::VectorXcd& v) const {
  Eigen::VectorXcd out = Eigen::VectorXcd::Zero(lattice_.size());
  for (const auto& [p, band] : bands_) {
    for (std::int64_t i = 0; i < lattice_.size(); ++i) {
      if (band[i] == Complex(0, 0)) continue;
      std::vector<int> col = lattice_.unflat(i);
      std::vector<int> row(col.size());
      for (size_t d = 0; d < col.size(); ++d) row[d] = col[d] + p[d];
      if (!lattice_.contains(row)) continue;
      out[lattice_.flat(row)] += band[i] * v[i];
    }
  }
  return out;
}

Eigen::VectorXcd BandOperator::apply_adjoint(const Eigen::VectorXcd& v) const {
  Eigen::VectorXcd out = Eigen::VectorXcd::Zero(lattice_.size());
  for (const auto& [p, band] : bands_) {
    for (std::int64_t i = 0; i < lattice_.size(); ++i) {
      if (band[i] == Complex(0, 0)) continue;
      std::vector<int> col = lattice_.unflat(i);
      std::vector<int> row(col.size());
      for (size_t d = 0; d < col.size(); ++d) row[d] = col[d] + p[d];
      if (!lattice_.contains(row)) continue;
      out[i] += std::conj(band[i]) * v[lattice_.flat(row)];
    }
  }
  return out;
}

Eigen::MatrixXcd BandOperator::dense() const {
  const std::int64_t n = lattice_.size();
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(n, n);
  for (const auto& [p, band] : bands_) {
    for (std::int64_t i = 0; i < n; ++i) {
      if (band[i] == Complex(0, 0)) continue;
      std::vector<int> col = lattice_.unflat(i);
      std::vector<int> row(col.size());
      for (size_t d = 0; d < col.size(); ++d) row[d] = col[d] + p[d];
      if (!lattice_.contains(row)) continue;
      m(lattice_.flat(row), i) += band[i];
    }
  }
  return m;
}

double BandOperator::op_norm(double rel_tol, unsigned seed) const {
  const std::int64_t n = lattice_.size();
  if (bands_.empty()) return 0.0;
  if (n <= 2048) {
    const Eigen::MatrixXcd a = dense();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(a.adjoint() * a, Eigen::EigenvaluesOnly);
    const double lmax = es.eigenvalues().maxCoeff();
    return std::sqrt(std::max(0.0, lmax));
  }
  // power iteration on A*A with certified residual
  std::mt19937 gen(seed);
  std::normal_distribution<double> dist(0.0, 1.0);
  Eigen::VectorXcd v(n);
  for (std::int64_t i = 0; i < n; ++i) v[i] = Complex(dist(gen), dist(gen));
  v.normalize();
  double lambda = 0.0;
  for (int it = 0; it < 100000; ++it) {
    Eigen::VectorXcd w = apply_adjoint(apply(v));
    const double nl = w.norm();
    if (nl == 0.0) return 0.0;
    w /= nl;
    const double change = std::abs(nl - lambda) / std::max(nl, 1e-300);
    lambda = nl;
    v = w;
    if (change < rel_tol) {
      const Eigen::VectorXcd r = apply_adjoint(apply(v)) - lambda * v;
      if (r.norm() <= 1e-8 * lambda) break;
    }
  }
  return std::sqrt(lambda);
}

double BandOperator::band_norm_bound() const {
  double s = 0.0;
  for (const auto& [p, band] : bands_) {
    double sup = 0.0;
    for (std::int64_t i = 0; i < lattice_.size(); ++i) {
      if (!row_valid(lattice_.unflat(i), p)) continue;
      sup = std::max(sup, std::abs(band[i]));
    }
    s += sup;
  }
  return s;
}

double BandOperator::max_abs_entry() const {
  double s = 0.0;
  for (const auto& [p, band] : bands_) {
    for (std::int64_t i = 0; i < lattice_.size(); ++i) {
      if (!row_valid(lattice_.unflat(i), p)) continue;
      s = std::max(s, std::abs(band[i]));
    }
  }
  return s;
}

void BandOperator::export_csv(std::ostream& out) const {
  for (const auto& [p, band] : bands_) {
    for (std::int64_t i = 0; i < lattice_.size(); ++i) {
      std::vector<int> col = lattice_.unflat(i);
      if (!row_valid(col, p)) continue;
      if (band[i] == Complex(0, 0)) continue;
      for (size_t d = 0; d < col.size(); ++d) {
        int r = col[d] + p[d];
        if (lattice_.base() == BaseKind::Torus) r = wrap_mod(r, lattice_.k());
        out << r << ',';
      }
      for (size_t d = 0; d < col.size(); ++d) out << col[d] << ',';
      out << band[i].real() << ',' << band[i].imag() << '\n';
    }
  }
}

void BandOperator::check_same_lattice(const BandOperator& o) const {
  if (!(lattice_ == o.lattice_)) throw std::invalid_argument("band operators live on different lattices");
}

BandOperator compose(const BandOperator& a, const BandOperator& b) {
  a.check_same_lattice(b);
  const Lattice& lat = a.lattice();
  BandOperator r(lat);
  // (AB)(x + (pa+pb)/k, x) = A(x + pb/k + pa/k, x + pb/k) * B(x + pb/k, x)
  for (const auto& [pa, va] : a.bands()) {
    for (const auto& [pb, vb] : b.bands()) {
      std::vector<int> p(pa.size());
      for (size_t d = 0; d < p.size(); ++d) p[d] = pa[d] + pb[d];
      Eigen::VectorXcd& dst = r.band(p);
      for (std::int64_t i = 0; i < lat.size(); ++i) {
        if (vb[i] == Complex(0, 0)) continue;
        std::vector<int> col = lat.unflat(i);
        std::vector<int> mid(col.size()), row(col.size());
        for (size_t d = 0; d < col.size(); ++d) {
          mid[d] = col[d] + pb[d];
          row[d] = col[d] + p[d];
        }
        if (!lat.contains(mid) || !lat.contains(row)) continue;
        dst[i] += va[lat.flat(mid)] * vb[i];
      }
    }
  }
  return r;
}

BandOperator commutator(const BandOperator& a, const BandOperator& b) {
  return compose(a, b) - compose(b, a);
}

}  // namespace lagq
